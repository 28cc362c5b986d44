//! Harvest every record of an OAI-PMH repository, page by page.
//!
//! `cargo run --example harvest -- https://repo.example.org/oai [set]`

use coauthor_net::oai::{HarvestError, HarvestJob, Harvester, JobHandle, OaiRecord, RecordSink, RepositoryConfig};

#[derive(Default)]
pub struct Printer {
    pub identifiers: Vec<String>,
    pub pages: usize,
    pub quiet: bool,
}

impl RecordSink for Printer {
    fn record(&mut self, record: OaiRecord) {
        if !self.quiet {
            let status = if record.deleted { " (deleted)" } else { "" };
            println!("{} {}{status}", record.identifier, record.creators().join("; "));
        }
        self.identifiers.push(record.identifier);
    }

    fn page_complete(&mut self, next: Option<&str>) {
        self.pages += 1;
        if !self.quiet {
            println!("-- page {} done, resumption token {:?}", self.pages, next);
        }
    }
}

pub async fn run_example(harvester: &Harvester, cfg: RepositoryConfig, quiet: bool) -> Result<(HarvestJob, Printer), HarvestError> {
    let info = harvester.identify(&cfg).await?;
    if !quiet {
        println!("{} (granularity {:?})", info.repository_name, info.granularity);
    }
    let job = JobHandle::new(HarvestJob::new("example", cfg.clone()));
    let mut sink = Printer { quiet, ..Printer::default() };
    harvester.harvest(&cfg, &job, &mut sink).await?;
    Ok((job.snapshot(), sink))
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let Some(base_url) = args.next() else {
        eprintln!("usage: harvest <base-url> [set]");
        std::process::exit(2);
    };
    let cfg = RepositoryConfig { set_spec: args.next(), ..RepositoryConfig::new(base_url) };
    let (job, sink) = run_example(&Harvester::new(), cfg, false).await?;
    println!("{:?}: {} records over {} pages", job.state, sink.identifiers.len(), sink.pages);
    Ok(())
}
