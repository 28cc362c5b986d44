//! Build a co-author index and look at its partitions.
//!
//! `cargo run --example index`

use chrono::DateTime;
use coauthor_net::extract::Publication;
use coauthor_net::index::{CoauthorIndex, PartitionKey};

pub fn run_example() -> CoauthorIndex {
    let at = DateTime::from_timestamp(1_700_000_000, 0).unwrap();
    let mut index = CoauthorIndex::new("demo");
    let code = |c: &str| c.parse().unwrap();
    index.ingest(Publication::new("r1", ["Brandt, Philipp", "Okafor, Peter"], [code("004")], at));
    index.ingest(Publication::new("r2", ["Peter Okafor", "Lindqvist, Philipp"], [code("004"), code("020")], at));
    index.ingest(Publication::new("r3", ["Haddad, Katrin", "Lindqvist, Philipp"], [code("300")], at));
    index.ingest(Publication::new("r4", ["Haddad, Katrin", "Kowalski, Andreas"], [code("330")], at));
    index.retract("r4");
    index
}

fn main() {
    let index = run_example();
    println!("{} publications, generation {}", index.len(), index.generation());
    let mut keys = vec![PartitionKey::RepositoryWide];
    for class in index.ddc_classes() {
        keys.push(PartitionKey::ddc_exact(class));
    }
    keys.push(PartitionKey::from_query(Some("3")).unwrap());
    for key in keys {
        let g = index.subgraph(&key);
        println!("{key}: {} authors, {} links", g.node_count(), g.edge_count());
        for (a, b, w) in g.edges() {
            println!("  {} -- {} ({w})", g.display_name(a), g.display_name(b));
        }
    }
}
