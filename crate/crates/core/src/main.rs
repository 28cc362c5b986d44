use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use coauthor_net::service::{self, CentralityQuery, PlotQuery, Service, ServiceConfig, ServiceError};
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "coauthor-net", version, about = "Co-author networks and central authors from OAI-PMH repositories")]
struct Cli {
    /// Service configuration (TOML).
    #[arg(long, global = true, env = "COAUTHOR_NET_CONFIG", default_value = "coauthor-net.toml")]
    config: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Xml,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP API.
    Serve,
    /// Harvest a repository and update its index; waits for completion.
    Harvest {
        #[arg(long)]
        repo: String,
        /// Only request records changed since the last completed harvest.
        #[arg(long)]
        incremental: bool,
    },
    /// Print the most central authors of a partition.
    Centrality {
        #[arg(long)]
        repo: String,
        /// DDC class: three digits, or one digit for a main class.
        #[arg(long)]
        ddc: Option<String>,
        #[arg(long)]
        top: Option<usize>,
        #[arg(long, default_value = "unweighted")]
        mode: String,
        #[arg(long, value_enum, default_value = "xml")]
        format: Format,
    },
    /// Render a partition's co-author network as PNG.
    Plot {
        #[arg(long)]
        repo: String,
        #[arg(long)]
        ddc: Option<String>,
        /// Number of labelled authors.
        #[arg(long)]
        top: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("error: cannot start runtime: {e}");
            return ExitCode::from(1);
        }
    };
    match runtime.block_on(run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

async fn run(cli: Cli) -> Result<(), ServiceError> {
    let config = ServiceConfig::load(&cli.config)?;
    let service = Arc::new(Service::open(config)?);
    match cli.command {
        Command::Serve => {
            let addr = service.config().listen_address.clone();
            let listener = tokio::net::TcpListener::bind(&addr).await.map_err(|source| ServiceError::Io {
                path: PathBuf::from(&addr),
                source,
            })?;
            tracing::info!(%addr, "listening");
            let shutdown = async {
                let _ = tokio::signal::ctrl_c().await;
            };
            service::http::serve(service, listener, shutdown)
                .await
                .map_err(|e| ServiceError::Internal(e.to_string()))
        }
        Command::Harvest { repo, incremental } => {
            let job = service.harvest(&repo, incremental).await?;
            println!("{}", serde_json::to_string_pretty(&job).expect("job serializes"));
            Ok(())
        }
        Command::Centrality { repo, ddc, top, mode, format } => {
            let top = top.map(|t| t.to_string());
            let query = CentralityQuery::parse(
                ddc.as_deref(),
                top.as_deref(),
                Some(&mode),
                service.config().default_top_k,
            )?;
            let response = service.centrality(&repo, &query)?;
            match format {
                Format::Xml => print!("{}", response.to_xml()),
                Format::Json => println!("{}", response.to_json()),
            }
            Ok(())
        }
        Command::Plot { repo, ddc, top, seed, out } => {
            let (top, seed) = (top.map(|t| t.to_string()), seed.map(|s| s.to_string()));
            let query = PlotQuery::parse(ddc.as_deref(), top.as_deref(), seed.as_deref(), service.config().default_top_k)?;
            let plot = service.plot(&repo, &query)?;
            std::fs::write(&out, &plot.png).map_err(|source| ServiceError::Io { path: out.clone(), source })?;
            if plot.truncated() {
                eprintln!("note: {} nodes omitted from the plot", plot.omitted_nodes);
            }
            Ok(())
        }
    }
}
