//! Run the HTTP API in-process.
//!
//! `cargo run --example serve -- 127.0.0.1:8080 ./data [id=https://repo.example.org/oai ...]`
//!
//! Then, for example:
//!
//! ```text
//! curl -X POST localhost:8080/repositories/id/harvest
//! curl 'localhost:8080/repositories/id/centrality?ddc=004&top=5&format=json'
//! ```

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use coauthor_net::oai::{Harvester, RepositoryConfig};
use coauthor_net::service::http::serve;
use coauthor_net::service::{RepositoryEntry, Service, ServiceConfig, ServiceError};
use tokio::sync::oneshot;

/// A service listening on `listen`; drop or fire the sender to stop it.
pub async fn run_example(
    listen: &str,
    data_dir: PathBuf,
    repositories: Vec<RepositoryEntry>,
    harvester: Harvester,
) -> Result<(SocketAddr, oneshot::Sender<()>), ServiceError> {
    let config = ServiceConfig { data_dir, repositories, listen_address: listen.to_string(), ..ServiceConfig::default() };
    config.validate()?;
    let service = Arc::new(Service::with_harvester(config, harvester)?);
    let io = |source| ServiceError::Io { path: PathBuf::from(listen), source };
    let listener = tokio::net::TcpListener::bind(listen).await.map_err(io)?;
    let addr = listener.local_addr().map_err(io)?;
    let (stop, stopped) = oneshot::channel::<()>();
    tokio::spawn(serve(service, listener, async {
        let _ = stopped.await;
    }));
    Ok((addr, stop))
}

#[tokio::main]
async fn main() -> Result<(), ServiceError> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let listen = args.first().map_or("127.0.0.1:8080", String::as_str);
    let data_dir = PathBuf::from(args.get(1).map_or("data", String::as_str));
    let repositories = args[2.min(args.len())..]
        .iter()
        .filter_map(|a| a.split_once('='))
        .map(|(id, url)| RepositoryEntry::new(id, RepositoryConfig::new(url)))
        .collect();
    let (addr, _stop) = run_example(listen, data_dir, repositories, Harvester::new()).await?;
    println!("listening on http://{addr}; Ctrl-C stops");
    let _ = tokio::signal::ctrl_c().await;
    Ok(())
}
