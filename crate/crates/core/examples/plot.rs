//! Render a co-author network to PNG.
//!
//! `cargo run --example plot -- network.png`

use std::path::Path;

use coauthor_net::centrality::{betweenness, EdgeMode};
use coauthor_net::index::{CoauthorGraph, PartitionKey};
use coauthor_net::plot::{plot_partition, LayoutConfig, Plot};

pub fn run_example(out: &Path, seed: u64) -> std::io::Result<Plot> {
    let mut edges = Vec::new();
    let names: Vec<String> = (0..12).map(|i| format!("Author {i:02}")).collect();
    for (i, name) in names.iter().enumerate() {
        edges.push((name.as_str(), names[(i + 1) % 4].as_str(), 1 + (i % 3) as u32));
        if i >= 4 {
            edges.push((name.as_str(), names[4 + (i + 1) % 8].as_str(), 1));
        }
    }
    let g = CoauthorGraph::from_edges(edges.into_iter().filter(|(a, b, _)| a != b));
    let scores = betweenness(&g, EdgeMode::Unweighted);
    let cfg = LayoutConfig { width: 640, height: 480, seed, label_top_k: 4, ..LayoutConfig::default() };
    let plot = plot_partition(&g, &scores, PartitionKey::RepositoryWide, &cfg)
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    std::fs::write(out, &plot.png)?;
    Ok(plot)
}

fn main() -> std::io::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "network.png".into());
    let plot = run_example(Path::new(&out), 7)?;
    println!("wrote {out}: {} bytes, {} nodes", plot.png.len(), plot.layout.positions.len());
    Ok(())
}
