//! Rank authors by betweenness in both edge modes.
//!
//! `cargo run --example betweenness`

use coauthor_net::centrality::{betweenness, top_central, CentralityRanking, EdgeMode};
use coauthor_net::index::{CoauthorGraph, PartitionKey};

/// Two tight groups joined through two alternative brokers. Hop counts tie
/// the brokers; with weights, the frequent co-author `lou` is the closer one.
pub fn graph() -> CoauthorGraph {
    CoauthorGraph::from_edges([
        ("ada", "bea", 3),
        ("bea", "cai", 2),
        ("ada", "cai", 1),
        ("dan", "eve", 4),
        ("eve", "fay", 2),
        ("dan", "fay", 1),
        ("cai", "kim", 1),
        ("kim", "dan", 1),
        ("cai", "lou", 4),
        ("lou", "dan", 4),
    ])
}

pub fn run_example(mode: EdgeMode) -> CentralityRanking {
    let g = graph();
    top_central(&betweenness(&g, mode), &g, 3, PartitionKey::RepositoryWide)
}

fn main() {
    for mode in [EdgeMode::Unweighted, EdgeMode::Weighted] {
        println!("{}:", mode.as_str());
        for e in run_example(mode).entries {
            println!("  {}. {} raw={:.3} normalized={:.3}", e.rank, e.author, e.raw, e.normalized);
        }
    }
}
