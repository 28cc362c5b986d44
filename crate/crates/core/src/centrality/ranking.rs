use serde::{Deserialize, Serialize};

use super::brandes::{BetweennessResult, EdgeMode};
use crate::index::{CoauthorGraph, PartitionKey};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingEntry {
    pub rank: usize,
    /// Canonical name.
    pub author: String,
    pub display: String,
    pub raw: f64,
    pub normalized: f64,
    pub publication_count: u32,
}

/// The `k` most central authors of a partition.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityRanking {
    pub partition: PartitionKey,
    pub mode: EdgeMode,
    pub k: usize,
    pub entries: Vec<RankingEntry>,
}

/// Scores closer than this are ranked as ties, so accumulated rounding error
/// cannot override the name order.
pub const TIE_RESOLUTION: f64 = 1e-9;

fn tie_key(raw: f64) -> i64 {
    (raw / TIE_RESOLUTION).round() as i64
}

/// Orders authors by raw betweenness (descending), ties by canonical name
/// (ascending), and keeps the first `k`.
pub fn top_central(
    result: &BetweennessResult,
    graph: &CoauthorGraph,
    k: usize,
    partition: PartitionKey,
) -> CentralityRanking {
    assert!(k >= 1, "k must be positive");
    let mut order: Vec<(&String, f64)> = result.scores.iter().map(|(a, &s)| (a, s)).collect();
    order.sort_by(|(a, x), (b, y)| tie_key(*y).cmp(&tie_key(*x)).then_with(|| a.cmp(b)));
    let entries = order
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(i, (author, raw))| RankingEntry {
            rank: i + 1,
            author: author.clone(),
            display: graph.display_name(author).to_string(),
            raw,
            normalized: result.normalized[author],
            publication_count: graph.publication_count(author),
        })
        .collect();
    CentralityRanking {
        partition,
        mode: result.mode,
        k,
        entries,
    }
}
