//! Betweenness centrality of authors and "most central authors" rankings.

mod brandes;
mod ranking;

pub use brandes::{betweenness, betweenness_parallel, max_pair_count, BetweennessResult, EdgeMode};
pub use ranking::{top_central, CentralityRanking, RankingEntry, TIE_RESOLUTION};
