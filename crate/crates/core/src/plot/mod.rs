//! PNG network plots: force-directed layout, node size by betweenness.

mod layout;
mod render;

use std::collections::BTreeSet;

pub use layout::{layout, radius_for, LayoutConfig, NodeLayout, MARGIN, MAX_RADIUS, MIN_RADIUS};
pub use render::{
    edge_alpha, render_png, BACKGROUND, EDGE_COLOR, LABEL_COLOR, NODE_COLOR, TOP_NODE_COLOR,
};

use crate::centrality::{top_central, BetweennessResult, CentralityRanking};
use crate::index::{CoauthorGraph, PartitionKey};

/// Plots never draw more nodes than this; larger partitions keep their most
/// central authors.
pub const MAX_PLOT_NODES: usize = 500;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PlotError {
    #[error("nothing to plot: the graph is empty")]
    EmptyGraph,
    #[error("invalid layout configuration: {0}")]
    InvalidConfig(String),
    #[error("layout has no position for {0}")]
    MissingNode(String),
    #[error("PNG encoding failed: {0}")]
    Encoding(String),
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub png: Vec<u8>,
    pub layout: NodeLayout,
    /// Nodes left out because of [`MAX_PLOT_NODES`].
    pub omitted_nodes: usize,
}

impl Plot {
    pub fn truncated(&self) -> bool {
        self.omitted_nodes > 0
    }
}

/// Lays out and renders a partition graph, restricted to its
/// [`MAX_PLOT_NODES`] most central authors and the edges among them.
pub fn plot_partition(
    graph: &CoauthorGraph,
    scores: &BetweennessResult,
    partition: PartitionKey,
    cfg: &LayoutConfig,
) -> Result<Plot, PlotError> {
    plot_with_cap(graph, scores, partition, cfg, MAX_PLOT_NODES)
}

pub fn plot_with_cap(
    graph: &CoauthorGraph,
    scores: &BetweennessResult,
    partition: PartitionKey,
    cfg: &LayoutConfig,
    max_nodes: usize,
) -> Result<Plot, PlotError> {
    cfg.validate()?;
    if graph.is_empty() {
        return Err(PlotError::EmptyGraph);
    }
    let ranking: CentralityRanking = top_central(scores, graph, graph.node_count(), partition);
    let omitted_nodes = graph.node_count().saturating_sub(max_nodes);
    let shown;
    let graph = if omitted_nodes > 0 {
        let keep: BTreeSet<&str> = ranking
            .entries
            .iter()
            .take(max_nodes)
            .map(|e| e.author.as_str())
            .collect();
        shown = graph.induced(&keep);
        &shown
    } else {
        graph
    };
    let layout = layout(graph, scores, cfg)?;
    let png = render_png(graph, &layout, &ranking, cfg)?;
    Ok(Plot {
        png,
        layout,
        omitted_nodes,
    })
}
