//! Exact betweenness centrality via Brandes' dependency accumulation.
//!
//! One single-source shortest-path phase per vertex (BFS for unweighted
//! graphs, Dijkstra for weighted ones), followed by a pass over the vertices in
//! reverse order of distance accumulating
//! `delta[v] += sigma[v] / sigma[w] * (1 + delta[w])` over shortest-path
//! predecessors `v` of `w`. Every unordered pair is reached from both of its
//! endpoints, so the totals are halved at the end.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::index::CoauthorGraph;

/// How edge weights enter shortest paths.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeMode {
    /// Every edge has length 1.
    #[default]
    Unweighted,
    /// An edge of weight `w` has length `1 / w`: frequent co-authors are close.
    Weighted,
}

impl EdgeMode {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeMode::Unweighted => "unweighted",
            EdgeMode::Weighted => "weighted",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "unweighted" => Some(EdgeMode::Unweighted),
            "weighted" => Some(EdgeMode::Weighted),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetweennessResult {
    /// Raw betweenness per canonical author name, each unordered pair counted once.
    pub scores: BTreeMap<String, f64>,
    /// `raw / ((n-1)(n-2)/2)`, or 0 when fewer than three nodes.
    pub normalized: BTreeMap<String, f64>,
    pub node_count: usize,
    pub mode: EdgeMode,
    pub computed_at: DateTime<Utc>,
}

impl BetweennessResult {
    pub fn raw(&self, canonical: &str) -> Option<f64> {
        self.scores.get(canonical).copied()
    }

    pub fn normalized(&self, canonical: &str) -> Option<f64> {
        self.normalized.get(canonical).copied()
    }
}

/// Upper bound on raw betweenness in an `n`-node undirected graph.
pub fn max_pair_count(n: usize) -> f64 {
    if n < 3 {
        0.0
    } else {
        (n - 1) as f64 * (n - 2) as f64 / 2.0
    }
}

/// Compressed adjacency with vertices numbered in canonical-name order.
struct Csr<'g> {
    names: Vec<&'g str>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    lengths: Vec<f64>,
}

impl<'g> Csr<'g> {
    fn new(graph: &'g CoauthorGraph, mode: EdgeMode) -> Self {
        let names: Vec<&str> = graph.nodes().collect();
        let id: BTreeMap<&str, u32> = names.iter().enumerate().map(|(i, &n)| (n, i as u32)).collect();
        let mut offsets = Vec::with_capacity(names.len() + 1);
        let mut targets = Vec::new();
        let mut lengths = Vec::new();
        offsets.push(0);
        for &name in &names {
            for (nb, w) in graph.neighbors(name) {
                targets.push(id[nb]);
                lengths.push(match mode {
                    EdgeMode::Unweighted => 1.0,
                    EdgeMode::Weighted => 1.0 / f64::from(w),
                });
            }
            offsets.push(targets.len());
        }
        Csr {
            names,
            offsets,
            targets,
            lengths,
        }
    }

    fn len(&self) -> usize {
        self.names.len()
    }

    fn edges(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[v]..self.offsets[v + 1];
        self.targets[range.clone()]
            .iter()
            .zip(&self.lengths[range])
            .map(|(&t, &l)| (t as usize, l))
    }
}

/// Per-source scratch space, reused across sources.
struct Workspace {
    sigma: Vec<f64>,
    delta: Vec<f64>,
    hops: Vec<i64>,
    dist: Vec<f64>,
    order: Vec<usize>,
    preds: Vec<Vec<usize>>,
    settled: Vec<bool>,
    heap: BinaryHeap<Frontier>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Workspace {
            sigma: vec![0.0; n],
            delta: vec![0.0; n],
            hops: vec![-1; n],
            dist: vec![f64::INFINITY; n],
            order: Vec::with_capacity(n),
            preds: vec![Vec::new(); n],
            settled: vec![false; n],
            heap: BinaryHeap::new(),
        }
    }

    fn reset(&mut self) {
        for &v in &self.order {
            self.sigma[v] = 0.0;
            self.delta[v] = 0.0;
            self.hops[v] = -1;
            self.dist[v] = f64::INFINITY;
            self.preds[v].clear();
            self.settled[v] = false;
        }
        self.order.clear();
    }
}

#[derive(PartialEq)]
struct Frontier {
    dist: f64,
    vertex: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    // Min-heap on distance, then vertex id for a deterministic settle order.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Relative tolerance under which two weighted path lengths count as equal.
const LENGTH_EPS: f64 = 1e-10;

fn same_length(a: f64, b: f64) -> bool {
    (a - b).abs() <= LENGTH_EPS * a.abs().max(b.abs()).max(1.0)
}

/// Unweighted phase: BFS, then accumulation over neighbours one hop closer.
fn accumulate_bfs(g: &Csr<'_>, s: usize, ws: &mut Workspace, out: &mut [f64]) {
    ws.reset();
    ws.sigma[s] = 1.0;
    ws.hops[s] = 0;
    ws.order.push(s);
    let mut head = 0;
    while head < ws.order.len() {
        let v = ws.order[head];
        head += 1;
        let next = ws.hops[v] + 1;
        for (w, _) in g.edges(v) {
            if ws.hops[w] < 0 {
                ws.hops[w] = next;
                ws.order.push(w);
            }
            if ws.hops[w] == next {
                ws.sigma[w] += ws.sigma[v];
            }
        }
    }
    for &w in ws.order.iter().rev() {
        let coeff = (1.0 + ws.delta[w]) / ws.sigma[w];
        let prev = ws.hops[w] - 1;
        for (v, _) in g.edges(w) {
            if ws.hops[v] == prev {
                ws.delta[v] += ws.sigma[v] * coeff;
            }
        }
        if w != s {
            out[w] += ws.delta[w];
        }
    }
}

/// Weighted phase: Dijkstra with explicit predecessor lists.
fn accumulate_dijkstra(g: &Csr<'_>, s: usize, ws: &mut Workspace, out: &mut [f64]) {
    ws.reset();
    ws.heap.clear();
    ws.sigma[s] = 1.0;
    ws.dist[s] = 0.0;
    ws.heap.push(Frontier { dist: 0.0, vertex: s });
    while let Some(Frontier { dist, vertex: v }) = ws.heap.pop() {
        if ws.settled[v] || dist > ws.dist[v] {
            continue;
        }
        ws.settled[v] = true;
        ws.order.push(v);
        for (w, len) in g.edges(v) {
            if ws.settled[w] {
                continue;
            }
            let candidate = dist + len;
            if ws.dist[w].is_finite() && same_length(candidate, ws.dist[w]) {
                ws.sigma[w] += ws.sigma[v];
                ws.preds[w].push(v);
            } else if candidate < ws.dist[w] {
                ws.dist[w] = candidate;
                ws.sigma[w] = ws.sigma[v];
                ws.preds[w].clear();
                ws.preds[w].push(v);
                ws.heap.push(Frontier { dist: candidate, vertex: w });
            }
        }
    }
    for &w in ws.order.iter().rev() {
        let coeff = (1.0 + ws.delta[w]) / ws.sigma[w];
        for i in 0..ws.preds[w].len() {
            let v = ws.preds[w][i];
            ws.delta[v] += ws.sigma[v] * coeff;
        }
        if w != s {
            out[w] += ws.delta[w];
        }
    }
}

fn accumulate_sources(g: &Csr<'_>, mode: EdgeMode, sources: std::ops::Range<usize>) -> Vec<f64> {
    let mut out = vec![0.0; g.len()];
    let mut ws = Workspace::new(g.len());
    for s in sources {
        match mode {
            EdgeMode::Unweighted => accumulate_bfs(g, s, &mut ws, &mut out),
            EdgeMode::Weighted => accumulate_dijkstra(g, s, &mut ws, &mut out),
        }
    }
    out
}

fn finish(g: &Csr<'_>, mode: EdgeMode, totals: Vec<f64>) -> BetweennessResult {
    let n = g.len();
    let bound = max_pair_count(n);
    let mut scores = BTreeMap::new();
    let mut normalized = BTreeMap::new();
    for (name, total) in g.names.iter().zip(totals) {
        let raw = total / 2.0;
        scores.insert(name.to_string(), raw);
        // Accumulated rounding can land a hair above the bound.
        let share = if bound > 0.0 { (raw / bound).min(1.0) } else { 0.0 };
        normalized.insert(name.to_string(), share);
    }
    BetweennessResult {
        scores,
        normalized,
        node_count: n,
        mode,
        computed_at: Utc::now(),
    }
}

/// Sources handled per chunk. Both entry points sum per-chunk partials in
/// chunk order, so single-threaded and parallel results are bit-identical.
const SOURCE_CHUNK: usize = 64;

fn chunk(g: &Csr<'_>, mode: EdgeMode, c: usize) -> Vec<f64> {
    accumulate_sources(g, mode, c * SOURCE_CHUNK..((c + 1) * SOURCE_CHUNK).min(g.len()))
}

fn merge(n: usize, partials: impl IntoIterator<Item = Vec<f64>>) -> Vec<f64> {
    let mut totals = vec![0.0; n];
    for partial in partials {
        for (t, p) in totals.iter_mut().zip(partial) {
            *t += p;
        }
    }
    totals
}

/// Exact betweenness of every author, single-threaded.
pub fn betweenness(graph: &CoauthorGraph, mode: EdgeMode) -> BetweennessResult {
    let g = Csr::new(graph, mode);
    let n = g.len();
    let totals = merge(n, (0..n.div_ceil(SOURCE_CHUNK)).map(|c| chunk(&g, mode, c)));
    finish(&g, mode, totals)
}

/// Exact betweenness with source chunks spread over the rayon thread pool.
pub fn betweenness_parallel(graph: &CoauthorGraph, mode: EdgeMode) -> BetweennessResult {
    let g = Csr::new(graph, mode);
    let n = g.len();
    let partials: Vec<Vec<f64>> = (0..n.div_ceil(SOURCE_CHUNK))
        .into_par_iter()
        .map(|c| chunk(&g, mode, c))
        .collect();
    finish(&g, mode, merge(n, partials))
}
