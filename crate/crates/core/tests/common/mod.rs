//! Independent oracles and fixture helpers shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::time::Duration;

use coauthor_net::extract::Publication;
use coauthor_net::index::CoauthorGraph;
use coauthor_net::oai::{Harvester, RetryPolicy};
use oai_mock::Manifest;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn manifest(name: &str) -> Manifest {
    Manifest::from_path(fixture_path(name)).expect("fixture manifest")
}

/// A harvester whose backoff is short enough for tests; `Retry-After` from
/// the server still applies.
pub fn quick_harvester() -> Harvester {
    Harvester::with_retry_policy(RetryPolicy {
        initial_backoff: Duration::from_millis(20),
        max_backoff: Duration::from_millis(200),
    })
}

/// Common multiple of the edge weights 1..=8, so weighted path lengths
/// `sum(1/w)` become exact integers.
pub const LENGTH_SCALE: u64 = 840;

/// Betweenness by enumerating every simple path between every unordered
/// pair of nodes, keeping the shortest ones (exact integer lengths) and
/// crediting interior nodes with their share of them.
///
/// `edges` are `(u, v, weight)` over nodes `0..n`, weights in `1..=8`.
pub fn brute_force_betweenness(n: usize, edges: &[(usize, usize, u32)], weighted: bool) -> Vec<f64> {
    let mut adj = vec![vec![None::<u64>; n]; n];
    for &(u, v, w) in edges {
        assert!((1..=8).contains(&w));
        let len = if weighted { LENGTH_SCALE / u64::from(w) } else { 1 };
        adj[u][v] = Some(len);
        adj[v][u] = Some(len);
    }
    let mut scores = vec![0.0; n];
    for s in 0..n {
        for t in s + 1..n {
            let mut paths: Vec<(u64, Vec<usize>)> = Vec::new();
            let mut visited = vec![false; n];
            let mut path = vec![s];
            visited[s] = true;
            enumerate(&adj, t, 0, &mut path, &mut visited, &mut paths);
            let Some(best) = paths.iter().map(|(l, _)| *l).min() else {
                continue;
            };
            let shortest: Vec<&Vec<usize>> = paths.iter().filter(|(l, _)| *l == best).map(|(_, p)| p).collect();
            let sigma = shortest.len() as f64;
            for v in 0..n {
                if v == s || v == t {
                    continue;
                }
                let through = shortest.iter().filter(|p| p[1..p.len() - 1].contains(&v)).count();
                scores[v] += through as f64 / sigma;
            }
        }
    }
    scores
}

fn enumerate(
    adj: &[Vec<Option<u64>>],
    target: usize,
    length: u64,
    path: &mut Vec<usize>,
    visited: &mut [bool],
    out: &mut Vec<(u64, Vec<usize>)>,
) {
    let here = *path.last().unwrap();
    if here == target {
        out.push((length, path.clone()));
        return;
    }
    for next in 0..adj.len() {
        if let (Some(len), false) = (adj[here][next], visited[next]) {
            visited[next] = true;
            path.push(next);
            enumerate(adj, target, length + len, path, visited, out);
            path.pop();
            visited[next] = false;
        }
    }
}

pub fn node_name(i: usize) -> String {
    format!("v{i}")
}

pub fn graph_of(n: usize, edges: &[(usize, usize, u32)]) -> CoauthorGraph {
    let names: Vec<String> = (0..n).map(node_name).collect();
    let mut g = CoauthorGraph::from_edges(edges.iter().map(|&(u, v, w)| (names[u].as_str(), names[v].as_str(), w)));
    for name in &names {
        g.insert_node(name);
    }
    g
}

/// Ranking oracle: raw descending, canonical name ascending on ties
/// (scores closer than `1e-9` tie).
pub fn rank(scores: &BTreeMap<String, f64>, k: usize) -> Vec<(String, f64)> {
    let mut v: Vec<(String, f64)> = scores.iter().map(|(a, s)| (a.clone(), *s)).collect();
    v.sort_by(|(a, x), (b, y)| {
        if (x - y).abs() < 1e-9 {
            a.cmp(b)
        } else {
            y.partial_cmp(x).unwrap()
        }
    });
    v.truncate(k);
    v
}

/// Which partition a publication belongs to, decided from the code strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Slice {
    All,
    Main(char),
    Exact(String),
}

impl Slice {
    pub fn admits(&self, p: &Publication) -> bool {
        match self {
            Slice::All => true,
            Slice::Main(d) => p.ddc_classes.iter().any(|c| c.as_str().starts_with(*d)),
            Slice::Exact(code) => p.ddc_classes.iter().any(|c| c.as_str() == code),
        }
    }
}

/// Plain-data view of a co-author graph for structural comparison.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GraphModel {
    /// Canonical name to (publication count, alphabetically first display).
    pub nodes: BTreeMap<String, (u32, String)>,
    pub edges: BTreeMap<(String, String), u32>,
}

impl GraphModel {
    /// Rebuilds the graph of a slice from scratch. Only the first `cap`
    /// authors of a publication pair up.
    pub fn rebuild<'a>(publications: impl IntoIterator<Item = &'a Publication>, slice: &Slice, cap: usize) -> Self {
        let mut displays: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let mut model = GraphModel::default();
        for p in publications.into_iter().filter(|p| slice.admits(p)) {
            for a in &p.authors {
                model.nodes.entry(a.canonical().to_string()).or_insert((0, String::new())).0 += 1;
                displays.entry(a.canonical().to_string()).or_default().insert(a.display().to_string());
            }
            let paired = &p.authors[..p.authors.len().min(cap)];
            for i in 0..paired.len() {
                for j in 0..paired.len() {
                    let (a, b) = (paired[i].canonical(), paired[j].canonical());
                    if a < b {
                        *model.edges.entry((a.to_string(), b.to_string())).or_default() += 1;
                    }
                }
            }
        }
        for (name, entry) in model.nodes.iter_mut() {
            entry.1 = displays[name].iter().next().unwrap().clone();
        }
        model
    }

    pub fn observe(g: &CoauthorGraph) -> Self {
        GraphModel {
            nodes: g
                .nodes()
                .map(|n| (n.to_string(), (g.publication_count(n), g.display_name(n).to_string())))
                .collect(),
            edges: g.edges().map(|(a, b, w)| ((a.to_string(), b.to_string()), w)).collect(),
        }
    }

    /// `(n, edges)` in node-index form, nodes in name order.
    pub fn indexed(&self) -> (Vec<String>, Vec<(usize, usize, u32)>) {
        let names: Vec<String> = self.nodes.keys().cloned().collect();
        let pos: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let edges = self.edges.iter().map(|((a, b), w)| (pos[a.as_str()], pos[b.as_str()], *w)).collect();
        (names, edges)
    }
}

/// The end-to-end oracle: ranking of a manifest slice computed straight from
/// the manifest. Creators in the fixture are written `"Last, First"`, so the
/// canonical key is the lowercase string; the DDC code comes from `ddc:NNN`
/// set specs or `ddc:NNN` / `NNN` subjects.
pub fn manifest_ranking(manifest: &Manifest, slice: &Slice, k: usize) -> Vec<(String, f64, u32)> {
    let mut display: BTreeMap<String, String> = BTreeMap::new();
    let mut pubs: BTreeMap<String, u32> = BTreeMap::new();
    let mut edges: BTreeMap<(String, String), u32> = BTreeMap::new();
    for r in manifest.records.iter().filter(|r| !r.deleted) {
        let codes: BTreeSet<String> = r
            .sets
            .iter()
            .chain(&r.subjects)
            .filter_map(|s| {
                let s = s.trim();
                let code = s.strip_prefix("ddc:").or_else(|| s.strip_prefix("DDC: ")).unwrap_or(s);
                (code.len() == 3 && code.bytes().all(|b| b.is_ascii_digit())).then(|| code.to_string())
            })
            .collect();
        let admitted = match slice {
            Slice::All => true,
            Slice::Main(d) => codes.iter().any(|c| c.starts_with(*d)),
            Slice::Exact(code) => codes.contains(code),
        };
        if !admitted {
            continue;
        }
        let authors: BTreeSet<String> = r.creators.iter().map(|c| c.to_lowercase()).collect();
        for c in &r.creators {
            display.entry(c.to_lowercase()).or_insert_with(|| c.clone());
        }
        for a in &authors {
            *pubs.entry(a.clone()).or_default() += 1;
            for b in &authors {
                if a < b {
                    *edges.entry((a.clone(), b.clone())).or_default() += 1;
                }
            }
        }
    }
    let names: Vec<String> = pubs.keys().cloned().collect();
    let pos: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let indexed: Vec<(usize, usize, u32)> = edges.iter().map(|((a, b), w)| (pos[a.as_str()], pos[b.as_str()], *w)).collect();
    let scores = brute_force_betweenness(names.len(), &indexed, false);
    let by_name: BTreeMap<String, f64> = names.iter().cloned().zip(scores).collect();
    rank(&by_name, k)
        .into_iter()
        .map(|(name, s)| (display[&name].clone(), s, pubs[&name]))
        .collect()
}
