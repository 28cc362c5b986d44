use std::collections::{BTreeMap, BTreeSet};

use crate::extract::{AuthorPair, CanonicalName};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct NodeEntry {
    publications: u32,
    /// Display spellings seen for this canonical name, with multiplicity.
    displays: BTreeMap<String, u32>,
}

/// Undirected co-authorship graph keyed by canonical author name.
///
/// Edge weight is the number of joint publications. Equality is structural,
/// so two graphs built from the same publications in any order compare equal.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CoauthorGraph {
    nodes: BTreeMap<String, NodeEntry>,
    adjacency: BTreeMap<String, BTreeMap<String, u32>>,
}

/// Edge changes caused by one publication.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestDelta {
    pub edges_added: usize,
    pub edges_incremented: usize,
}

impl CoauthorGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a graph directly from weighted edges; every endpoint gets a
    /// publication count of one.
    pub fn from_edges<'a>(edges: impl IntoIterator<Item = (&'a str, &'a str, u32)>) -> Self {
        let mut g = CoauthorGraph::new();
        for (a, b, w) in edges {
            g.insert_edge(a, b, w);
        }
        g
    }

    /// Adds a node with a single publication unless it already exists.
    pub fn insert_node(&mut self, canonical: &str) {
        self.nodes.entry(canonical.to_string()).or_insert_with(|| NodeEntry {
            publications: 1,
            displays: BTreeMap::from([(canonical.to_string(), 1)]),
        });
    }

    /// Sets the weight of an edge, creating endpoints as needed.
    pub fn insert_edge(&mut self, a: &str, b: &str, weight: u32) {
        assert!(a != b, "self-loop {a}");
        assert!(weight >= 1, "edge weights are positive");
        self.insert_node(a);
        self.insert_node(b);
        self.adjacency.entry(a.into()).or_default().insert(b.into(), weight);
        self.adjacency.entry(b.into()).or_default().insert(a.into(), weight);
    }

    pub(crate) fn add_publication(
        &mut self,
        authors: &[CanonicalName],
        pairs: &BTreeSet<AuthorPair>,
    ) -> IngestDelta {
        for author in authors {
            let entry = self.nodes.entry(author.canonical().to_string()).or_default();
            entry.publications += 1;
            *entry.displays.entry(author.display().to_string()).or_default() += 1;
        }
        let mut delta = IngestDelta::default();
        for AuthorPair(a, b) in pairs {
            let w = self.adjacency.entry(a.clone()).or_default().entry(b.clone()).or_default();
            *w += 1;
            if *w == 1 {
                delta.edges_added += 1;
            } else {
                delta.edges_incremented += 1;
            }
            *self.adjacency.entry(b.clone()).or_default().entry(a.clone()).or_default() += 1;
        }
        delta
    }

    pub(crate) fn remove_publication(&mut self, authors: &[CanonicalName], pairs: &BTreeSet<AuthorPair>) {
        for AuthorPair(a, b) in pairs {
            self.decrement(a, b);
            self.decrement(b, a);
        }
        for author in authors {
            let key = author.canonical();
            let Some(entry) = self.nodes.get_mut(key) else {
                continue;
            };
            entry.publications -= 1;
            if let Some(n) = entry.displays.get_mut(author.display()) {
                *n -= 1;
                if *n == 0 {
                    entry.displays.remove(author.display());
                }
            }
            if entry.publications == 0 {
                self.nodes.remove(key);
            }
        }
    }

    fn decrement(&mut self, a: &str, b: &str) {
        let Some(neighbors) = self.adjacency.get_mut(a) else {
            return;
        };
        if let Some(w) = neighbors.get_mut(b) {
            *w -= 1;
            if *w == 0 {
                neighbors.remove(b);
            }
        }
        if neighbors.is_empty() {
            self.adjacency.remove(a);
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.values().map(BTreeMap::len).sum::<usize>() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, canonical: &str) -> bool {
        self.nodes.contains_key(canonical)
    }

    /// Canonical names in ascending order.
    pub fn nodes(&self) -> impl Iterator<Item = &str> + '_ {
        self.nodes.keys().map(String::as_str)
    }

    pub fn weight(&self, a: &str, b: &str) -> Option<u32> {
        self.adjacency.get(a)?.get(b).copied()
    }

    pub fn neighbors(&self, canonical: &str) -> impl Iterator<Item = (&str, u32)> + '_ {
        self.adjacency
            .get(canonical)
            .into_iter()
            .flat_map(|m| m.iter().map(|(k, &w)| (k.as_str(), w)))
    }

    pub fn degree(&self, canonical: &str) -> usize {
        self.adjacency.get(canonical).map_or(0, BTreeMap::len)
    }

    /// Each undirected edge once, as `(a, b, weight)` with `a < b`.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, u32)> + '_ {
        self.adjacency.iter().flat_map(|(a, m)| {
            m.iter()
                .filter(move |(b, _)| a < *b)
                .map(move |(b, &w)| (a.as_str(), b.as_str(), w))
        })
    }

    pub fn publication_count(&self, canonical: &str) -> u32 {
        self.nodes.get(canonical).map_or(0, |e| e.publications)
    }

    /// Preferred display form: the lexicographically smallest spelling seen.
    pub fn display_name<'a>(&'a self, canonical: &'a str) -> &'a str {
        self.nodes
            .get(canonical)
            .and_then(|e| e.displays.keys().next())
            .map_or(canonical, String::as_str)
    }

    /// The subgraph induced by `keep`.
    pub fn induced(&self, keep: &BTreeSet<&str>) -> CoauthorGraph {
        let nodes = self
            .nodes
            .iter()
            .filter(|(k, _)| keep.contains(k.as_str()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        let adjacency = self
            .adjacency
            .iter()
            .filter(|(k, _)| keep.contains(k.as_str()))
            .map(|(k, m)| {
                let m: BTreeMap<_, _> = m
                    .iter()
                    .filter(|(b, _)| keep.contains(b.as_str()))
                    .map(|(b, &w)| (b.clone(), w))
                    .collect();
                (k.clone(), m)
            })
            .filter(|(_, m)| !m.is_empty())
            .collect();
        CoauthorGraph { nodes, adjacency }
    }

    /// Checks symmetry, absence of self-loops, endpoint membership and
    /// positive weights.
    pub fn check_invariants(&self) -> Result<(), String> {
        for (a, m) in &self.adjacency {
            if !self.nodes.contains_key(a) {
                return Err(format!("edge endpoint {a} is not a node"));
            }
            if m.is_empty() {
                return Err(format!("empty adjacency entry for {a}"));
            }
            for (b, &w) in m {
                if a == b {
                    return Err(format!("self-loop on {a}"));
                }
                if w == 0 {
                    return Err(format!("zero weight on {a}-{b}"));
                }
                if self.weight(b, a) != Some(w) {
                    return Err(format!("asymmetric edge {a}-{b}"));
                }
            }
        }
        for (k, e) in &self.nodes {
            if e.publications == 0 {
                return Err(format!("node {k} has no publications"));
            }
        }
        Ok(())
    }
}
