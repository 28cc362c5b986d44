mod common;

use std::collections::BTreeMap;

use coauthor_net::centrality::{betweenness, betweenness_parallel, top_central, EdgeMode};
use coauthor_net::index::{CoauthorGraph, PartitionKey};
use common::{brute_force_betweenness, graph_of, node_name};
use proptest::prelude::*;

/// Random graphs on up to 7 nodes: about half are connected by construction
/// (a random spanning tree plus extra edges), the rest are arbitrary edge
/// subsets and often disconnected.
fn small_graph() -> impl Strategy<Value = (usize, Vec<(usize, usize, u32)>)> {
    (1usize..=7, any::<bool>(), any::<u64>()).prop_map(|(n, connected, seed)| {
        let mut state = seed | 1;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        let mut edges = BTreeMap::new();
        if connected {
            for v in 1..n {
                let u = (next() as usize) % v;
                edges.insert((u, v), 1 + (next() % 8) as u32);
            }
        }
        for u in 0..n {
            for v in u + 1..n {
                if next() % 3 == 0 {
                    edges.insert((u, v), 1 + (next() % 8) as u32);
                }
            }
        }
        (n, edges.into_iter().map(|((u, v), w)| (u, v, w)).collect())
    })
}

fn assert_close(graph_scores: &BTreeMap<String, f64>, oracle: &[f64]) -> Result<(), TestCaseError> {
    for (i, expected) in oracle.iter().enumerate() {
        let got = graph_scores[&node_name(i)];
        prop_assert!((got - expected).abs() < 1e-9, "node {i}: got {got}, oracle {expected}");
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn unweighted_matches_path_enumeration((n, edges) in small_graph()) {
        let g = graph_of(n, &edges);
        let r = betweenness(&g, EdgeMode::Unweighted);
        assert_close(&r.scores, &brute_force_betweenness(n, &edges, false))?;
    }

    #[test]
    fn weighted_matches_path_enumeration((n, edges) in small_graph()) {
        let g = graph_of(n, &edges);
        let r = betweenness(&g, EdgeMode::Weighted);
        assert_close(&r.scores, &brute_force_betweenness(n, &edges, true))?;
    }

    #[test]
    fn relabeling_permutes_scores((n, edges) in small_graph(), shift in 0usize..7) {
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let moved: Vec<(usize, usize, u32)> = edges.iter().map(|&(u, v, w)| (perm[u], perm[v], w)).collect();
        for mode in [EdgeMode::Unweighted, EdgeMode::Weighted] {
            let a = betweenness(&graph_of(n, &edges), mode);
            let b = betweenness(&graph_of(n, &moved), mode);
            for i in 0..n {
                let (x, y) = (a.scores[&node_name(i)], b.scores[&node_name(perm[i])]);
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn weight_scaling_keeps_weighted_ranking((n, edges) in small_graph(), factor in 2u32..5) {
        let scaled: Vec<(usize, usize, u32)> = edges.iter().map(|&(u, v, w)| (u, v, w * factor)).collect();
        let (g, h) = (graph_of(n, &edges), graph_of(n, &scaled));
        let a = top_central(&betweenness(&g, EdgeMode::Weighted), &g, n, PartitionKey::RepositoryWide);
        let b = top_central(&betweenness(&h, EdgeMode::Weighted), &h, n, PartitionKey::RepositoryWide);
        let order = |r: &coauthor_net::centrality::CentralityRanking| r.entries.iter().map(|e| e.author.clone()).collect::<Vec<_>>();
        prop_assert_eq!(order(&a), order(&b));
    }

    #[test]
    fn leaves_score_zero((n, edges) in small_graph()) {
        let g = graph_of(n, &edges);
        for mode in [EdgeMode::Unweighted, EdgeMode::Weighted] {
            let r = betweenness(&g, mode);
            for name in g.nodes() {
                if g.degree(name) == 1 {
                    prop_assert_eq!(r.scores[name], 0.0);
                }
            }
        }
    }

    #[test]
    fn repeated_runs_are_bit_identical((n, edges) in small_graph()) {
        let g = graph_of(n, &edges);
        for mode in [EdgeMode::Unweighted, EdgeMode::Weighted] {
            let a = top_central(&betweenness(&g, mode), &g, n, PartitionKey::RepositoryWide);
            let b = top_central(&betweenness(&g, mode), &g, n, PartitionKey::RepositoryWide);
            let c = top_central(&betweenness_parallel(&g, mode), &g, n, PartitionKey::RepositoryWide);
            prop_assert_eq!(&a, &b);
            let bits = |r: &coauthor_net::centrality::CentralityRanking| r.entries.iter().map(|e| (e.author.clone(), e.raw.to_bits())).collect::<Vec<_>>();
            prop_assert_eq!(bits(&a), bits(&b));
            prop_assert_eq!(a.entries.len(), c.entries.len());
        }
    }
}

#[test]
fn closed_forms() {
    let p3 = CoauthorGraph::from_edges([("a", "b", 1), ("b", "c", 1)]);
    let r = betweenness(&p3, EdgeMode::Unweighted);
    assert_eq!([r.scores["a"], r.scores["b"], r.scores["c"]], [0.0, 1.0, 0.0]);

    for k in 2..=6usize {
        let leaves: Vec<String> = (0..k).map(|i| format!("leaf{i}")).collect();
        let star = CoauthorGraph::from_edges(leaves.iter().map(|l| ("center", l.as_str(), 1)));
        let r = betweenness(&star, EdgeMode::Unweighted);
        assert_eq!(r.scores["center"], (k * (k - 1) / 2) as f64);
        assert!(leaves.iter().all(|l| r.scores[l] == 0.0));
    }

    for n in 3..=6usize {
        let names: Vec<String> = (0..n).map(node_name).collect();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((names[i].as_str(), names[j].as_str(), 1));
            }
        }
        let r = betweenness(&CoauthorGraph::from_edges(edges), EdgeMode::Unweighted);
        assert!(r.scores.values().all(|&s| s == 0.0));
    }
}

#[test]
fn ranking_contract() {
    let star = CoauthorGraph::from_edges([("hub", "x", 1), ("hub", "y", 1), ("hub", "z", 1)]);
    let r = top_central(&betweenness(&star, EdgeMode::Unweighted), &star, 1, PartitionKey::RepositoryWide);
    assert_eq!(r.entries.len(), 1);
    assert_eq!((r.entries[0].rank, r.entries[0].author.as_str()), (1, "hub"));

    let k4 = CoauthorGraph::from_edges([("d", "c", 1), ("d", "b", 1), ("d", "a", 1), ("c", "b", 1), ("c", "a", 1), ("b", "a", 1)]);
    let r = top_central(&betweenness(&k4, EdgeMode::Unweighted), &k4, 2, PartitionKey::RepositoryWide);
    let names: Vec<(usize, &str)> = r.entries.iter().map(|e| (e.rank, e.author.as_str())).collect();
    assert_eq!(names, [(1, "a"), (2, "b")]);

    let p3 = CoauthorGraph::from_edges([("a", "b", 1), ("b", "c", 1)]);
    let r = top_central(&betweenness(&p3, EdgeMode::Unweighted), &p3, 10, PartitionKey::RepositoryWide);
    assert_eq!(r.entries.len(), 3);
}
