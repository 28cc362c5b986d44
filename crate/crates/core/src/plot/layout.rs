use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::PlotError;
use crate::centrality::BetweennessResult;
use crate::index::CoauthorGraph;

pub const MIN_RADIUS: f64 = 3.0;
pub const MAX_RADIUS: f64 = 24.0;
/// Node centres stay this far from the canvas edge so circles are never cut.
pub const MARGIN: f64 = MAX_RADIUS + 4.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayoutConfig {
    pub width: u32,
    pub height: u32,
    pub iterations: u32,
    pub seed: u64,
    pub label_top_k: usize,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig {
            width: 1200,
            height: 1200,
            iterations: 300,
            seed: 42,
            label_top_k: 10,
        }
    }
}

impl LayoutConfig {
    pub fn validate(&self) -> Result<(), PlotError> {
        if self.width < 64 || self.height < 64 {
            return Err(PlotError::InvalidConfig(format!(
                "canvas {}x{} is smaller than 64x64",
                self.width, self.height
            )));
        }
        if self.iterations == 0 {
            return Err(PlotError::InvalidConfig("iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Node positions and circle radii in pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeLayout {
    pub positions: BTreeMap<String, (f64, f64)>,
    pub radii: BTreeMap<String, f64>,
}

/// Circle radius for a normalized betweenness score.
pub fn radius_for(normalized: f64) -> f64 {
    MIN_RADIUS + (MAX_RADIUS - MIN_RADIUS) * normalized.clamp(0.0, 1.0)
}

/// Fruchterman-Reingold force-directed layout.
///
/// Repulsion `k²/d` between every pair, attraction `d²/k` along edges,
/// `k = sqrt(area / n)`, displacement capped by a temperature that cools
/// linearly from `width / 10` to zero. Start positions come from a ChaCha
/// generator seeded with `cfg.seed`.
pub fn layout(
    graph: &CoauthorGraph,
    scores: &BetweennessResult,
    cfg: &LayoutConfig,
) -> Result<NodeLayout, PlotError> {
    cfg.validate()?;
    if graph.is_empty() {
        return Err(PlotError::EmptyGraph);
    }
    let names: Vec<&str> = graph.nodes().collect();
    let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let edges: Vec<(usize, usize)> = graph.edges().map(|(a, b, _)| (index[a], index[b])).collect();

    let (w, h) = (f64::from(cfg.width), f64::from(cfg.height));
    let (lo_x, hi_x) = (MARGIN.min(w / 2.0), (w - MARGIN).max(w / 2.0));
    let (lo_y, hi_y) = (MARGIN.min(h / 2.0), (h - MARGIN).max(h / 2.0));
    let n = names.len();

    let mut pos: Vec<(f64, f64)> = if n == 1 {
        vec![(w / 2.0, h / 2.0)]
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        (0..n)
            .map(|_| (rng.random_range(lo_x..=hi_x), rng.random_range(lo_y..=hi_y)))
            .collect()
    };

    if n > 1 {
        let k = (w * h / n as f64).sqrt();
        let k2 = k * k;
        let t0 = w / 10.0;
        let mut disp = vec![(0.0f64, 0.0f64); n];
        for iter in 0..cfg.iterations {
            let temperature = t0 * (1.0 - f64::from(iter) / f64::from(cfg.iterations));
            disp.iter_mut().for_each(|d| *d = (0.0, 0.0));

            for i in 0..n {
                for j in i + 1..n {
                    let (dx, dy, d) = separation(pos[i], pos[j], i, j);
                    let f = k2 / d;
                    let (fx, fy) = (dx / d * f, dy / d * f);
                    disp[i].0 += fx;
                    disp[i].1 += fy;
                    disp[j].0 -= fx;
                    disp[j].1 -= fy;
                }
            }
            for &(a, b) in &edges {
                let (dx, dy, d) = separation(pos[a], pos[b], a, b);
                let f = d * d / k;
                let (fx, fy) = (dx / d * f, dy / d * f);
                disp[a].0 -= fx;
                disp[a].1 -= fy;
                disp[b].0 += fx;
                disp[b].1 += fy;
            }
            for (p, &(dx, dy)) in pos.iter_mut().zip(&disp) {
                let len = (dx * dx + dy * dy).sqrt();
                if len > 0.0 {
                    let step = len.min(temperature);
                    p.0 += dx / len * step;
                    p.1 += dy / len * step;
                }
                p.0 = p.0.clamp(lo_x, hi_x);
                p.1 = p.1.clamp(lo_y, hi_y);
            }
        }
    }

    let mut positions = BTreeMap::new();
    let mut radii = BTreeMap::new();
    for (name, p) in names.iter().zip(pos) {
        positions.insert(name.to_string(), p);
        radii.insert(
            name.to_string(),
            radius_for(scores.normalized(name).unwrap_or(0.0)),
        );
    }
    Ok(NodeLayout { positions, radii })
}

/// Vector from `b` to `a` and its length; coincident points are pushed apart
/// along a direction derived from their indices.
fn separation(a: (f64, f64), b: (f64, f64), ia: usize, ib: usize) -> (f64, f64, f64) {
    let (dx, dy) = (a.0 - b.0, a.1 - b.1);
    let d = (dx * dx + dy * dy).sqrt();
    if d > 1e-6 {
        return (dx, dy, d);
    }
    let angle = (ia * 7919 + ib * 104_729) as f64;
    let (dx, dy) = (angle.cos() * 0.01, angle.sin() * 0.01);
    (dx, dy, 0.01)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centrality::{betweenness, EdgeMode};

    fn run(g: &CoauthorGraph, cfg: &LayoutConfig) -> NodeLayout {
        layout(g, &betweenness(g, EdgeMode::Unweighted), cfg).unwrap()
    }

    fn dist(l: &NodeLayout, a: &str, b: &str) -> f64 {
        let (p, q) = (l.positions[a], l.positions[b]);
        ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt()
    }

    #[test]
    fn deterministic_for_seed() {
        let g = CoauthorGraph::from_edges([("a", "b", 1), ("b", "c", 2), ("c", "a", 1), ("c", "d", 1)]);
        let cfg = LayoutConfig::default();
        assert_eq!(run(&g, &cfg), run(&g, &cfg));
        let other = LayoutConfig { seed: 7, ..cfg.clone() };
        assert_ne!(run(&g, &cfg).positions, run(&g, &other).positions);
    }

    #[test]
    fn single_node_centered() {
        let mut g = CoauthorGraph::new();
        g.insert_node("solo");
        let l = run(&g, &LayoutConfig::default());
        assert_eq!(l.positions["solo"], (600.0, 600.0));
        assert_eq!(l.radii["solo"], MIN_RADIUS);
    }

    #[test]
    fn components_separate() {
        let g = CoauthorGraph::from_edges([("a", "b", 1), ("c", "d", 1)]);
        for seed in [1, 7, 42, 1234] {
            let l = run(&g, &LayoutConfig { seed, ..LayoutConfig::default() });
            let intra = dist(&l, "a", "b").max(dist(&l, "c", "d"));
            let inter = ["a", "b"]
                .iter()
                .flat_map(|x| ["c", "d"].map(|y| dist(&l, x, y)))
                .fold(f64::INFINITY, f64::min);
            assert!(intra < inter, "seed {seed}: intra {intra} inter {inter}");
        }
    }

    #[test]
    fn positions_inside_canvas() {
        let names: Vec<String> = (0..40).map(|i| format!("n{i}")).collect();
        let g = CoauthorGraph::from_edges((1..40).map(|i| (names[0].as_str(), names[i].as_str(), 1)));
        let cfg = LayoutConfig { width: 200, height: 100, ..LayoutConfig::default() };
        let l = run(&g, &cfg);
        for &(x, y) in l.positions.values() {
            assert!((0.0..=200.0).contains(&x) && (0.0..=100.0).contains(&y));
        }
    }

    #[test]
    fn radius_is_affine_and_monotone() {
        assert_eq!(radius_for(0.0), 3.0);
        assert_eq!(radius_for(1.0), 24.0);
        assert_eq!(radius_for(0.5), 13.5);
        assert!(radius_for(0.3) < radius_for(0.31));
    }

    #[test]
    fn rejects_bad_config() {
        let g = CoauthorGraph::from_edges([("a", "b", 1)]);
        let r = betweenness(&g, EdgeMode::Unweighted);
        let small = LayoutConfig { width: 63, ..LayoutConfig::default() };
        assert!(matches!(layout(&g, &r, &small), Err(PlotError::InvalidConfig(_))));
        let zero = LayoutConfig { iterations: 0, ..LayoutConfig::default() };
        assert!(matches!(layout(&g, &r, &zero), Err(PlotError::InvalidConfig(_))));
        let empty = CoauthorGraph::new();
        assert!(matches!(
            layout(&empty, &betweenness(&empty, EdgeMode::Unweighted), &LayoutConfig::default()),
            Err(PlotError::EmptyGraph)
        ));
    }
}
