#![allow(dead_code)]

use rand::Rng as _;
use swnav::embedding::{step_into, Coordinates, EmbeddingState};
use swnav::seeds::Rng;
use swnav::Graph;

/// Random connected graph with a triangle on 0, 1, 2, so never bipartite.
pub fn random_connected_nonbipartite(n: usize, extra: usize, rng: &mut Rng) -> Graph {
    assert!(n >= 3);
    let mut edges = vec![(0, 1), (1, 2), (0, 2)];
    for v in 3..n {
        edges.push((rng.gen_range(0..v), v));
    }
    for _ in 0..extra {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v {
            edges.push((u.min(v), u.max(v)));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    Graph::from_edges(n, &edges).expect("simple graph")
}

/// Per-dimension degree-weighted velocity sums.
pub fn weighted_sums(g: &Graph, x: &Coordinates) -> Vec<f64> {
    let mut out = vec![0.0; x.dim()];
    for i in 0..x.len() {
        let d = g.degree(i) as f64;
        for (o, v) in out.iter_mut().zip(x.row(i)) {
            *o += d * v;
        }
    }
    out
}

/// Per-dimension `sum_i d_i |x_i|`, the scale for conservation checks.
pub fn weighted_abs_sums(g: &Graph, x: &Coordinates) -> Vec<f64> {
    let mut out = vec![0.0; x.dim()];
    for i in 0..x.len() {
        let d = g.degree(i) as f64;
        for (o, v) in out.iter_mut().zip(x.row(i)) {
            *o += d * v.abs();
        }
    }
    out
}

pub fn column_range(x: &Coordinates, k: usize) -> (f64, f64) {
    (0..x.len()).map(|i| x.get(i, k)).fold(
        (f64::INFINITY, f64::NEG_INFINITY),
        |(lo, hi), v| (lo.min(v), hi.max(v)),
    )
}

/// Largest violation seen while stepping `state` for `steps` iterations.
#[derive(Debug, Default, Clone, Copy)]
pub struct InvariantReport {
    pub conservation: f64,
    /// Outward movement of any per-dimension velocity bound, relative to
    /// the bound's magnitude.
    pub hull_growth: f64,
    pub ledger: f64,
    pub steps: usize,
}

pub fn check_invariants(g: &Graph, mut state: EmbeddingState, steps: usize) -> InvariantReport {
    let sums0 = weighted_sums(g, &state.velocities);
    let scale = weighted_abs_sums(g, &state.velocities);
    let m = state.velocities.dim();
    let mut ranges: Vec<(f64, f64)> = (0..m).map(|k| column_range(&state.velocities, k)).collect();
    let mut total = state.positions.as_slice().to_vec();
    let mut scratch = Coordinates::zeros(g.vertex_count(), m);
    let mut report = InvariantReport::default();
    for _ in 0..steps {
        step_into(g, &mut state, &mut scratch).expect("step");
        report.steps += 1;
        for (k, s) in weighted_sums(g, &state.velocities).iter().enumerate() {
            let rel = (s - sums0[k]).abs() / scale[k].max(f64::MIN_POSITIVE);
            report.conservation = report.conservation.max(rel);
        }
        for (k, r) in ranges.iter_mut().enumerate() {
            let (lo, hi) = column_range(&state.velocities, k);
            let scale = r.0.abs().max(r.1.abs()).max(f64::MIN_POSITIVE);
            let grow = (r.0 - lo).max(hi - r.1) / scale;
            report.hull_growth = report.hull_growth.max(grow);
            *r = (lo, hi);
        }
        for (t, x) in total.iter_mut().zip(state.velocities.as_slice()) {
            *t += x;
        }
        for (t, p) in total.iter().zip(state.positions.as_slice()) {
            report.ledger = report.ledger.max((t - p).abs() / t.abs().max(1.0));
        }
    }
    report
}
