//! Closed-form limit of the embedding dynamics from the eigendecomposition
//! of the normal matrix `N = K^-1 A` (row-normalized adjacency).
//!
//! Velocities evolve as `X_t = N^t X_0` and positions as
//! `P_t = sum_{s<=t} X_s`. Writing `X_0 = V A` in the right eigenbasis of
//! `N`, every mode with `lambda < 1` accumulates to `a / (1 - lambda)`. The
//! `lambda = 1` mode is constant across vertices: it translates all
//! positions together, cancels in every pairwise distance, and is left out.
//!
//! Desk-scale only; this exists to check the iterative embedding.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng as _;
use serde::Serialize;

use crate::embedding::Coordinates;
use crate::error::{Error, Result};
use crate::graph::{connected_components, Graph};
use crate::seeds::Rng;

/// Largest graph the oracle accepts.
pub const MAX_ORACLE_VERTICES: usize = 200;

/// Eigenvalues within this of -1 or 1 count as exactly -1 or 1.
pub const UNIT_EIGENVALUE_TOL: f64 = 1e-8;

/// Maximum relative reconstruction error `|V A - X0| / |X0|` tolerated when
/// expanding initial conditions in the eigenbasis.
pub const RECONSTRUCTION_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// Eigenvalues of `N`, ascending. The last one is 1.
    pub eigenvalues: Vec<f64>,
    /// Right eigenvectors of `N` as columns, K-normalized: `v' K v = 1`.
    pub right_eigenvectors: DMatrix<f64>,
    /// Orthonormal eigenvectors `u` of `S = K^-1/2 A K^-1/2`; `v = K^-1/2 u`.
    pub symmetric_eigenvectors: DMatrix<f64>,
    pub degrees: Vec<f64>,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn is_bipartite(&self) -> bool {
        (self.eigenvalues[0] + 1.0).abs() < UNIT_EIGENVALUE_TOL
    }

    /// Second-largest eigenvalue.
    pub fn second_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.len() - 2]
    }

    /// Dense normal matrix `K^-1 A`.
    pub fn normal_matrix(g: &Graph) -> DMatrix<f64> {
        let n = g.vertex_count();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            let w = 1.0 / g.degree(i) as f64;
            for &j in g.neighbors(i) {
                m[(i, j)] = w;
            }
        }
        m
    }

    /// Expansion coefficients `A` with `V A = X0`, one column per dimension.
    pub fn coefficients(&self, x0: &Coordinates) -> Result<DMatrix<f64>> {
        let n = self.len();
        if x0.len() != n {
            return Err(Error::param(format!(
                "initial conditions have {} rows, graph has {n} vertices",
                x0.len()
            )));
        }
        let x = DMatrix::from_row_slice(n, x0.dim(), x0.as_slice());
        // V^-1 = U' K^1/2
        let mut scaled = x.clone();
        for i in 0..n {
            let s = self.degrees[i].sqrt();
            scaled.row_mut(i).scale_mut(s);
        }
        let a = self.symmetric_eigenvectors.transpose() * scaled;
        let recon = &self.right_eigenvectors * &a;
        let norm = x.norm();
        let err = (recon - &x).norm() / if norm > 0.0 { norm } else { 1.0 };
        if err > RECONSTRUCTION_TOL {
            return Err(Error::IllConditioned(err));
        }
        Ok(a)
    }

    fn check_convergent(&self) -> Result<()> {
        if self.is_bipartite() {
            return Err(Error::Bipartite);
        }
        Ok(())
    }

    /// Weight `1 / (1 - lambda)` per mode, 0 for the translation mode.
    fn accumulation_weights(&self) -> Vec<f64> {
        let n = self.len();
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &l)| if k == n - 1 { 0.0 } else { 1.0 / (1.0 - l) })
            .collect()
    }
}

/// Eigendecomposition of the normal matrix of a connected graph, computed
/// through the symmetric matrix `K^-1/2 A K^-1/2` it is similar to.
pub fn decompose(g: &Graph) -> Result<SpectralDecomposition> {
    let n = g.vertex_count();
    if n < 2 {
        return Err(Error::param("spectral oracle needs at least 2 vertices"));
    }
    if n > MAX_ORACLE_VERTICES {
        return Err(Error::param(format!(
            "spectral oracle is limited to {MAX_ORACLE_VERTICES} vertices, got {n}"
        )));
    }
    if let Some(v) = (0..n).find(|&v| g.degree(v) == 0) {
        return Err(Error::IsolatedVertex(v));
    }
    let components = connected_components(g).len();
    if components > 1 {
        return Err(Error::Disconnected { components });
    }
    let degrees: Vec<f64> = (0..n).map(|v| g.degree(v) as f64).collect();
    let inv_sqrt: Vec<f64> = degrees.iter().map(|d| 1.0 / d.sqrt()).collect();
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        for &j in g.neighbors(i) {
            s[(i, j)] = inv_sqrt[i] * inv_sqrt[j];
        }
    }
    let eig = SymmetricEigen::new(s);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut eigenvalues = Vec::with_capacity(n);
    let mut u = DMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        eigenvalues.push(eig.eigenvalues[k].clamp(-1.0, 1.0));
        u.set_column(col, &eig.eigenvectors.column(k));
    }
    // fix the sign of the top vector so the translation mode is positive
    if u.column(n - 1).sum() < 0.0 {
        u.column_mut(n - 1).neg_mut();
    }
    let mut v = u.clone();
    for i in 0..n {
        v.row_mut(i).scale_mut(inv_sqrt[i]);
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        right_eigenvectors: v,
        symmetric_eigenvectors: u,
        degrees,
    })
}

/// Limit positions `sum_{lambda<1} v a / (1 - lambda)`, defined up to a
/// common translation.
pub fn closed_form_positions(dec: &SpectralDecomposition, x0: &Coordinates) -> Result<Coordinates> {
    dec.check_convergent()?;
    let a = dec.coefficients(x0)?;
    let mut weighted = a;
    for (k, w) in dec.accumulation_weights().into_iter().enumerate() {
        weighted.row_mut(k).scale_mut(w);
    }
    let p = &dec.right_eigenvectors * weighted;
    let n = dec.len();
    let m = x0.dim();
    let mut data = Vec::with_capacity(n * m);
    for i in 0..n {
        data.extend(p.row(i).iter());
    }
    Coordinates::from_rows(m, data)
}

/// Squared limit distance between `i` and `j` from the mode expansion:
/// `sum_l (sum_k a_kl (v_ik - v_jk) / (1 - lambda_k))^2`.
pub fn exact_distance(
    dec: &SpectralDecomposition,
    a: &DMatrix<f64>,
    i: usize,
    j: usize,
) -> Result<f64> {
    dec.check_convergent()?;
    if i == j {
        return Ok(0.0);
    }
    let v = &dec.right_eigenvectors;
    let w = dec.accumulation_weights();
    let mut total = 0.0;
    for l in 0..a.ncols() {
        let mut s = 0.0;
        for k in 0..dec.len() {
            s += a[(k, l)] * w[k] * (v[(i, k)] - v[(j, k)]);
        }
        total += s * s;
    }
    Ok(total)
}

/// Large-dimension approximation of the squared limit distance,
/// `sum_k m <x^2> (v_ik - v_jk)^2 / (1 - lambda_k)^2`, with each right
/// eigenvector scaled to unit Euclidean length. Exact in expectation when
/// the eigenvectors are orthogonal (regular graphs).
pub fn expected_distance(
    dec: &SpectralDecomposition,
    dim: usize,
    x_variance: f64,
    i: usize,
    j: usize,
) -> Result<f64> {
    dec.check_convergent()?;
    if i == j {
        return Ok(0.0);
    }
    let v = &dec.right_eigenvectors;
    let w = dec.accumulation_weights();
    let mut total = 0.0;
    for k in 0..dec.len() {
        let col = v.column(k);
        let norm = col.norm();
        let diff = (col[i] - col[j]) / norm;
        total += w[k] * w[k] * diff * diff;
    }
    Ok(dim as f64 * x_variance * total)
}

/// Variance of the uniform distribution on `[-h, h]`.
pub fn uniform_variance(half_width: f64) -> f64 {
    half_width * half_width / 3.0
}

/// Exact expectation of the squared limit distance over i.i.d. initial
/// velocities with variance `x_variance`, for any eigenbasis.
pub fn mean_distance(
    dec: &SpectralDecomposition,
    dim: usize,
    x_variance: f64,
    i: usize,
    j: usize,
) -> Result<f64> {
    dec.check_convergent()?;
    let n = dec.len();
    let v = &dec.right_eigenvectors;
    let u = &dec.symmetric_eigenvectors;
    let w = dec.accumulation_weights();
    // P_i - P_j = sum_s c_s x_s with c_s = sqrt(d_s) sum_k (v_ik - v_jk) w_k u_sk
    let coef = DVector::from_iterator(n, (0..n).map(|k| (v[(i, k)] - v[(j, k)]) * w[k]));
    let c = u * coef;
    let total: f64 = (0..n).map(|s| dec.degrees[s] * c[s] * c[s]).sum();
    Ok(dim as f64 * x_variance * total)
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    /// Largest `|v'Lv - (1 - lambda) v'Kv| / v'Kv` over all eigenpairs.
    pub max_eigen_residual: f64,
    /// `1 - lambda_{n-1}`, the smallest nontrivial energy.
    pub energy_bound: f64,
    /// Smallest energy among random K-normalized probes K-orthogonal to the
    /// constant vector.
    pub min_probe_energy: f64,
    pub probes: usize,
}

impl EnergyReport {
    pub fn holds(&self, residual_tol: f64, bound_slack: f64) -> bool {
        self.max_eigen_residual <= residual_tol
            && self.min_probe_energy >= self.energy_bound - bound_slack
    }
}

/// Checks `v' L v = (1 - lambda) v' K v` for every eigenpair, with
/// `L = K - A`, and that no admissible probe beats the second eigenvector's
/// energy.
pub fn energy_relation_check(
    dec: &SpectralDecomposition,
    g: &Graph,
    probes: usize,
    rng: &mut Rng,
) -> EnergyReport {
    let n = dec.len();
    let laplacian_form = |x: &[f64]| -> f64 {
        let mut e = 0.0;
        for (u, v) in g.edges() {
            let d = x[u] - x[v];
            e += d * d;
        }
        e
    };
    let k_form = |x: &[f64]| -> f64 { x.iter().zip(&dec.degrees).map(|(a, d)| d * a * a).sum() };

    let mut max_residual: f64 = 0.0;
    for (k, &lambda) in dec.eigenvalues.iter().enumerate() {
        let v: Vec<f64> = dec.right_eigenvectors.column(k).iter().copied().collect();
        let kv = k_form(&v);
        let residual = (laplacian_form(&v) - (1.0 - lambda) * kv).abs() / kv;
        max_residual = max_residual.max(residual);
    }

    let total_degree: f64 = dec.degrees.iter().sum();
    let mut min_probe = f64::INFINITY;
    for _ in 0..probes {
        let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let shift = x.iter().zip(&dec.degrees).map(|(a, d)| a * d).sum::<f64>() / total_degree;
        for a in &mut x {
            *a -= shift;
        }
        let norm = k_form(&x).sqrt();
        for a in &mut x {
            *a /= norm;
        }
        min_probe = min_probe.min(laplacian_form(&x));
    }
    EnergyReport {
        max_eigen_residual: max_residual,
        energy_bound: 1.0 - dec.second_eigenvalue(),
        min_probe_energy: min_probe,
        probes,
    }
}

/// Largest `|a_ij - b_ij| / b_ij` over off-diagonal entries of two
/// distance matrices, with `b` the reference.
pub fn max_relative_discrepancy(a: &[f64], b: &[f64], n: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let r = b[i * n + j];
                worst = worst.max((a[i * n + j] - r).abs() / r);
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{embed_from, state_from_velocities, EmbeddingConfig};
    use crate::seeds::RngStream;

    fn complete(n: usize) -> Graph {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Graph::from_edges(n, &edges).unwrap()
    }

    fn cycle(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    fn assert_spectrum(g: &Graph, expected: &[f64]) {
        let dec = decompose(g).unwrap();
        assert_eq!(dec.len(), expected.len());
        for (a, b) in dec.eigenvalues.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{:?} vs {expected:?}", dec.eigenvalues);
        }
    }

    fn random_x0(n: usize, m: usize, seed: u64) -> Coordinates {
        let mut rng = RngStream::new(seed).rng();
        Coordinates::from_rows(m, (0..n * m).map(|_| rng.gen_range(-0.5..0.5)).collect()).unwrap()
    }

    #[test]
    fn known_spectra() {
        assert_spectrum(&complete(2), &[-1.0, 1.0]);
        assert_spectrum(&complete(3), &[-0.5, -0.5, 1.0]);
        assert_spectrum(&cycle(4), &[-1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn eigenpairs_satisfy_the_normal_matrix() {
        // triangle with a tail: irregular, non-bipartite
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4)]).unwrap();
        let dec = decompose(&g).unwrap();
        let nm = SpectralDecomposition::normal_matrix(&g);
        for k in 0..5 {
            let v = dec.right_eigenvectors.column(k);
            let r = &nm * v - v * dec.eigenvalues[k];
            assert!(r.norm() < 1e-8);
        }
        assert!((dec.eigenvalues[4] - 1.0).abs() < 1e-12);
        let top = dec.right_eigenvectors.column(4);
        assert!(top.iter().all(|&x| (x - top[0]).abs() < 1e-12 && x > 0.0));
        assert!(!dec.is_bipartite());
    }

    #[test]
    fn rejects_disconnected_and_oversized() {
        let g = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(matches!(decompose(&g), Err(Error::Disconnected { components: 2 })));
        assert!(decompose(&cycle(MAX_ORACLE_VERTICES + 1)).is_err());
    }

    #[test]
    fn bipartite_graphs_are_refused() {
        let dec = decompose(&cycle(6)).unwrap();
        assert!(dec.is_bipartite());
        let x0 = random_x0(6, 2, 1);
        assert!(matches!(closed_form_positions(&dec, &x0), Err(Error::Bipartite)));
    }

    #[test]
    fn synchronized_start_has_no_spread() {
        let g = complete(5);
        let dec = decompose(&g).unwrap();
        let x0 = Coordinates::from_rows(2, [0.3, -0.2].repeat(5)).unwrap();
        let p = closed_form_positions(&dec, &x0).unwrap();
        assert!(p.as_slice().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn k3_limit_is_two_thirds_of_the_deviation() {
        let g = complete(3);
        let dec = decompose(&g).unwrap();
        let x0 = random_x0(3, 4, 5);
        let p = closed_form_positions(&dec, &x0).unwrap();
        for k in 0..4 {
            let mean = (0..3).map(|i| x0.get(i, k)).sum::<f64>() / 3.0;
            for i in 0..3 {
                let expected = 2.0 / 3.0 * (x0.get(i, k) - mean);
                assert!((p.get(i, k) - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exact_distance_matches_positions() {
        let g = Graph::from_edges(
            7,
            &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 6), (6, 3), (1, 5)],
        )
        .unwrap();
        let dec = decompose(&g).unwrap();
        let x0 = random_x0(7, 3, 9);
        let a = dec.coefficients(&x0).unwrap();
        let p = closed_form_positions(&dec, &x0).unwrap();
        for i in 0..7 {
            assert_eq!(exact_distance(&dec, &a, i, i).unwrap(), 0.0);
            for j in 0..7 {
                let d = exact_distance(&dec, &a, i, j).unwrap();
                assert!((d - p.squared_distance(i, j)).abs() < 1e-10);
                assert!((d - exact_distance(&dec, &a, j, i).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn k3_symmetric_start_gives_equal_distances() {
        let g = complete(3);
        let dec = decompose(&g).unwrap();
        // equilateral configuration in the plane
        let s = 3f64.sqrt() / 2.0;
        let x0 = Coordinates::from_rows(2, vec![1.0, 0.0, -0.5, s, -0.5, -s]).unwrap();
        let a = dec.coefficients(&x0).unwrap();
        let d01 = exact_distance(&dec, &a, 0, 1).unwrap();
        let d12 = exact_distance(&dec, &a, 1, 2).unwrap();
        let d02 = exact_distance(&dec, &a, 0, 2).unwrap();
        assert!((d01 - d12).abs() < 1e-12 && (d01 - d02).abs() < 1e-12);
    }

    #[test]
    fn uniform_moment() {
        assert!((uniform_variance(0.5) - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_matches_long_iteration() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3)]).unwrap();
        let dec = decompose(&g).unwrap();
        let x0 = random_x0(6, 3, 2);
        let cfg = EmbeddingConfig {
            dim: 3,
            sync_tolerance: 1e-24,
            max_iters: 20_000,
            ..Default::default()
        };
        let out = embed_from(&g, state_from_velocities(x0.clone()), &cfg).unwrap();
        let p = closed_form_positions(&dec, &x0).unwrap();
        let rel = max_relative_discrepancy(
            &out.positions.distance_matrix(),
            &p.distance_matrix(),
            6,
        );
        assert!(rel < 1e-9, "rel = {rel}");
    }

    #[test]
    fn mean_distance_matches_monte_carlo() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3)]).unwrap();
        let dec = decompose(&g).unwrap();
        let dim = 20;
        let draws = 4000;
        let mut sum = 0.0;
        for d in 0..draws {
            let x0 = random_x0(6, dim, 100 + d);
            let a = dec.coefficients(&x0).unwrap();
            sum += exact_distance(&dec, &a, 0, 4).unwrap();
        }
        let mc = sum / draws as f64;
        let exact = mean_distance(&dec, dim, 1.0 / 12.0, 0, 4).unwrap();
        // 80 000 chi-square-like terms: relative sd ~ sqrt(2/80000) = 0.5%
        assert!((mc - exact).abs() / exact < 0.03, "mc {mc} exact {exact}");
    }

    #[test]
    fn expected_distance_is_exact_on_regular_graphs() {
        // circulant 4-regular graph on 9 vertices: orthogonal eigenvectors
        let mut edges = Vec::new();
        for i in 0..9 {
            edges.push((i, (i + 1) % 9));
            edges.push((i, (i + 2) % 9));
        }
        let g = Graph::from_edges(9, &edges).unwrap();
        let dec = decompose(&g).unwrap();
        for (i, j) in [(0, 1), (0, 4), (2, 7)] {
            let approx = expected_distance(&dec, 20, 1.0 / 12.0, i, j).unwrap();
            let exact = mean_distance(&dec, 20, 1.0 / 12.0, i, j).unwrap();
            assert!((approx - exact).abs() < 1e-10 * exact);
        }
        assert_eq!(expected_distance(&dec, 20, 1.0 / 12.0, 3, 3).unwrap(), 0.0);
    }

    #[test]
    fn energy_relation_small_graphs() {
        let g = complete(3);
        let dec = decompose(&g).unwrap();
        // K-normalized lambda = -1/2 eigenvector has v'Lv = 3/2
        let v: Vec<f64> = dec.right_eigenvectors.column(0).iter().copied().collect();
        let kv: f64 = v.iter().map(|x| 2.0 * x * x).sum();
        assert!((kv - 1.0).abs() < 1e-12);
        let lv: f64 = g.edges().map(|(a, b)| (v[a] - v[b]).powi(2)).sum();
        assert!((lv - 1.5).abs() < 1e-12);

        let mut rng = RngStream::new(3).rng();
        let report = energy_relation_check(&dec, &g, 100, &mut rng);
        assert!(report.max_eigen_residual < 1e-10);
        assert!(report.holds(1e-10, 1e-9));

        // constant vector sits in the Laplacian kernel
        let top: Vec<f64> = dec.right_eigenvectors.column(2).iter().copied().collect();
        let e: f64 = g.edges().map(|(a, b)| (top[a] - top[b]).powi(2)).sum();
        assert!(e.abs() < 1e-24);
    }
}
