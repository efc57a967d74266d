//! Self-organized embedding of a graph into an m-dimensional Euclidean space.
//!
//! Every vertex carries a velocity and a position vector. Each step, a
//! vertex's velocity becomes the average of its neighbors' previous
//! velocities, and its position accumulates the new velocity. Tightly
//! connected vertices synchronize first and end up close together, so
//! distances in the accumulated positions track path lengths in the graph.
//! Iteration stops once the per-dimension variance of the velocities drops
//! below a tolerance.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::graph::{largest_component, Graph};
use crate::seeds::RngStream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingConfig {
    /// Dimension of the metric space.
    pub dim: usize,
    /// Initial velocities are uniform on `[-init_half_width, init_half_width]`.
    pub init_half_width: f64,
    /// Stop once every per-dimension synchronization error is below this.
    pub sync_tolerance: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            dim: 20,
            init_half_width: 0.5,
            sync_tolerance: 1e-4,
            max_iters: 100_000,
            seed: crate::seeds::DEFAULT_SEED,
        }
    }
}

impl EmbeddingConfig {
    pub fn with_dim(dim: usize, seed: u64) -> Self {
        EmbeddingConfig {
            dim,
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 1 {
            return Err(Error::param("dimension must be >= 1"));
        }
        if !(self.init_half_width > 0.0) {
            return Err(Error::param("init_half_width must be > 0"));
        }
        if !(self.sync_tolerance > 0.0) {
            return Err(Error::param("sync tolerance must be > 0"));
        }
        if self.max_iters < 1 {
            return Err(Error::param("max_iters must be >= 1"));
        }
        Ok(())
    }
}

/// Row-major `n x dim` matrix of vertex coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Coordinates {
    dim: usize,
    data: Vec<f64>,
}

impl Coordinates {
    pub fn zeros(n: usize, dim: usize) -> Self {
        Coordinates {
            dim,
            data: vec![0.0; n * dim],
        }
    }

    pub fn from_rows(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::param(format!(
                "{} values do not form rows of dimension {dim}",
                data.len()
            )));
        }
        Ok(Coordinates { dim, data })
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.data[i * self.dim + k]
    }

    #[inline]
    pub fn squared_distance(&self, i: usize, j: usize) -> f64 {
        squared_distance(self.row(i), self.row(j))
    }

    /// Pairwise Euclidean distances, row-major `n x n`.
    pub fn distance_matrix(&self) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = self.squared_distance(i, j).sqrt();
                out[i * n + j] = d;
                out[j * n + i] = d;
            }
        }
        out
    }
}

#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Velocities, positions and synchronization errors at step `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingState {
    pub velocities: Coordinates,
    pub positions: Coordinates,
    pub t: usize,
    pub sync_errors: Vec<f64>,
}

impl EmbeddingState {
    pub fn max_sync_error(&self) -> f64 {
        self.sync_errors.iter().copied().fold(0.0, f64::max)
    }
}

/// Random initial velocities; positions start equal to them.
pub fn init_state(g: &Graph, cfg: &EmbeddingConfig) -> Result<EmbeddingState> {
    cfg.validate()?;
    let n = g.vertex_count();
    let mut rng = RngStream::new(cfg.seed).derive("embed-init", 0).rng();
    let h = cfg.init_half_width;
    let data: Vec<f64> = (0..n * cfg.dim).map(|_| rng.gen_range(-h..=h)).collect();
    let velocities = Coordinates::from_rows(cfg.dim, data)?;
    Ok(state_from_velocities(velocities))
}

/// State at `t = 0` from explicit initial velocities.
pub fn state_from_velocities(velocities: Coordinates) -> EmbeddingState {
    let sync_errors = sync_error(&velocities);
    EmbeddingState {
        positions: velocities.clone(),
        velocities,
        t: 0,
        sync_errors,
    }
}

/// Per-dimension population variance of the velocities.
pub fn sync_error(x: &Coordinates) -> Vec<f64> {
    let n = x.len();
    let m = x.dim();
    if n == 0 {
        return vec![0.0; m];
    }
    let mut mean = vec![0.0; m];
    for i in 0..n {
        for (acc, v) in mean.iter_mut().zip(x.row(i)) {
            *acc += v;
        }
    }
    for v in &mut mean {
        *v /= n as f64;
    }
    let mut var = vec![0.0; m];
    for i in 0..n {
        for ((acc, v), mu) in var.iter_mut().zip(x.row(i)).zip(&mean) {
            *acc += (v - mu) * (v - mu);
        }
    }
    for v in &mut var {
        *v /= n as f64;
    }
    var
}

/// Advances one step in place. All new velocities are computed from the
/// previous ones; `scratch` is reused between calls.
pub fn step_into(g: &Graph, s: &mut EmbeddingState, scratch: &mut Coordinates) -> Result<()> {
    let n = g.vertex_count();
    let m = s.velocities.dim();
    if scratch.len() != n || scratch.dim() != m {
        *scratch = Coordinates::zeros(n, m);
    }
    for i in 0..n {
        let nbrs = g.neighbors(i);
        if nbrs.is_empty() {
            return Err(Error::IsolatedVertex(i));
        }
        let out = scratch.row_mut(i);
        out.fill(0.0);
        for &j in nbrs {
            for (o, v) in out.iter_mut().zip(s.velocities.row(j)) {
                *o += v;
            }
        }
        let inv = 1.0 / nbrs.len() as f64;
        for o in out.iter_mut() {
            *o *= inv;
        }
    }
    std::mem::swap(&mut s.velocities, scratch);
    for (p, x) in s.positions.data.iter_mut().zip(&s.velocities.data) {
        *p += x;
    }
    s.t += 1;
    s.sync_errors = sync_error(&s.velocities);
    Ok(())
}

/// One step of velocity averaging and position accumulation.
pub fn step(g: &Graph, s: &EmbeddingState) -> Result<EmbeddingState> {
    let mut next = s.clone();
    let mut scratch = Coordinates::zeros(g.vertex_count(), s.velocities.dim());
    step_into(g, &mut next, &mut scratch)?;
    Ok(next)
}

/// Final positions plus how the iteration ended.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub positions: Coordinates,
    pub iterations: usize,
    pub converged: bool,
    pub sync_errors: Vec<f64>,
}

/// Iterates from the seeded initial state until synchronized or
/// `max_iters` steps. Failing to synchronize is reported, not an error.
pub fn embed(g: &Graph, cfg: &EmbeddingConfig) -> Result<Embedding> {
    let state = init_state(g, cfg)?;
    embed_from(g, state, cfg)
}

/// As [`embed`], starting from a given state.
pub fn embed_from(g: &Graph, mut state: EmbeddingState, cfg: &EmbeddingConfig) -> Result<Embedding> {
    cfg.validate()?;
    if let Some(v) = (0..g.vertex_count()).find(|&v| g.degree(v) == 0) {
        return Err(Error::IsolatedVertex(v));
    }
    let mut scratch = Coordinates::zeros(g.vertex_count(), state.velocities.dim());
    while state.max_sync_error() >= cfg.sync_tolerance && state.t < cfg.max_iters {
        step_into(g, &mut state, &mut scratch)?;
    }
    let converged = state.max_sync_error() < cfg.sync_tolerance;
    if !converged {
        log::info!(
            "embedding did not synchronize within {} steps (max error {:e})",
            cfg.max_iters,
            state.max_sync_error()
        );
    }
    Ok(Embedding {
        positions: state.positions,
        iterations: state.t,
        converged,
        sync_errors: state.sync_errors,
    })
}

/// Embedding of the largest connected component of a possibly
/// disconnected graph.
#[derive(Debug, Clone)]
pub struct ComponentEmbedding {
    /// Original ids of the embedded vertices, ascending; local id `i` is
    /// `vertices[i]`.
    pub vertices: Vec<usize>,
    pub subgraph: Graph,
    pub embedding: Embedding,
}

impl ComponentEmbedding {
    /// Positions indexed by original vertex id; vertices outside the
    /// component get NaN rows.
    pub fn full_positions(&self, n: usize) -> Coordinates {
        let m = self.embedding.positions.dim();
        let mut out = Coordinates::from_rows(m, vec![f64::NAN; n * m]).expect("dim >= 1");
        for (local, &v) in self.vertices.iter().enumerate() {
            out.row_mut(v)
                .copy_from_slice(self.embedding.positions.row(local));
        }
        out
    }
}

pub fn embed_largest_component(g: &Graph, cfg: &EmbeddingConfig) -> Result<ComponentEmbedding> {
    let vertices = largest_component(g);
    if vertices.len() < g.vertex_count() {
        log::warn!(
            "embedding only the largest component ({} of {} vertices)",
            vertices.len(),
            g.vertex_count()
        );
    }
    let subgraph = g.induced_subgraph(&vertices);
    let embedding = embed(&subgraph, cfg)?;
    Ok(ComponentEmbedding {
        vertices,
        subgraph,
        embedding,
    })
}
