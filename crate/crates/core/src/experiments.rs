//! Parameter sweeps over the two network families, aggregated across
//! realizations, and the comparison of shortest-path-length distributions
//! between all routed pairs and delivered pairs.

use rayon::prelude::*;

use crate::embedding::{embed, Coordinates, EmbeddingConfig};
use crate::error::{Error, Result};
use crate::generators::{gamma_to_k0, generalized_ba, watts_strogatz, BaParams, WsParams};
use crate::graph::{
    clustering_coefficient, diameter, largest_component, DistanceTable, Graph,
    PathLengthDistribution,
};
use crate::routing::{run_trials, stretch, success_rate, HopLengths, RouteResult};
use crate::seeds::RngStream;

/// Above this many vertices, shortest-path lengths come from per-trial BFS
/// instead of a dense all-pairs table.
const DENSE_TABLE_LIMIT: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Ws,
    Ba,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Ws => "ws",
            Family::Ba => "ba",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ws" => Ok(Family::Ws),
            "ba" => Ok(Family::Ba),
            other => Err(Error::param(format!(
                "family must be ws or ba, got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub family: Family,
    /// Rewiring probabilities (ws) or degree exponents (ba).
    pub grid: Vec<f64>,
    pub n: usize,
    /// Lattice degree (ws).
    pub k: usize,
    /// Links per new vertex (ba).
    pub m_links: usize,
    pub dims: Vec<usize>,
    pub realizations: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub sync_tolerance: f64,
    pub max_iters: usize,
}

impl SweepSpec {
    /// Rewiring sweep with n = 1000, k = 10, m in {5, 10, 20}, 20
    /// realizations of 10^4 trials, over 20 log-spaced p from 1e-4 to 1.
    pub fn ws_default() -> Self {
        SweepSpec {
            family: Family::Ws,
            grid: log_grid(1e-4, 1.0, 20),
            n: 1000,
            k: 10,
            m_links: 3,
            dims: vec![5, 10, 20],
            realizations: 20,
            trials: 10_000,
            master_seed: crate::seeds::DEFAULT_SEED,
            sync_tolerance: 1e-4,
            max_iters: 100_000,
        }
    }

    /// Scale-free sweep with n = 1000, m_links = 3, gamma from 2.2 to 4.0.
    pub fn ba_default() -> Self {
        SweepSpec {
            family: Family::Ba,
            grid: (0..11).map(|i| 2.2 + 0.18 * i as f64).collect(),
            ..Self::ws_default()
        }
    }

    /// Reduced realizations and trials for quick runs.
    pub fn quick(mut self) -> Self {
        self.realizations = 5;
        self.trials = 2000;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::param("parameter grid is empty"));
        }
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(Error::param("dims must be a nonempty list of positive dimensions"));
        }
        if self.realizations < 1 {
            return Err(Error::param("realizations must be >= 1"));
        }
        if !(self.sync_tolerance > 0.0) || self.max_iters < 1 {
            return Err(Error::param("eps must be > 0 and max_iters >= 1"));
        }
        for &x in &self.grid {
            match self.family {
                Family::Ws => WsParams { n: self.n, k: self.k, p: x, seed: 0 }.validate()?,
                Family::Ba => {
                    let k0 = gamma_to_k0(x, self.m_links)?;
                    BaParams { n: self.n, m_links: self.m_links, k0, seed: 0 }.validate()?
                }
            }
        }
        Ok(())
    }

    fn generate(&self, param: f64, seed: u64) -> Result<Graph> {
        match self.family {
            Family::Ws => watts_strogatz(&WsParams {
                n: self.n,
                k: self.k,
                p: param,
                seed,
            }),
            Family::Ba => generalized_ba(&BaParams {
                n: self.n,
                m_links: self.m_links,
                k0: gamma_to_k0(param, self.m_links)?,
                seed,
            }),
        }
    }
}

/// `count` points spaced evenly in log between `lo` and `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == count - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

/// Measurements for one (parameter, dimension, realization) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellMetrics {
    pub diameter: u32,
    pub clustering: f64,
    pub success_rate: f64,
    pub stretch: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Vertices in the routed (largest) component.
    pub component_size: usize,
    pub all_pairs: PathLengthDistribution,
    pub success_pairs: PathLengthDistribution,
}

impl CellMetrics {
    pub fn ks(&self) -> Option<f64> {
        ks_statistic(&self.all_pairs, &self.success_pairs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub param: f64,
    pub dim: usize,
    pub realization: usize,
    /// Seed of the generated graph.
    pub seed: u64,
    pub n: usize,
    /// Failure message for cells that could not be computed.
    pub outcome: std::result::Result<CellMetrics, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub spec: SweepSpec,
    /// Ordered by (parameter, dimension, realization).
    pub cells: Vec<CellResult>,
}

/// Mean and standard error of the mean; `stderr` is `None` for one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub stderr: Option<f64>,
    pub count: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Summary> {
        let count = values.len();
        if count == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let stderr = (count > 1).then(|| {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
            (var / count as f64).sqrt()
        });
        Some(Summary { mean, stderr, count })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub param: f64,
    pub dim: usize,
    /// Cells that completed.
    pub realizations: usize,
    pub diameter: Option<Summary>,
    pub clustering: Option<Summary>,
    pub success_rate: Option<Summary>,
    /// Over realizations with at least one delivery.
    pub stretch: Option<Summary>,
    pub iterations: Option<Summary>,
    pub converged_fraction: Option<f64>,
    /// Over realizations with at least one delivery.
    pub ks: Option<Summary>,
}

impl SweepResult {
    pub fn cells_for(&self, param: f64, dim: usize) -> impl Iterator<Item = &CellResult> {
        self.cells
            .iter()
            .filter(move |c| c.param.to_bits() == param.to_bits() && c.dim == dim)
    }

    pub fn aggregate(&self) -> Vec<AggregateRow> {
        let mut rows = Vec::new();
        for &param in &self.spec.grid {
            for &dim in &self.spec.dims {
                let ok: Vec<&CellMetrics> = self
                    .cells_for(param, dim)
                    .filter_map(|c| c.outcome.as_ref().ok())
                    .collect();
                let pick = |f: &dyn Fn(&CellMetrics) -> Option<f64>| -> Option<Summary> {
                    Summary::of(&ok.iter().filter_map(|c| f(c)).collect::<Vec<_>>())
                };
                rows.push(AggregateRow {
                    param,
                    dim,
                    realizations: ok.len(),
                    diameter: pick(&|c| Some(c.diameter as f64)),
                    clustering: pick(&|c| Some(c.clustering)),
                    success_rate: pick(&|c| Some(c.success_rate)),
                    stretch: pick(&|c| c.stretch),
                    iterations: pick(&|c| Some(c.iterations as f64)),
                    converged_fraction: (!ok.is_empty()).then(|| {
                        ok.iter().filter(|c| c.converged).count() as f64 / ok.len() as f64
                    }),
                    ks: pick(&|c| c.ks()),
                });
            }
        }
        rows
    }

    pub fn row(&self, param: f64, dim: usize) -> Option<AggregateRow> {
        self.aggregate()
            .into_iter()
            .find(|r| r.param.to_bits() == param.to_bits() && r.dim == dim)
    }

    /// All-pairs and delivered-pairs distributions for one parameter,
    /// pooled over realizations at dimension `dim`.
    pub fn pooled_paths(&self, param: f64, dim: usize) -> (PathLengthDistribution, PathLengthDistribution) {
        let mut all = PathLengthDistribution::default();
        let mut ok = PathLengthDistribution::default();
        for c in self.cells_for(param, dim) {
            if let Ok(m) = &c.outcome {
                all.merge(&m.all_pairs);
                ok.merge(&m.success_pairs);
            }
        }
        (all, ok)
    }
}

/// Seed streams for one cell, keyed by parameter value rather than grid
/// position so that editing the grid leaves other cells unchanged.
struct CellSeeds {
    graph: RngStream,
    embed: RngStream,
    route: RngStream,
}

fn cell_seeds(master: u64, param: f64, dim: usize, realization: usize) -> CellSeeds {
    let root = RngStream::new(master);
    let bits = param.to_bits();
    let r = realization as u64;
    CellSeeds {
        graph: root.derive_path(&[("graph", bits), ("realization", r)]),
        embed: root.derive_path(&[("embed", bits), ("dim", dim as u64), ("realization", r)]),
        route: root.derive_path(&[("route", bits), ("dim", dim as u64), ("realization", r)]),
    }
}

/// Outcome of routing trials summarized for the distribution comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct PathComparison {
    pub all_pairs: PathLengthDistribution,
    pub success_pairs: PathLengthDistribution,
    /// `None` when nothing was delivered.
    pub ks: Option<f64>,
}

/// Shortest-path-length histograms of every trial and of delivered trials.
pub fn compare_path_lengths(results: &[RouteResult]) -> PathComparison {
    let mut all_pairs = PathLengthDistribution::default();
    let mut success_pairs = PathLengthDistribution::default();
    for r in results {
        all_pairs.record(r.shortest_length);
        if r.success {
            success_pairs.record(r.shortest_length);
        }
    }
    let ks = ks_statistic(&all_pairs, &success_pairs);
    PathComparison {
        all_pairs,
        success_pairs,
        ks,
    }
}

/// Routes `trials` random pairs inside `component` and compares the
/// shortest-path-length distributions of all pairs and delivered pairs.
pub fn path_length_comparison(
    g: &Graph,
    coords: &Coordinates,
    component: &[usize],
    trials: usize,
    stream: &RngStream,
) -> Result<PathComparison> {
    if trials < 1 {
        return Err(Error::param("trials must be >= 1"));
    }
    let results = run_trials(g, coords, component, trials, HopLengths::Bfs, stream)?;
    Ok(compare_path_lengths(&results))
}

/// Two-sample Kolmogorov–Smirnov statistic between two histograms:
/// the largest gap between their empirical CDFs. `None` if either is empty.
pub fn ks_statistic(a: &PathLengthDistribution, b: &PathLengthDistribution) -> Option<f64> {
    if a.total == 0 || b.total == 0 {
        return None;
    }
    let mut support: Vec<u32> = a.histogram.keys().chain(b.histogram.keys()).copied().collect();
    support.sort_unstable();
    support.dedup();
    let (mut ca, mut cb) = (0u64, 0u64);
    let mut worst: f64 = 0.0;
    for l in support {
        ca += a.count(l);
        cb += b.count(l);
        let gap = (ca as f64 / a.total as f64 - cb as f64 / b.total as f64).abs();
        worst = worst.max(gap);
    }
    Some(worst)
}

/// Runs one graph realization through every dimension of the spec.
fn run_unit(spec: &SweepSpec, param: f64, realization: usize) -> Vec<CellResult> {
    let seeds = cell_seeds(spec.master_seed, param, 0, realization);
    let graph_seed = seeds.graph.seed();
    let cell = |dim: usize, outcome| CellResult {
        param,
        dim,
        realization,
        seed: graph_seed,
        n: spec.n,
        outcome,
    };
    let prepared = spec.generate(param, graph_seed).and_then(|g| {
        let component = largest_component(&g);
        if component.len() < g.vertex_count() {
            log::warn!(
                "{} param {param} realization {realization}: routing restricted to largest component ({} of {})",
                spec.family.as_str(),
                component.len(),
                g.vertex_count()
            );
        }
        let clustering = clustering_coefficient(&g);
        let sub = g.induced_subgraph(&component);
        let table = (sub.vertex_count() <= DENSE_TABLE_LIMIT).then(|| DistanceTable::new(&sub));
        let diam = match &table {
            Some(t) => t.max_within(&(0..sub.vertex_count()).collect::<Vec<_>>()),
            None => diameter(&sub)?,
        };
        Ok((sub, table, clustering, diam))
    });
    let (sub, table, clustering, diam) = match prepared {
        Ok(p) => p,
        Err(e) => {
            log::error!("{} param {param} realization {realization}: {e}", spec.family.as_str());
            return spec.dims.iter().map(|&d| cell(d, Err(e.to_string()))).collect();
        }
    };
    let local: Vec<usize> = (0..sub.vertex_count()).collect();
    spec.dims
        .iter()
        .map(|&dim| {
            let seeds = cell_seeds(spec.master_seed, param, dim, realization);
            let cfg = EmbeddingConfig {
                dim,
                init_half_width: 0.5,
                sync_tolerance: spec.sync_tolerance,
                max_iters: spec.max_iters,
                seed: seeds.embed.seed(),
            };
            let outcome = embed(&sub, &cfg).and_then(|emb| {
                let lengths = match &table {
                    Some(t) => HopLengths::Table(t),
                    None => HopLengths::Bfs,
                };
                let results = run_trials(&sub, &emb.positions, &local, spec.trials, lengths, &seeds.route)?;
                let cmp = compare_path_lengths(&results);
                Ok(CellMetrics {
                    diameter: diam,
                    clustering,
                    success_rate: if results.is_empty() { f64::NAN } else { success_rate(&results)? },
                    stretch: stretch(&results),
                    converged: emb.converged,
                    iterations: emb.iterations,
                    component_size: sub.vertex_count(),
                    all_pairs: cmp.all_pairs,
                    success_pairs: cmp.success_pairs,
                })
            });
            if let Err(e) = &outcome {
                log::error!("param {param} dim {dim} realization {realization}: {e}");
            }
            cell(dim, outcome.map_err(|e| e.to_string()))
        })
        .collect()
}

/// Runs every cell of `spec` on `workers` threads. Output order and
/// contents do not depend on the worker count.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<SweepResult> {
    spec.validate()?;
    let units: Vec<(usize, usize)> = (0..spec.grid.len())
        .flat_map(|p| (0..spec.realizations).map(move |r| (p, r)))
        .collect();
    let work = || -> Vec<Vec<CellResult>> {
        units
            .par_iter()
            .map(|&(p, r)| run_unit(spec, spec.grid[p], r))
            .collect()
    };
    let per_unit = if workers <= 1 {
        units.iter().map(|&(p, r)| run_unit(spec, spec.grid[p], r)).collect()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::param(format!("cannot start {workers} workers: {e}")))?
            .install(work)
    };
    let mut cells: Vec<CellResult> = per_unit.into_iter().flatten().collect();
    let dim_rank = |d: usize| spec.dims.iter().position(|&x| x == d).unwrap_or(usize::MAX);
    // units are (param, realization); reorder to (param, dim, realization)
    cells.sort_by_key(|c| {
        (
            spec.grid.iter().position(|x| x.to_bits() == c.param.to_bits()),
            dim_rank(c.dim),
            c.realization,
        )
    });
    Ok(SweepResult {
        spec: spec.clone(),
        cells,
    })
}

/// Rewiring-probability sweep.
pub fn run_ws_sweep(spec: &SweepSpec, workers: usize) -> Result<SweepResult> {
    if spec.family != Family::Ws {
        return Err(Error::param("run_ws_sweep needs family = ws"));
    }
    run_sweep(spec, workers)
}

/// Degree-exponent sweep.
pub fn run_ba_sweep(spec: &SweepSpec, workers: usize) -> Result<SweepResult> {
    if spec.family != Family::Ba {
        return Err(Error::param("run_ba_sweep needs family = ba"));
    }
    if let Some(g) = spec.grid.iter().find(|&&g| !(g > 2.0 && g <= 4.0)) {
        return Err(Error::param(format!("gamma grid must lie in (2, 4], got {g}")));
    }
    run_sweep(spec, workers)
}
