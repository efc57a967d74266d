//! Command-line front end: argument parsing and validation into a
//! [`RunConfig`], and the subcommand runners.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::embedding::{embed_from, embed_largest_component, init_state, EmbeddingConfig};
use crate::error::{Error, Result};
use crate::experiments::{compare_path_lengths, run_sweep, SweepResult, SweepSpec};
use crate::generators::{gamma_to_k0, generalized_ba, watts_strogatz, BaParams, WsParams};
use crate::graph::{largest_component, Graph};
use crate::io::{self, Field, Format, Table};
use crate::routing::{run_trials, stretch, success_rate, HopLengths, RouteResult};
use crate::seeds::{RngStream, DEFAULT_SEED};
use crate::spectral::{closed_form_positions, decompose, energy_relation_check, max_relative_discrepancy};

#[derive(Debug, Parser)]
#[command(name = "swnav", version, about = "Hidden metric embedding and greedy routing on small-world networks")]
pub struct Cli {
    /// Master seed for every random draw [default: 1592598545]. Overrides
    /// the `seed` key of a sweep file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output format for tabular results.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Ws,
    Ba,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Generate a Watts-Strogatz or generalized Barabasi-Albert graph.
    Generate(GenerateArgs),
    /// Embed a graph by velocity averaging and position accumulation.
    Embed(EmbedArgs),
    /// Route random pairs greedily over embedded coordinates.
    Route(RouteArgs),
    /// Compare the iterative embedding against its spectral closed form.
    Oracle(OracleArgs),
    /// Run a parameter sweep described by a config file.
    Sweep(SweepArgs),
    /// Shortest-path-length distributions of all and delivered pairs.
    Pathdist(RouteArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub model: Model,
    #[arg(long)]
    pub n: usize,
    /// Lattice degree (ws).
    #[arg(long)]
    pub k: Option<usize>,
    /// Rewiring probability (ws).
    #[arg(long)]
    pub p: Option<f64>,
    /// Links per new vertex (ba).
    #[arg(long)]
    pub mlinks: Option<usize>,
    /// Target degree exponent (ba).
    #[arg(long, conflicts_with = "k0")]
    pub gamma: Option<f64>,
    /// Attachment offset (ba).
    #[arg(long, allow_hyphen_values = true)]
    pub k0: Option<f64>,
    #[arg(long)]
    pub graph_out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[arg(long)]
    pub graph_in: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub dim: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub eps: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iters: usize,
    /// Half-width of the uniform initial velocity range.
    #[arg(long, default_value_t = 0.5)]
    pub half_width: f64,
    #[arg(long)]
    pub coords_out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RouteArgs {
    #[arg(long)]
    pub graph_in: PathBuf,
    #[arg(long)]
    pub coords_in: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub graph_in: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub dim: usize,
    /// Synchronization tolerance for the iterative run being checked.
    #[arg(long, default_value_t = 1e-8)]
    pub eps: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iters: usize,
    /// Random probes for the energy bound.
    #[arg(long, default_value_t = 100)]
    pub probes: usize,
    /// Report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// 5 realizations and 2000 trials per graph.
    #[arg(long)]
    pub quick: bool,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

/// A fully validated invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub format: Format,
    pub verbosity: u8,
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    GenerateWs { params: WsParams, graph_out: PathBuf },
    GenerateBa { params: BaParams, graph_out: PathBuf },
    Embed { graph_in: PathBuf, config: EmbeddingConfig, coords_out: PathBuf },
    Route { graph_in: PathBuf, coords_in: PathBuf, trials: usize, out: PathBuf },
    Oracle { graph_in: PathBuf, config: EmbeddingConfig, probes: usize, out: Option<PathBuf> },
    Sweep { spec: SweepSpec, out_dir: PathBuf, workers: usize },
    Pathdist { graph_in: PathBuf, coords_in: PathBuf, trials: usize, out: PathBuf },
}

/// Usage problems: bad flags, bad values, unusable paths.
#[derive(Debug)]
pub enum UsageError {
    /// Help or version output requested; not a failure.
    Display(clap::Error),
    Clap(clap::Error),
    Invalid(String),
}

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UsageError::Display(e) | UsageError::Clap(e) => write!(f, "{e}"),
            UsageError::Invalid(msg) => write!(f, "error: {msg}"),
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> UsageError {
    UsageError::Invalid(e.to_string())
}

fn require<T>(value: Option<T>, flag: &str, model: &str) -> std::result::Result<T, UsageError> {
    value.ok_or_else(|| UsageError::Invalid(format!("--{flag} is required for --model {model}")))
}

fn check_input(path: &Path) -> std::result::Result<(), UsageError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(UsageError::Invalid(format!("input file {} does not exist", path.display())))
    }
}

fn check_output(path: &Path) -> std::result::Result<(), UsageError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(UsageError::Invalid(
            format!("output directory {} does not exist", dir.display()),
        )),
        _ => Ok(()),
    }
}

/// Parses and validates command-line arguments. Input files must exist and
/// output directories must be present before any work starts.
pub fn parse_config<I, T>(args: I) -> std::result::Result<RunConfig, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp
        | clap::error::ErrorKind::DisplayVersion
        => UsageError::Display(e),
        _ => UsageError::Clap(e),
    })?;
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    let command = match cli.command {
        CommandArgs::Generate(a) => {
            check_output(&a.graph_out)?;
            match a.model {
                Model::Ws => {
                    let params = WsParams {
                        n: a.n,
                        k: require(a.k, "k", "ws")?,
                        p: require(a.p, "p", "ws")?,
                        seed,
                    };
                    params.validate().map_err(invalid)?;
                    Command::GenerateWs { params, graph_out: a.graph_out }
                }
                Model::Ba => {
                    let m_links = require(a.mlinks, "mlinks", "ba")?;
                    let k0 = match (a.gamma, a.k0) {
                        (Some(g), None) => gamma_to_k0(g, m_links).map_err(invalid)?,
                        (None, Some(k0)) => k0,
                        _ => return Err(invalid("exactly one of --gamma or --k0 is required for --model ba")),
                    };
                    let params = BaParams { n: a.n, m_links, k0, seed };
                    params.validate().map_err(invalid)?;
                    Command::GenerateBa { params, graph_out: a.graph_out }
                }
            }
        }
        CommandArgs::Embed(a) => {
            check_input(&a.graph_in)?;
            check_output(&a.coords_out)?;
            let config = EmbeddingConfig {
                dim: a.dim,
                init_half_width: a.half_width,
                sync_tolerance: a.eps,
                max_iters: a.max_iters,
                seed,
            };
            config.validate().map_err(invalid)?;
            Command::Embed { graph_in: a.graph_in, config, coords_out: a.coords_out }
        }
        CommandArgs::Route(a) => {
            check_input(&a.graph_in)?;
            check_input(&a.coords_in)?;
            check_output(&a.out)?;
            Command::Route { graph_in: a.graph_in, coords_in: a.coords_in, trials: a.trials, out: a.out }
        }
        CommandArgs::Pathdist(a) => {
            check_input(&a.graph_in)?;
            check_input(&a.coords_in)?;
            check_output(&a.out)?;
            if a.trials < 1 {
                return Err(invalid("--trials must be >= 1"));
            }
            Command::Pathdist { graph_in: a.graph_in, coords_in: a.coords_in, trials: a.trials, out: a.out }
        }
        CommandArgs::Oracle(a) => {
            check_input(&a.graph_in)?;
            if let Some(out) = &a.out {
                check_output(out)?;
            }
            let config = EmbeddingConfig {
                dim: a.dim,
                init_half_width: 0.5,
                sync_tolerance: a.eps,
                max_iters: a.max_iters,
                seed,
            };
            config.validate().map_err(invalid)?;
            Command::Oracle { graph_in: a.graph_in, config, probes: a.probes, out: a.out }
        }
        CommandArgs::Sweep(a) => {
            check_input(&a.spec)?;
            let mut spec = io::read_sweep_config(&a.spec).map_err(invalid)?;
            if a.quick {
                spec = spec.quick();
            }
            if let Some(s) = cli.seed {
                spec.master_seed = s;
            }
            if a.workers < 1 {
                return Err(invalid("--workers must be >= 1"));
            }
            Command::Sweep { spec, out_dir: a.out_dir, workers: a.workers }
        }
    };
    Ok(RunConfig {
        seed,
        format: match cli.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        },
        verbosity: cli.verbose,
        command,
    })
}

/// Executes a validated configuration.
pub fn run(config: &RunConfig) -> Result<()> {
    match &config.command {
        Command::GenerateWs { params, graph_out } => {
            let g = watts_strogatz(params)?;
            io::write_edge_list(graph_out, &g)?;
            log::info!("wrote {} vertices, {} edges", g.vertex_count(), g.edge_count());
        }
        Command::GenerateBa { params, graph_out } => {
            let g = generalized_ba(params)?;
            io::write_edge_list(graph_out, &g)?;
            log::info!("wrote {} vertices, {} edges", g.vertex_count(), g.edge_count());
        }
        Command::Embed { graph_in, config, coords_out } => {
            let g = io::read_edge_list(graph_in)?;
            let ce = embed_largest_component(&g, config)?;
            io::write_coordinates(coords_out, &ce.full_positions(g.vertex_count()))?;
            println!(
                "iterations={} converged={} max_sync_error={}",
                ce.embedding.iterations,
                ce.embedding.converged,
                io::format_sig(ce.embedding.sync_errors.iter().copied().fold(0.0, f64::max), 6)
            );
        }
        Command::Route { graph_in, coords_in, trials, out } => {
            let (g, coords, component) = load_routing_inputs(graph_in, coords_in)?;
            let results = run_trials(&g, &coords, &component, *trials, HopLengths::Bfs, &route_stream(config.seed))?;
            io::emit(&route_table(&results), config.format, out)?;
            if !results.is_empty() {
                println!(
                    "success_rate={} stretch={}",
                    io::format_sig(success_rate(&results)?, 6),
                    stretch(&results).map_or("NA".into(), |s| io::format_sig(s, 6))
                );
            }
        }
        Command::Pathdist { graph_in, coords_in, trials, out } => {
            let (g, coords, component) = load_routing_inputs(graph_in, coords_in)?;
            let results = run_trials(&g, &coords, &component, *trials, HopLengths::Bfs, &route_stream(config.seed))?;
            let cmp = compare_path_lengths(&results);
            io::emit(&pathdist_table(&cmp.all_pairs, &cmp.success_pairs), config.format, out)?;
            println!("ks={}", cmp.ks.map_or("NA".into(), |k| io::format_sig(k, 6)));
        }
        Command::Oracle { graph_in, config: cfg, probes, out } => {
            let g = io::read_edge_list(graph_in)?;
            let report = oracle_report(&g, cfg, *probes)?;
            let mut text = serde_json::to_string_pretty(&report).expect("json");
            text.push('\n');
            match out {
                Some(path) => io::write_file(path, &text)?,
                None => print!("{text}"),
            }
        }
        Command::Sweep { spec, out_dir, workers } => {
            std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
            let result = run_sweep(spec, *workers)?;
            write_sweep(&result, out_dir, config.format)?;
        }
    }
    Ok(())
}

fn route_stream(seed: u64) -> RngStream {
    RngStream::new(seed).derive("route", 0)
}

/// Graph, coordinates, and the routable vertices: the largest component,
/// which must have finite coordinates.
fn load_routing_inputs(graph_in: &Path, coords_in: &Path) -> Result<(Graph, crate::Coordinates, Vec<usize>)> {
    let g = io::read_edge_list(graph_in)?;
    let coords = io::read_coordinates(coords_in)?;
    if coords.len() != g.vertex_count() {
        return Err(Error::param(format!(
            "{} has {} rows but the graph has {} vertices",
            coords_in.display(),
            coords.len(),
            g.vertex_count()
        )));
    }
    let component = largest_component(&g);
    if let Some(&v) = component.iter().find(|&&v| coords.row(v).iter().any(|x| !x.is_finite())) {
        return Err(Error::param(format!("vertex {v} of the largest component has no finite coordinates")));
    }
    if component.len() < g.vertex_count() {
        log::warn!("routing restricted to the largest component ({} of {} vertices)", component.len(), g.vertex_count());
    }
    Ok((g, coords, component))
}

pub fn route_table(results: &[RouteResult]) -> Table {
    let mut t = Table::new(&["source", "target", "success", "path_len", "shortest_len", "reason"]);
    for r in results {
        t.push(vec![
            r.source.into(),
            r.target.into(),
            r.success.into(),
            r.path_length().into(),
            r.shortest_length.into(),
            r.termination.as_str().into(),
        ]);
    }
    t
}

pub fn pathdist_table(all: &crate::PathLengthDistribution, ok: &crate::PathLengthDistribution) -> Table {
    let mut t = Table::new(&["L", "count_all", "count_success"]);
    let mut lengths: Vec<u32> = all.histogram.keys().chain(ok.histogram.keys()).copied().collect();
    lengths.sort_unstable();
    lengths.dedup();
    for l in lengths {
        t.push(vec![l.into(), all.count(l).into(), ok.count(l).into()]);
    }
    t
}

pub fn cells_table(result: &SweepResult) -> Table {
    let mut t = Table::new(&[
        "family", "param", "dim", "realization", "seed", "n", "diameter", "clustering",
        "success_rate", "stretch", "converged", "iters",
    ]);
    let family = result.spec.family.as_str();
    for c in &result.cells {
        let mut row: Vec<Field> = vec![
            family.into(),
            c.param.into(),
            c.dim.into(),
            c.realization.into(),
            c.seed.into(),
            c.n.into(),
        ];
        match &c.outcome {
            Ok(m) => row.extend([
                m.diameter.into(),
                m.clustering.into(),
                m.success_rate.into(),
                Field::opt(m.stretch),
                m.converged.into(),
                m.iterations.into(),
            ]),
            Err(_) => row.extend(std::iter::repeat_n(Field::Missing, 6)),
        }
        t.push(row);
    }
    t
}

pub fn aggregate_table(result: &SweepResult) -> Table {
    let mut t = Table::new(&[
        "param", "dim", "realizations",
        "diameter_mean", "diameter_stderr",
        "clustering_mean", "clustering_stderr",
        "success_rate_mean", "success_rate_stderr",
        "stretch_mean", "stretch_stderr",
        "iters_mean", "iters_stderr",
        "converged_fraction",
        "ks_mean", "ks_stderr",
    ]);
    for r in result.aggregate() {
        let mut row: Vec<Field> = vec![r.param.into(), r.dim.into(), r.realizations.into()];
        for s in [r.diameter, r.clustering, r.success_rate, r.stretch, r.iterations] {
            row.push(Field::opt(s.map(|s| s.mean)));
            row.push(Field::opt(s.and_then(|s| s.stderr)));
        }
        row.push(Field::opt(r.converged_fraction));
        row.push(Field::opt(r.ks.map(|s| s.mean)));
        row.push(Field::opt(r.ks.and_then(|s| s.stderr)));
        t.push(row);
    }
    t
}

/// Writes `cells`, `aggregate`, and one `pathdist_<param>` table per grid
/// point (pooled over realizations at the largest dimension).
pub fn write_sweep(result: &SweepResult, out_dir: &Path, format: Format) -> Result<()> {
    let ext = format.extension();
    io::emit(&cells_table(result), format, &out_dir.join(format!("cells.{ext}")))?;
    io::emit(&aggregate_table(result), format, &out_dir.join(format!("aggregate.{ext}")))?;
    let dim = *result.spec.dims.iter().max().expect("validated dims");
    for &param in &result.spec.grid {
        let (all, ok) = result.pooled_paths(param, dim);
        let name = format!("pathdist_{}.{ext}", io::format_sig(param, io::METRIC_DIGITS));
        io::emit(&pathdist_table(&all, &ok), format, &out_dir.join(name))?;
    }
    Ok(())
}

/// Runs the iterative embedding from the seeded start and compares its
/// distance matrix with the spectral closed form.
pub fn oracle_report(g: &Graph, cfg: &EmbeddingConfig, probes: usize) -> Result<serde_json::Value> {
    let dec = decompose(g)?;
    let state = init_state(g, cfg)?;
    let x0 = state.velocities.clone();
    let iterative = embed_from(g, state, cfg)?;
    let n = g.vertex_count();
    let mut rng = RngStream::new(cfg.seed).derive("oracle-probes", 0).rng();
    let energy = energy_relation_check(&dec, g, probes, &mut rng);
    let (discrepancy, closed_form_error) = match closed_form_positions(&dec, &x0) {
        Ok(p) => (
            Some(max_relative_discrepancy(
                &iterative.positions.distance_matrix(),
                &p.distance_matrix(),
                n,
            )),
            None,
        ),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(json!({
        "n": n,
        "dim": cfg.dim,
        "seed": cfg.seed,
        "spectrum": {
            "min": dec.eigenvalues[0],
            "second_largest": dec.second_eigenvalue(),
            "max": dec.eigenvalues[n - 1],
            "bipartite": dec.is_bipartite(),
        },
        "iterative": {
            "iterations": iterative.iterations,
            "converged": iterative.converged,
            "eps": cfg.sync_tolerance,
        },
        "max_relative_distance_discrepancy": discrepancy,
        "closed_form_error": closed_form_error,
        "energy": energy,
    }))
}
