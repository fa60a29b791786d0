//! `condensation`: diffusion-condensation runs and their companion exports
//! (datasets, spectra, Sankey flows, velocity fields, graph embeddings,
//! baseline comparisons), all emitted as machine-readable CSV/JSON.
//!
//! Every command writes its primary output plus a `*.manifest.json` receipt
//! listing inputs, outputs, and the settings used. Outputs are byte-stable:
//! rerunning a command with identical inputs and flags reproduces identical
//! files (wall time lives only in the manifest).
//!
//! Exit codes: 0 success, 1 bad input (usage, parse, or validation),
//! 2 iteration budget exhausted (the trace is still written).

mod artifacts;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::Axis;

use artifacts::{DataInput, RunManifest, ARTIFACT_VERSION};
use condensation::engine::{
    self, CondensationConfig, EpsilonSpec, HaltReason, MergeThresholdMode,
};
use condensation::graph::{self, EmbeddingBasis};
use condensation::operators::{self, OperatorKind};
use condensation::spectra::{self, SpectralFamily};
use condensation::{baselines, datasets, hierarchy, io, Error, Result};

/// Data-driven cascade of low-pass diffusion filters, recorded as a
/// continuous cluster hierarchy.
#[derive(Debug, Parser)]
#[command(name = "condensation", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a bundled synthetic dataset (CSV + labels + descriptor).
    GenData(GenDataArgs),
    /// Run diffusion condensation on a CSV point cloud.
    Condense(CondenseArgs),
    /// Export singular-value traces of a run's diffusion operators.
    Spectra(SpectraArgs),
    /// Export a cluster flow diagram over an iteration window.
    Sankey(SankeyArgs),
    /// Export positions and velocity arrows at one iteration of a run.
    Velocity(VelocityArgs),
    /// Embed a graph's nodes via the spectrum of its adjacency matrix.
    EmbedGraph(EmbedGraphArgs),
    /// Compare condensation cuts against k-means and agglomerative baselines.
    Compare(CompareArgs),
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are successes; everything else is an input error
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::GenData(a) => cmd_gen_data(a),
        Command::Condense(a) => cmd_condense(a),
        Command::Spectra(a) => cmd_spectra(a),
        Command::Sankey(a) => cmd_sankey(a),
        Command::Velocity(a) => cmd_velocity(a),
        Command::EmbedGraph(a) => cmd_embed_graph(a),
        Command::Compare(a) => cmd_compare(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// `--out` wins; otherwise the default file name goes under
/// `CONDENSATION_OUT_DIR` (or the working directory).
fn resolve_out(flag: Option<PathBuf>, default_name: &str) -> PathBuf {
    match flag {
        Some(p) => p,
        None => match std::env::var_os("CONDENSATION_OUT_DIR") {
            Some(dir) => Path::new(&dir).join(default_name),
            None => PathBuf::from(default_name),
        },
    }
}

fn argv() -> Vec<String> {
    std::env::args().skip(1).collect()
}

fn halt_name(h: HaltReason) -> &'static str {
    match h {
        HaltReason::OuterLoopConverged => "outer-loop-converged",
        HaltReason::SingleCluster => "single-cluster",
        HaltReason::MaxIterations => "max-iterations",
    }
}

fn parse_epsilon(s: &str) -> std::result::Result<EpsilonSpec, String> {
    if s == "auto" {
        return Ok(EpsilonSpec::Auto);
    }
    s.parse::<f64>()
        .map(EpsilonSpec::Fixed)
        .map_err(|_| format!("expected a number or \"auto\", got {s:?}"))
}

fn parse_threshold_mode(s: &str) -> std::result::Result<MergeThresholdMode, String> {
    match s {
        "absolute" => Ok(MergeThresholdMode::Absolute),
        "relative-to-median" => Ok(MergeThresholdMode::RelativeToMedian),
        _ => Err(format!(
            "expected \"absolute\" or \"relative-to-median\", got {s:?}"
        )),
    }
}

// ---------------------------------------------------------------------------
// gen-data
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DatasetKind {
    HyperuniformCircle,
    UniformCircle,
    HyperuniformEllipse,
    NoisyCircles,
    NoisyMoons,
    Blobs,
    NoStructure,
}

#[derive(Debug, Args)]
struct GenDataArgs {
    /// Generator to run.
    #[arg(
        long,
        value_enum,
        required_unless_present = "from_descriptor",
        conflicts_with = "from_descriptor"
    )]
    kind: Option<DatasetKind>,
    /// Point count.
    #[arg(long, default_value_t = 64)]
    n: usize,
    /// Circle radius.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Ellipse semi-major axis.
    #[arg(long, default_value_t = 2.0)]
    a: f64,
    /// Ellipse semi-minor axis.
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    /// Inner/outer radius ratio (noisy-circles).
    #[arg(long, default_value_t = 0.5)]
    factor: f64,
    /// Gaussian jitter standard deviation (noisy generators).
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
    /// Seed for the randomized generators.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rebuild a dataset from a descriptor JSON written by an earlier run.
    #[arg(long, value_name = "JSON")]
    from_descriptor: Option<PathBuf>,
    /// Output CSV [default: dataset.csv under CONDENSATION_OUT_DIR or `.`].
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_gen_data(args: GenDataArgs) -> Result<i32> {
    let started = Instant::now();
    let mut inputs = Vec::new();
    let ds = match &args.from_descriptor {
        Some(path) => {
            inputs.push(path.display().to_string());
            let descriptor = artifacts::read_json(path)?;
            datasets::regenerate(&descriptor)?
        }
        None => match args.kind.expect("clap requires --kind here") {
            DatasetKind::HyperuniformCircle => datasets::hyperuniform_circle(args.n, args.radius)?,
            DatasetKind::UniformCircle => datasets::uniform_circle(args.n, args.radius, args.seed)?,
            DatasetKind::HyperuniformEllipse => {
                datasets::hyperuniform_ellipse(args.n, args.a, args.b)?
            }
            DatasetKind::NoisyCircles => {
                datasets::noisy_circles(args.n, args.factor, args.noise, args.seed)?
            }
            DatasetKind::NoisyMoons => datasets::noisy_moons(args.n, args.noise, args.seed)?,
            DatasetKind::Blobs => datasets::blobs(
                args.n,
                &datasets::DEFAULT_BLOB_CENTERS,
                &datasets::DEFAULT_BLOB_STDS,
                args.seed,
            )?,
            DatasetKind::NoStructure => datasets::no_structure(args.n, args.seed)?,
        },
    };

    let out = resolve_out(args.out, "dataset.csv");
    io::write_matrix(&out, &ds.data.view(), None)?;
    let mut outputs = vec![out.display().to_string()];
    if let Some(labels) = &ds.labels {
        let path = out.with_extension("labels.csv");
        io::write_label_column(&path, labels)?;
        outputs.push(path.display().to_string());
    }
    let descriptor_path = out.with_extension("descriptor.json");
    artifacts::write_json(&descriptor_path, &ds.descriptor)?;
    outputs.push(descriptor_path.display().to_string());

    let manifest = RunManifest {
        artifact_version: ARTIFACT_VERSION,
        command: argv(),
        config: None,
        resolved_epsilon: None,
        input: None,
        inputs,
        outputs,
        wall_time_seconds: started.elapsed().as_secs_f64(),
        halt_reason: None,
    };
    artifacts::write_json(&artifacts::manifest_path_for(&out), &manifest)?;
    println!("wrote {} ({} points)", out.display(), ds.n_points());
    Ok(0)
}

// ---------------------------------------------------------------------------
// condense
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
struct CondenseArgs {
    /// Input CSV, one point per row.
    #[arg(required_unless_present = "from_manifest", conflicts_with = "from_manifest")]
    input: Option<PathBuf>,
    /// Treat the first row as a header.
    #[arg(long)]
    has_header: bool,
    /// Strip this 0-based column (e.g. ground-truth labels) before running.
    #[arg(long, value_name = "COL")]
    label_column: Option<usize>,
    /// Initial bandwidth: a number, or "auto" for the squared median
    /// pairwise distance of the input.
    #[arg(long, value_parser = parse_epsilon, default_value = "auto")]
    epsilon: EpsilonSpec,
    /// Merge clusters whose representatives fall within this distance.
    #[arg(long, default_value_t = 1e-3)]
    merge_threshold: f64,
    /// "absolute", or "relative-to-median" to scale the threshold by the
    /// input's median pairwise distance.
    #[arg(long, value_parser = parse_threshold_mode, default_value = "absolute")]
    merge_threshold_mode: MergeThresholdMode,
    /// Declare a bandwidth epoch converged when the largest per-point degree
    /// shift drops below this.
    #[arg(long, default_value_t = 1e-4)]
    qdiff_threshold: f64,
    /// Bandwidth growth factor between epochs.
    #[arg(long, default_value_t = 2.0)]
    epsilon_growth: f64,
    /// Iteration budget; exhausting it exits with code 2.
    #[arg(long, default_value_t = 1000)]
    max_iterations: usize,
    /// Keep every k-th coordinate snapshot (spectra need stride 1).
    #[arg(long, default_value_t = 1, value_name = "K")]
    stride: usize,
    /// Rerun the exact configuration recorded in an earlier run's manifest.
    #[arg(
        long,
        value_name = "JSON",
        conflicts_with_all = [
            "has_header", "label_column", "epsilon", "merge_threshold",
            "merge_threshold_mode", "qdiff_threshold", "epsilon_growth",
            "max_iterations", "stride",
        ]
    )]
    from_manifest: Option<PathBuf>,
    /// Output trace JSON [default: trace.json under CONDENSATION_OUT_DIR or `.`].
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_condense(args: CondenseArgs) -> Result<i32> {
    let started = Instant::now();
    let mut inputs = Vec::new();
    let (cfg, data_input) = match &args.from_manifest {
        Some(path) => {
            inputs.push(path.display().to_string());
            let manifest: RunManifest = artifacts::read_json(path)?;
            let cfg = manifest.config.ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "{}: manifest records no condensation settings",
                    path.display()
                ))
            })?;
            let input = manifest.input.ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "{}: manifest records no input file",
                    path.display()
                ))
            })?;
            (cfg, input)
        }
        None => (
            CondensationConfig {
                epsilon0: args.epsilon,
                merge_threshold: args.merge_threshold,
                merge_threshold_mode: args.merge_threshold_mode,
                qdiff_threshold: args.qdiff_threshold,
                epsilon_growth: args.epsilon_growth,
                max_iterations: args.max_iterations,
                snapshot_stride: args.stride,
            },
            DataInput {
                path: args
                    .input
                    .as_ref()
                    .expect("clap requires an input here")
                    .display()
                    .to_string(),
                has_header: args.has_header,
                label_column: args.label_column,
            },
        ),
    };
    inputs.push(data_input.path.clone());

    let ds = datasets::load_csv(
        Path::new(&data_input.path),
        data_input.has_header,
        data_input.label_column,
    )?;
    let trace = engine::run(&ds.data, &cfg)?;

    let out = resolve_out(args.out, "trace.json");
    let written = artifacts::write_trace(&trace, &out)?;
    let manifest = RunManifest {
        artifact_version: ARTIFACT_VERSION,
        command: argv(),
        config: Some(cfg),
        resolved_epsilon: Some(trace.initial_epsilon),
        input: Some(data_input),
        inputs,
        outputs: written.iter().map(|p| p.display().to_string()).collect(),
        wall_time_seconds: started.elapsed().as_secs_f64(),
        halt_reason: Some(trace.halt_reason),
    };
    artifacts::write_json(&artifacts::manifest_path_for(&out), &manifest)?;

    println!(
        "wrote {} ({} iterations, halt: {})",
        out.display(),
        trace.final_iteration(),
        halt_name(trace.halt_reason)
    );
    Ok(if trace.halt_reason == HaltReason::MaxIterations {
        2
    } else {
        0
    })
}

// ---------------------------------------------------------------------------
// spectra
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
struct SpectraArgs {
    /// Trace JSON from `condense`.
    trace: PathBuf,
    /// Singular values kept per operator (the trivial leading one is dropped).
    #[arg(long, default_value_t = spectra::DEFAULT_TOP_K)]
    top: usize,
    /// Comma-separated subset of: step, cumulative, power.
    #[arg(long, default_value = "step,cumulative,power", value_delimiter = ',')]
    families: Vec<String>,
    /// Output CSV [default: spectra.csv under CONDENSATION_OUT_DIR or `.`].
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_spectra(args: SpectraArgs) -> Result<i32> {
    let started = Instant::now();
    let mut wanted: Vec<SpectralFamily> = Vec::new();
    for name in &args.families {
        let family = SpectralFamily::parse(name).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "unknown family {name:?} (expected step, cumulative, or power)"
            ))
        })?;
        if !wanted.contains(&family) {
            wanted.push(family);
        }
    }

    let trace = artifacts::read_trace(&args.trace)?;
    let traces = spectra::spectral_traces(&trace, args.top)?;
    let selected: Vec<&spectra::SpectralTrace> = traces
        .all()
        .into_iter()
        .filter(|t| wanted.contains(&t.family))
        .collect();
    let out = resolve_out(args.out, "spectra.csv");
    spectra::export_spectra(selected, &out)?;

    let manifest = RunManifest {
        artifact_version: ARTIFACT_VERSION,
        command: argv(),
        config: None,
        resolved_epsilon: None,
        input: None,
        inputs: vec![args.trace.display().to_string()],
        outputs: vec![out.display().to_string()],
        wall_time_seconds: started.elapsed().as_secs_f64(),
        halt_reason: None,
    };
    artifacts::write_json(&artifacts::manifest_path_for(&out), &manifest)?;
    println!("wrote {}", out.display());
    Ok(0)
}

// ---------------------------------------------------------------------------
// sankey
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
struct SankeyArgs {
    /// Trace JSON from `condense`.
    trace: PathBuf,
    /// First iteration of the window.
    #[arg(long, default_value_t = 0)]
    from: usize,
    /// Last iteration of the window [default: the final iteration].
    #[arg(long)]
    to: Option<usize>,
    /// Also write the cluster persistence table to this CSV.
    #[arg(long, value_name = "CSV")]
    persistence_out: Option<PathBuf>,
    /// Weight persistence by bandwidth instead of counting iterations.
    #[arg(long, requires = "persistence_out")]
    weighted_persistence: bool,
    /// Output JSON [default: sankey.json under CONDENSATION_OUT_DIR or `.`].
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_sankey(args: SankeyArgs) -> Result<i32> {
    let started = Instant::now();
    let trace = artifacts::read_trace(&args.trace)?;
    let tree = hierarchy::build_tree(&trace);
    let to = args.to.unwrap_or(tree.final_iteration);
    let doc = hierarchy::sankey_export(&tree, args.from, to)?;

    let out = resolve_out(args.out, "sankey.json");
    artifacts::write_json(&out, &doc)?;
    let mut outputs = vec![out.display().to_string()];
    if let Some(path) = &args.persistence_out {
        let table = if args.weighted_persistence {
            tree.epsilon_weighted_persistence(&trace)
        } else {
            tree.persistence_table()
        };
        hierarchy::write_persistence_csv(&table, path)?;
        outputs.push(path.display().to_string());
    }

    let manifest = RunManifest {
        artifact_version: ARTIFACT_VERSION,
        command: argv(),
        config: None,
        resolved_epsilon: None,
        input: None,
        inputs: vec![args.trace.display().to_string()],
        outputs,
        wall_time_seconds: started.elapsed().as_secs_f64(),
        halt_reason: None,
    };
    artifacts::write_json(&artifacts::manifest_path_for(&out), &manifest)?;
    println!("wrote {} (iterations {}..={})", out.display(), args.from, to);
    Ok(0)
}

// ---------------------------------------------------------------------------
// velocity
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
struct VelocityArgs {
    /// Trace JSON from `condense`.
    trace: PathBuf,
    /// Snapshot iteration at which to evaluate the arrows.
    #[arg(long, default_value_t = 0)]
    iteration: usize,
    /// Output CSV [default: velocity.csv under CONDENSATION_OUT_DIR or `.`];
    /// one row per point, position columns x0.. then arrow columns v0..
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_velocity(args: VelocityArgs) -> Result<i32> {
    let started = Instant::now();
    let trace = artifacts::read_trace(&args.trace)?;
    let t = args.iteration;
    let x = trace.snapshot(t).ok_or_else(|| {
        Error::InvalidParameter(format!(
            "no snapshot at iteration {t}: the trace covers 0..={} at stride {}",
            trace.final_iteration(),
            trace.config.snapshot_stride
        ))
    })?;

    let d = operators::pairwise_distances(x)?;
    let a = operators::gaussian_affinity(&d, trace.operator_epsilon(t))?;
    let p = operators::markov_normalize(&a, OperatorKind::Anisotropic);
    let v = operators::velocity_field(&p, x)?;

    let m = x.ncols();
    let table = ndarray::concatenate(Axis(1), &[x.view(), v.view()])
        .expect("positions and arrows share a shape");
    let header: Vec<String> = (0..m)
        .map(|j| format!("x{j}"))
        .chain((0..m).map(|j| format!("v{j}")))
        .collect();
    let out = resolve_out(args.out, "velocity.csv");
    io::write_matrix(&out, &table.view(), Some(&header))?;

    let manifest = RunManifest {
        artifact_version: ARTIFACT_VERSION,
        command: argv(),
        config: None,
        resolved_epsilon: None,
        input: None,
        inputs: vec![args.trace.display().to_string()],
        outputs: vec![out.display().to_string()],
        wall_time_seconds: started.elapsed().as_secs_f64(),
        halt_reason: None,
    };
    artifacts::write_json(&artifacts::manifest_path_for(&out), &manifest)?;
    println!("wrote {} (iteration {t})", out.display());
    Ok(0)
}

// ---------------------------------------------------------------------------
// embed-graph
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
struct EmbedGraphArgs {
    /// Adjacency CSV; a header row and/or leading name column is detected.
    adjacency: PathBuf,
    /// Embedding dimension.
    #[arg(long, default_value_t = 2)]
    dims: usize,
    /// Use the graph-Laplacian basis instead of scaled adjacency eigenvectors.
    #[arg(long)]
    laplacian: bool,
    /// Output CSV [default: embedding.csv under CONDENSATION_OUT_DIR or `.`].
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_embed_graph(args: EmbedGraphArgs) -> Result<i32> {
    let started = Instant::now();
    let adj = graph::load_adjacency(&args.adjacency)?;
    let basis = if args.laplacian {
        EmbeddingBasis::Laplacian
    } else {
        EmbeddingBasis::Adjacency
    };
    let coords = graph::spectral_coordinates_with(&adj, args.dims, basis)?;

    let out = resolve_out(args.out, "embedding.csv");
    io::write_matrix(&out, &coords.view(), None)?;

    let manifest = RunManifest {
        artifact_version: ARTIFACT_VERSION,
        command: argv(),
        config: None,
        resolved_epsilon: None,
        input: None,
        inputs: vec![args.adjacency.display().to_string()],
        outputs: vec![out.display().to_string()],
        wall_time_seconds: started.elapsed().as_secs_f64(),
        halt_reason: None,
    };
    artifacts::write_json(&artifacts::manifest_path_for(&out), &manifest)?;
    println!(
        "wrote {} ({} nodes x {} dims)",
        out.display(),
        coords.nrows(),
        coords.ncols()
    );
    Ok(0)
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
struct CompareArgs {
    /// Input CSV, one point per row.
    input: PathBuf,
    /// Treat the first row as a header.
    #[arg(long)]
    has_header: bool,
    /// 0-based input column holding ground-truth labels.
    #[arg(long, value_name = "COL", conflicts_with = "labels")]
    label_column: Option<usize>,
    /// Ground-truth labels file, one integer per row.
    #[arg(long, value_name = "CSV")]
    labels: Option<PathBuf>,
    /// Initial bandwidth for the condensation run.
    #[arg(long, value_parser = parse_epsilon, default_value = "auto")]
    epsilon: EpsilonSpec,
    /// Seed for the randomized baselines.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output JSON [default: comparison.json under CONDENSATION_OUT_DIR or `.`].
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_compare(args: CompareArgs) -> Result<i32> {
    let started = Instant::now();
    let mut inputs = vec![args.input.display().to_string()];
    let mut ds = datasets::load_csv(&args.input, args.has_header, args.label_column)?;
    if let Some(path) = &args.labels {
        inputs.push(path.display().to_string());
        let labels = io::read_label_column(path)?;
        if labels.len() != ds.n_points() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} points",
                labels.len(),
                ds.n_points()
            )));
        }
        ds.labels = Some(labels);
    }

    let cfg = CondensationConfig {
        epsilon0: args.epsilon,
        ..CondensationConfig::default()
    };
    let report = baselines::compare(&ds, &cfg, args.seed)?;
    let out = resolve_out(args.out, "comparison.json");
    artifacts::write_json(&out, &report)?;

    let resolved_epsilon = match cfg.epsilon0 {
        EpsilonSpec::Fixed(v) => v,
        EpsilonSpec::Auto => engine::auto_epsilon(&ds.data)?,
    };
    let manifest = RunManifest {
        artifact_version: ARTIFACT_VERSION,
        command: argv(),
        config: Some(cfg),
        resolved_epsilon: Some(resolved_epsilon),
        input: Some(DataInput {
            path: args.input.display().to_string(),
            has_header: args.has_header,
            label_column: args.label_column,
        }),
        inputs,
        outputs: vec![out.display().to_string()],
        wall_time_seconds: started.elapsed().as_secs_f64(),
        halt_reason: None,
    };
    artifacts::write_json(&artifacts::manifest_path_for(&out), &manifest)?;
    println!(
        "wrote {} ({} methods, k = {})",
        out.display(),
        report.entries.len(),
        report.baseline_k
    );
    Ok(0)
}
