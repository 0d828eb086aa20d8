//! `rpsc`: generate, cluster, sweep, check and ingest.
//!
//! On failure a single line `error code=<code> message=<text>` goes to stderr
//! and the process exits with status 2.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rpsc::experiment::{self, Algorithm, ExperimentConfig, PipelineParams};
use rpsc::ssc::SscMode;
use rpsc::{io, make_projector, metrics, synth, ProjectionKind};

#[derive(Debug)]
enum CliError {
    Core(rpsc::Error),
    Config(String),
}

impl From<rpsc::Error> for CliError {
    fn from(e: rpsc::Error) -> Self {
        Self::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Core(rpsc::Error::Io(e))
    }
}

impl CliError {
    fn line(&self) -> String {
        let (code, msg) = match self {
            Self::Core(e) => (e.code(), e.to_string()),
            Self::Config(m) => ("config", m.clone()),
        };
        format!("error code={code} message={}", msg.replace('\n', " "))
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(name = "rpsc", version, about = "Subspace clustering (SSC, TSC) on randomly projected data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a union-of-subspaces data set and write data and label CSVs.
    Gen(GenArgs),
    /// Cluster a data file, optionally after projecting it.
    Cluster(ClusterArgs),
    /// Run the full grid of (p, algorithm, projection, repetition) cells.
    Sweep(SweepArgs),
    /// Evaluate the no-false-connection conditions for each p.
    Check(ConfigArgs),
    /// Validate an external data matrix and print a summary.
    Ingest(IngestArgs),
}

/// Experiment settings; each flag overrides the matching field of `--config`.
#[derive(Args, Debug, Default)]
struct ConfigArgs {
    /// TOML file with an experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Ambient dimension.
    #[arg(long)]
    m: Option<usize>,
    /// Subspace dimensions, comma separated.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    /// Points per subspace, comma separated.
    #[arg(long, value_delimiter = ',')]
    counts: Option<Vec<usize>>,
    /// Number of subspaces; use with --dim and --points instead of the lists.
    #[arg(long)]
    subspaces: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    points: Option<usize>,
    /// Dimension of the intersection shared by all subspaces.
    #[arg(long)]
    intersection: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    projections: Option<Vec<ProjectionKind>>,
    /// Target dimensions, comma separated; 0 means no projection.
    #[arg(long = "p-values", value_delimiter = ',')]
    p_values: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<Algorithm>>,
    /// TSC neighbourhood size.
    #[arg(long)]
    q: Option<usize>,
    #[arg(long = "ssc-mode")]
    ssc_mode: Option<SscMode>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    repetitions: Option<usize>,
    /// Fixed number of clusters instead of the eigengap estimate.
    #[arg(long)]
    clusters: Option<usize>,
    #[arg(long = "l-max")]
    l_max: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long = "c-tilde")]
    c_tilde: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

impl ConfigArgs {
    fn resolve(&self) -> CliResult<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)?;
                toml::from_str::<ExperimentConfig>(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.m {
            cfg.model.m = v;
        }
        if self.subspaces.is_some() || self.dim.is_some() || self.points.is_some() {
            let l = self.subspaces.unwrap_or(cfg.model.dims.len());
            let d = self.dim.or(cfg.model.dims.first().copied()).unwrap_or(1);
            let n = self.points.or(cfg.model.counts.first().copied()).unwrap_or(1);
            cfg.model.dims = vec![d; l];
            cfg.model.counts = vec![n; l];
        }
        if let Some(v) = &self.dims {
            cfg.model.dims = v.clone();
        }
        if let Some(v) = &self.counts {
            cfg.model.counts = v.clone();
        }
        if self.intersection.is_some() {
            cfg.model.intersection = self.intersection;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.projections {
            cfg.projections = v.clone();
        }
        if let Some(v) = &self.p_values {
            cfg.p_values = v.clone();
        }
        if let Some(v) = &self.algorithms {
            cfg.algorithms = v.clone();
        }
        if let Some(v) = self.q {
            cfg.tsc.q = v;
        }
        if let Some(v) = self.ssc_mode {
            cfg.ssc.mode = v;
        }
        if let Some(v) = self.alpha {
            cfg.ssc.alpha = v;
        }
        if let Some(v) = self.repetitions {
            cfg.repetitions = v;
        }
        if self.clusters.is_some() {
            cfg.clusters = self.clusters;
        }
        if let Some(v) = self.l_max {
            cfg.l_max = v;
        }
        if let Some(v) = self.tau {
            cfg.tau = v;
        }
        if let Some(v) = self.c_tilde {
            cfg.c_tilde = v;
        }
        if let Some(v) = &self.output {
            cfg.output = Some(v.display().to_string());
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Data CSV (one point per row).
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    labels: PathBuf,
}

#[derive(Args)]
struct ClusterArgs {
    #[arg(long)]
    data: PathBuf,
    /// Ground-truth labels; enables the clustering error column.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long, default_value = "tsc")]
    algorithm: Algorithm,
    #[arg(long, default_value = "gaussian")]
    projection: ProjectionKind,
    /// Target dimension; 0 clusters the data as given.
    #[arg(long, default_value_t = 0)]
    p: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    clusters: Option<usize>,
    #[arg(long = "l-max", default_value_t = rpsc::spectral::DEFAULT_L_MAX)]
    l_max: usize,
    #[arg(long, default_value_t = rpsc::tsc::DEFAULT_Q)]
    q: usize,
    #[arg(long = "ssc-mode", default_value = "lasso_admm")]
    ssc_mode: SscMode,
    /// Predicted labels are written here.
    #[arg(long)]
    labels: PathBuf,
    /// Timing CSV; stdout when absent.
    #[arg(long)]
    timing: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Per-cell mean/std CSV; defaults to `<output stem>.summary.csv`.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Rescale every column to unit Euclidean norm.
    #[arg(long)]
    normalize: bool,
    /// Write the (possibly normalized) data here.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_gen(args: &GenArgs) -> CliResult<()> {
    let cfg = args.cfg.resolve()?;
    let model = cfg.model.build(cfg.data_seed(0))?;
    let data = synth::generate(&model);
    io::write_dataset(&data, &args.data, Some(&args.labels))?;
    println!("m = {}", model.ambient_dim());
    println!("L = {}", model.num_subspaces());
    println!("dims = {:?}", model.bases().iter().map(|b| b.dim()).collect::<Vec<_>>());
    println!("counts = {:?}", model.counts());
    println!("N = {}", model.num_points());
    println!("rho_min = {:.6}", model.rho_min());
    let bases = model.bases();
    for k in 0..bases.len() {
        for l in k + 1..bases.len() {
            println!("aff({k},{l}) = {:.6}", synth::affinity(&bases[k], &bases[l])?);
        }
    }
    Ok(())
}

fn cmd_cluster(args: &ClusterArgs) -> CliResult<()> {
    let data = io::read_dataset(&args.data, args.truth.as_deref())?;
    let projector = if args.p == 0 { None } else { Some(make_projector(args.projection, data.dim(), args.p, args.seed)?) };
    let mut params = PipelineParams::new(args.algorithm);
    params.tsc.q = args.q;
    params.ssc.mode = args.ssc_mode;
    params.clusters = args.clusters;
    params.l_max = args.l_max;
    params.seed = args.seed;
    let out = experiment::run_pipeline(&data, projector.as_ref(), &params)?;
    if !out.warnings.is_empty() {
        eprintln!("warning: {} column(s) flagged by the SSC solver", out.warnings.len());
        for w in out.warnings.iter().take(3) {
            eprintln!("warning: {w}");
        }
    }
    fs::write(&args.labels, io::labels_to_csv(&out.clustering.labels))?;
    let ce = match data.labels() {
        Some(t) => format!("{:.16e}", metrics::clustering_error(&out.clustering.labels, t)?),
        None => String::new(),
    };
    let t = out.timings;
    let text = format!(
        "p,algorithm,projection,seed,L_hat,ce,time_project_ms,time_adjacency_ms,time_spectral_ms\n{},{},{},{},{},{},{:.6},{:.6},{:.6}\n",
        args.p, args.algorithm, args.projection, args.seed, out.clustering.l_hat, ce, t.project_ms, t.adjacency_ms, t.spectral_ms
    );
    emit(args.timing.as_deref(), &text)
}

fn summary_path(output: &Path) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "sweep".into());
    output.with_file_name(format!("{stem}.summary.csv"))
}

fn cmd_sweep(args: &SweepArgs) -> CliResult<()> {
    let cfg = args.cfg.resolve()?;
    let rows = experiment::sweep(&cfg)?;
    let output = cfg.output.as_ref().map(PathBuf::from);
    emit(output.as_deref(), &experiment::sweep_csv(&rows))?;
    let summary = experiment::summary_csv(&experiment::summarize(&rows));
    match (&args.summary, &output) {
        (Some(p), _) => fs::write(p, summary)?,
        (None, Some(o)) => fs::write(summary_path(o), summary)?,
        (None, None) => {}
    }
    for r in rows.iter().filter(|r| r.error.is_some()) {
        eprintln!("warning: cell p={} {} {} seed={} failed", r.p, r.algorithm, r.projection, r.seed);
    }
    Ok(())
}

fn cmd_check(args: &ConfigArgs) -> CliResult<()> {
    let cfg = args.resolve()?;
    let reports = experiment::check(&cfg)?;
    emit(cfg.output.as_ref().map(Path::new), &experiment::check_csv(&reports))
}

fn cmd_ingest(args: &IngestArgs) -> CliResult<()> {
    let mut data = io::read_dataset(&args.data, args.labels.as_deref())?;
    if args.normalize {
        data = data.normalized()?;
    }
    println!("N = {}", data.len());
    println!("D = {}", data.dim());
    if let Some(j) = data.first_zero_column() {
        println!("zero column = {j}");
    }
    if let Some(labels) = data.labels() {
        let mut hist = BTreeMap::new();
        for &l in labels {
            *hist.entry(l).or_insert(0usize) += 1;
        }
        for (l, c) in hist {
            println!("label {l} = {c}");
        }
    }
    if let Some(out) = &args.output {
        fs::write(out, io::points_to_csv(data.points()))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Cluster(a) => cmd_cluster(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Check(a) => cmd_check(a),
        Command::Ingest(a) => cmd_ingest(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::from(2)
        }
    }
}
