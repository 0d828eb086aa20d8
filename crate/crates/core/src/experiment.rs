//! Experiment harness: generate → project → build graph → spectral step → evaluate,
//! swept over target dimensions, projection kinds, and algorithms.
//!
//! Seeds: repetition `r` uses data seed `derive(master, [r])`; the projector of
//! cell `(r, p, kind)` uses `derive(master, [r, p, kind])`. Sweep rows are
//! ordered by `(p, algorithm, projection, seed)`.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::adjacency::Adjacency;
use crate::error::{Error, Result};
use crate::metrics::{self, TheoremReport};
use crate::project::{make_projector, ProjectionKind, Projector, ProjectorCalibration};
use crate::seed;
use crate::spectral::{self, ClusteringResult};
use crate::ssc::{self, SscConfig};
use crate::synth::{self, DataSet, UnionModel};
use crate::tsc::{self, TscConfig};

const BASES_STREAM: u64 = 0xBA5E;
const SPECTRAL_STREAM: u64 = 0x5EC7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Ssc,
    Tsc,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ssc => "ssc",
            Self::Tsc => "tsc",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ssc" => Ok(Self::Ssc),
            "tsc" => Ok(Self::Tsc),
            other => Err(Error::InvalidInput(format!("unknown algorithm '{other}'"))),
        }
    }
}

/// Union-of-subspaces model description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelSpec {
    pub m: usize,
    pub dims: Vec<usize>,
    pub counts: Vec<usize>,
    /// Shared intersection dimension `t`; `None` draws independent Haar subspaces.
    pub intersection: Option<usize>,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self { m: 100, dims: vec![5, 5], counts: vec![50, 50], intersection: None }
    }
}

impl ModelSpec {
    /// Build the model; the subspaces are drawn from a child stream of `seed`.
    pub fn build(&self, seed: u64) -> Result<UnionModel> {
        if self.dims.len() != self.counts.len() || self.dims.is_empty() {
            return Err(Error::InvalidInput(format!(
                "{} subspace dimensions vs {} point counts",
                self.dims.len(),
                self.counts.len()
            )));
        }
        let bases_seed = seed::derive(seed, &[BASES_STREAM]);
        let bases = match self.intersection {
            Some(t) => synth::shared_intersection_family(self.m, &self.dims, t, bases_seed)?,
            None => self
                .dims
                .iter()
                .enumerate()
                .map(|(l, &d)| synth::random_orthonormal_basis(self.m, d, seed::derive(bases_seed, &[l as u64])))
                .collect::<Result<_>>()?,
        };
        UnionModel::new(bases, self.counts.clone(), seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub projections: Vec<ProjectionKind>,
    /// Target dimensions; `0` means no projection.
    pub p_values: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    pub tsc: TscConfig,
    pub ssc: SscConfig,
    pub repetitions: usize,
    /// Fixed number of clusters; `None` uses the eigengap estimate.
    pub clusters: Option<usize>,
    pub l_max: usize,
    pub seed: u64,
    pub tau: f64,
    pub c_tilde: f64,
    pub output: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: ModelSpec::default(),
            projections: vec![ProjectionKind::Gaussian, ProjectionKind::FourierSign],
            p_values: vec![0, 10, 20, 40],
            algorithms: vec![Algorithm::Ssc, Algorithm::Tsc],
            tsc: TscConfig::default(),
            ssc: SscConfig::default(),
            repetitions: 1,
            clusters: None,
            l_max: spectral::DEFAULT_L_MAX,
            seed: 0,
            tau: metrics::theorem::DEFAULT_TAU,
            c_tilde: ProjectorCalibration::DEFAULT_C_TILDE,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::InvalidInput("repetitions must be at least 1".into()));
        }
        if self.projections.is_empty() || self.p_values.is_empty() || self.algorithms.is_empty() {
            return Err(Error::InvalidInput("projections, p_values and algorithms must be non-empty".into()));
        }
        if let Some(&p) = self.p_values.iter().find(|&&p| p > self.model.m) {
            return Err(Error::Dimension(format!("p = {p} exceeds ambient dimension {}", self.model.m)));
        }
        self.ssc.validate()?;
        ProjectorCalibration::new(self.c_tilde)?;
        self.model.build(self.seed).map(|_| ())
    }

    pub fn data_seed(&self, rep: usize) -> u64 {
        seed::derive(self.seed, &[rep as u64])
    }

    pub fn projector_seed(&self, rep: usize, p: usize, kind: ProjectionKind) -> u64 {
        seed::derive(self.seed, &[rep as u64, p as u64, kind.stream_id()])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineParams {
    pub algorithm: Algorithm,
    pub tsc: TscConfig,
    pub ssc: SscConfig,
    pub clusters: Option<usize>,
    pub l_max: usize,
    pub seed: u64,
}

impl PipelineParams {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            tsc: TscConfig::default(),
            ssc: SscConfig::default(),
            clusters: None,
            l_max: spectral::DEFAULT_L_MAX,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Timings {
    pub project_ms: f64,
    pub adjacency_ms: f64,
    pub spectral_ms: f64,
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub adjacency: Adjacency,
    pub clustering: ClusteringResult,
    pub timings: Timings,
    pub warnings: Vec<String>,
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

pub fn build_adjacency(data: &DataSet, params: &PipelineParams) -> Result<(Adjacency, Vec<String>)> {
    match params.algorithm {
        Algorithm::Tsc => Ok((tsc::tsc_adjacency(data, &params.tsc)?, Vec::new())),
        Algorithm::Ssc => {
            let (adj, sol) = ssc::ssc_adjacency_with_report(data, &params.ssc)?;
            Ok((adj, sol.warnings()))
        }
    }
}

/// Project (if a projector is given), build the graph, and run spectral clustering.
pub fn run_pipeline(data: &DataSet, projector: Option<&Projector>, params: &PipelineParams) -> Result<PipelineOutcome> {
    let mut timings = Timings::default();
    let projected;
    let input = match projector {
        Some(proj) => {
            let t = Instant::now();
            projected = proj.apply(data)?;
            timings.project_ms = ms_since(t);
            &projected
        }
        None => data,
    };
    let t = Instant::now();
    let (adjacency, warnings) = build_adjacency(input, params)?;
    timings.adjacency_ms = ms_since(t);
    let t = Instant::now();
    let clustering = spectral::cluster_auto(&adjacency, params.clusters, params.l_max, params.seed)?;
    timings.spectral_ms = ms_since(t);
    Ok(PipelineOutcome { adjacency, clustering, timings, warnings })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub p: usize,
    pub algorithm: Algorithm,
    pub projection: ProjectionKind,
    pub seed: u64,
    pub ce: f64,
    pub false_connections: usize,
    pub l_hat: usize,
    pub timings: Timings,
    pub error: Option<String>,
}

pub const SWEEP_HEADER: &str =
    "p,algorithm,projection,seed,ce,false_connections,L_hat,time_project_ms,time_adjacency_ms,time_spectral_ms,error";

impl SweepRow {
    pub fn csv_line(&self) -> String {
        let num = |v: f64| if self.error.is_some() { String::new() } else { format!("{v:.6}") };
        let int = |v: usize| if self.error.is_some() { String::new() } else { v.to_string() };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.p,
            self.algorithm,
            self.projection,
            self.seed,
            if self.error.is_some() { String::new() } else { format!("{:.16e}", self.ce) },
            int(self.false_connections),
            int(self.l_hat),
            num(self.timings.project_ms),
            num(self.timings.adjacency_ms),
            num(self.timings.spectral_ms),
            self.error.as_deref().unwrap_or("").replace([',', '\n'], ";")
        )
    }
}

fn run_cell(
    cfg: &ExperimentConfig,
    data: &DataSet,
    rep: usize,
    p: usize,
    algorithm: Algorithm,
    kind: ProjectionKind,
) -> Result<SweepRow> {
    let proj_seed = cfg.projector_seed(rep, p, kind);
    let projector = if p == 0 { None } else { Some(make_projector(kind, cfg.model.m, p, proj_seed)?) };
    let params = PipelineParams {
        algorithm,
        tsc: cfg.tsc,
        ssc: cfg.ssc,
        clusters: cfg.clusters,
        l_max: cfg.l_max,
        seed: seed::derive(proj_seed, &[SPECTRAL_STREAM]),
    };
    let out = run_pipeline(data, projector.as_ref(), &params)?;
    let truth = data.labels().ok_or_else(|| Error::InvalidInput("sweep data has no labels".into()))?;
    Ok(SweepRow {
        p,
        algorithm,
        projection: kind,
        seed: cfg.data_seed(rep),
        ce: metrics::clustering_error(&out.clustering.labels, truth)?,
        false_connections: metrics::false_connections(&out.adjacency, truth)?.count,
        l_hat: out.clustering.l_hat,
        timings: out.timings,
        error: None,
    })
}

/// Run every `(repetition, p, algorithm, projection)` cell. Failures of single
/// cells are recorded in the row's `error` field and the sweep continues.
pub fn sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for rep in 0..cfg.repetitions {
        let data_seed = cfg.data_seed(rep);
        let data = synth::generate(&cfg.model.build(data_seed)?);
        for &p in &cfg.p_values {
            for &algorithm in &cfg.algorithms {
                for &kind in &cfg.projections {
                    let row = run_cell(cfg, &data, rep, p, algorithm, kind).unwrap_or_else(|e| SweepRow {
                        p,
                        algorithm,
                        projection: kind,
                        seed: data_seed,
                        ce: f64::NAN,
                        false_connections: 0,
                        l_hat: 0,
                        timings: Timings::default(),
                        error: Some(e.to_string()),
                    });
                    rows.push(row);
                }
            }
        }
    }
    rows.sort_by(|a, b| {
        (a.p, a.algorithm, a.projection, a.seed).cmp(&(b.p, b.algorithm, b.projection, b.seed))
    });
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv_line());
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub p: usize,
    pub algorithm: Algorithm,
    pub projection: ProjectionKind,
    pub runs: usize,
    pub failures: usize,
    pub ce_mean: f64,
    pub ce_std: f64,
    pub false_connections_mean: f64,
    pub l_hat_mean: f64,
    pub time_project_ms_mean: f64,
    pub time_adjacency_ms_mean: f64,
    pub time_spectral_ms_mean: f64,
}

pub const SUMMARY_HEADER: &str = "p,algorithm,projection,runs,failures,ce_mean,ce_std,false_connections_mean,L_hat_mean,time_project_ms_mean,time_adjacency_ms_mean,time_spectral_ms_mean";

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        f64::NAN
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Mean and (population) standard deviation per `(p, algorithm, projection)` cell.
pub fn summarize(rows: &[SweepRow]) -> Vec<SummaryRow> {
    let mut cells: BTreeMap<(usize, Algorithm, ProjectionKind), Vec<&SweepRow>> = BTreeMap::new();
    for r in rows {
        cells.entry((r.p, r.algorithm, r.projection)).or_default().push(r);
    }
    cells
        .into_iter()
        .map(|((p, algorithm, projection), rs)| {
            let ok: Vec<&&SweepRow> = rs.iter().filter(|r| r.error.is_none()).collect();
            let col = |f: &dyn Fn(&SweepRow) -> f64| ok.iter().map(|r| f(r)).collect::<Vec<f64>>();
            let ce = col(&|r| r.ce);
            let ce_mean = mean(&ce);
            let ce_std = if ce.is_empty() {
                f64::NAN
            } else {
                (ce.iter().map(|v| (v - ce_mean).powi(2)).sum::<f64>() / ce.len() as f64).sqrt()
            };
            SummaryRow {
                p,
                algorithm,
                projection,
                runs: rs.len(),
                failures: rs.len() - ok.len(),
                ce_mean,
                ce_std,
                false_connections_mean: mean(&col(&|r| r.false_connections as f64)),
                l_hat_mean: mean(&col(&|r| r.l_hat as f64)),
                time_project_ms_mean: mean(&col(&|r| r.timings.project_ms)),
                time_adjacency_ms_mean: mean(&col(&|r| r.timings.adjacency_ms)),
                time_spectral_ms_mean: mean(&col(&|r| r.timings.spectral_ms)),
            }
        })
        .collect()
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut s = String::from(SUMMARY_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            r.p,
            r.algorithm,
            r.projection,
            r.runs,
            r.failures,
            r.ce_mean,
            r.ce_std,
            r.false_connections_mean,
            r.l_hat_mean,
            r.time_project_ms_mean,
            r.time_adjacency_ms_mean,
            r.time_spectral_ms_mean
        );
    }
    s
}

/// Condition report per target dimension, for the model drawn from repetition 0
/// and the first configured projection kind. `p = 0` evaluates the identity map.
pub fn check(cfg: &ExperimentConfig) -> Result<Vec<TheoremReport>> {
    cfg.validate()?;
    let model = cfg.model.build(cfg.data_seed(0))?;
    let cal = ProjectorCalibration::new(cfg.c_tilde)?;
    let kind = cfg.projections[0];
    cfg.p_values
        .iter()
        .map(|&p| {
            let proj = if p == 0 {
                Projector::identity(cfg.model.m)?
            } else {
                make_projector(kind, cfg.model.m, p, cfg.projector_seed(0, p, kind))?
            };
            metrics::theorem_report(&model, &proj, &cal, cfg.tau, cfg.tsc.q)
        })
        .collect()
}

pub fn check_csv(reports: &[TheoremReport]) -> String {
    let mut s = String::from(TheoremReport::CSV_HEADER);
    s.push('\n');
    for r in reports {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}
