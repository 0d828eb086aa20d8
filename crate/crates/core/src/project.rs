//! Random projections with the Johnson–Lindenstrauss property.
//!
//! Three realizations of `Φ ∈ R^{p×m}` are provided:
//!
//! * `gaussian`: dense i.i.d. `N(0, 1/p)` entries, applied in `O(mp)` per point.
//! * `fourier_sign`: real part of `√(m/p) · F_S · D`, where `F_S` holds `p`
//!   uniformly chosen rows of the unitary `m`-point DFT and `D` is a random
//!   ±1 diagonal. Applied with one FFT per point, `O(m log m)` regardless of `p`.
//! * `hadamard_sign`: `√(m'/p) · H_S · D` with `H` the orthonormal Walsh–Hadamard
//!   matrix of size `m' = 2^⌈log₂ m⌉`; inputs are zero-padded to `m'`.
//!
//! With these scalings every entry of `Φ` has magnitude at most `1/√p`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::synth::DataSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionKind {
    Gaussian,
    FourierSign,
    HadamardSign,
}

impl ProjectionKind {
    pub const ALL: [ProjectionKind; 3] = [Self::Gaussian, Self::FourierSign, Self::HadamardSign];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::FourierSign => "fourier_sign",
            Self::HadamardSign => "hadamard_sign",
        }
    }

    /// Stream identifier used when deriving per-kind seeds.
    pub fn stream_id(self) -> u64 {
        match self {
            Self::Gaussian => 0,
            Self::FourierSign => 1,
            Self::HadamardSign => 2,
        }
    }
}

impl fmt::Display for ProjectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProjectionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" | "grp" => Ok(Self::Gaussian),
            "fourier_sign" | "fourier" | "frp" => Ok(Self::FourierSign),
            "hadamard_sign" | "hadamard" => Ok(Self::HadamardSign),
            other => Err(Error::InvalidInput(format!("unknown projection kind '{other}'"))),
        }
    }
}

/// Serializable description of a projector realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectorSpec {
    pub kind: ProjectionKind,
    pub m: usize,
    pub p: usize,
    pub seed: u64,
    pub scale: f64,
}

impl ProjectorSpec {
    /// `kind=...,m=...,p=...,seed=...,scale=...`
    pub fn to_record(&self) -> String {
        format!(
            "kind={},m={},p={},seed={},scale={:.16e}",
            self.kind, self.m, self.p, self.seed, self.scale
        )
    }

    pub fn from_record(s: &str) -> Result<Self> {
        let mut kind = None;
        let (mut m, mut p, mut seed, mut scale) = (None, None, None, None);
        for field in s.trim().split(',') {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("malformed projector field '{field}'")))?;
            let value = value.trim();
            let bad = |what: &str| Error::InvalidInput(format!("bad projector {what} '{value}'"));
            match key.trim() {
                "kind" => kind = Some(value.parse()?),
                "m" => m = Some(value.parse().map_err(|_| bad("m"))?),
                "p" => p = Some(value.parse().map_err(|_| bad("p"))?),
                "seed" => seed = Some(value.parse().map_err(|_| bad("seed"))?),
                "scale" => scale = Some(value.parse().map_err(|_| bad("scale"))?),
                other => return Err(Error::InvalidInput(format!("unknown projector field '{other}'"))),
            }
        }
        let missing = |f: &str| Error::InvalidInput(format!("projector record missing '{f}'"));
        Ok(Self {
            kind: kind.ok_or_else(|| missing("kind"))?,
            m: m.ok_or_else(|| missing("m"))?,
            p: p.ok_or_else(|| missing("p"))?,
            seed: seed.ok_or_else(|| missing("seed"))?,
            scale: scale.ok_or_else(|| missing("scale"))?,
        })
    }
}

/// Concentration constant `c̃` of the JL tail bound `P(|‖Φx‖² − ‖x‖²| ≥ t‖x‖²) ≤ 2 exp(−c̃ t² p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectorCalibration {
    pub c_tilde: f64,
}

impl ProjectorCalibration {
    pub const DEFAULT_C_TILDE: f64 = 0.25;

    pub fn new(c_tilde: f64) -> Result<Self> {
        if !(c_tilde > 0.0 && c_tilde.is_finite()) {
            return Err(Error::InvalidInput(format!("c_tilde must be positive, got {c_tilde}")));
        }
        Ok(Self { c_tilde })
    }
}

impl Default for ProjectorCalibration {
    fn default() -> Self {
        Self { c_tilde: Self::DEFAULT_C_TILDE }
    }
}

#[derive(Debug, Clone)]
enum Operator {
    Dense(DMatrix<f64>),
    Fourier { rows: Vec<usize>, signs: Vec<f64> },
    Hadamard { padded: usize, rows: Vec<usize>, signs: Vec<f64> },
}

/// A seeded realization of a random projection `R^m → R^p`.
#[derive(Debug, Clone)]
pub struct Projector {
    spec: ProjectorSpec,
    op: Operator,
}

/// Sample `count` distinct indices from `0..n` by a partial Fisher–Yates shuffle.
fn sample_rows(n: usize, count: usize, rng: &mut seed::Rng) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..count {
        let j = rng.random_range(i..n);
        idx.swap(i, j);
    }
    let mut rows = idx[..count].to_vec();
    rows.sort_unstable();
    rows
}

fn random_signs(n: usize, rng: &mut seed::Rng) -> Vec<f64> {
    (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect()
}

/// Build a projector. Deterministic given `(kind, m, p, seed)`.
pub fn make_projector(kind: ProjectionKind, m: usize, p: usize, seed: u64) -> Result<Projector> {
    if m == 0 || p == 0 {
        return Err(Error::Dimension("projection dimensions must be positive".into()));
    }
    if p > m {
        return Err(Error::Dimension(format!("target dimension {p} exceeds source dimension {m}")));
    }
    let mut rng = seed::rng(seed);
    let pf = p as f64;
    let (op, scale) = match kind {
        ProjectionKind::Gaussian => {
            let sd = 1.0 / pf.sqrt();
            let phi = DMatrix::from_fn(p, m, |_, _| sd * { let g: f64 = StandardNormal.sample(&mut rng); g });
            (Operator::Dense(phi), sd)
        }
        ProjectionKind::FourierSign => {
            let signs = random_signs(m, &mut rng);
            let rows = sample_rows(m, p, &mut rng);
            (Operator::Fourier { rows, signs }, (m as f64 / pf).sqrt())
        }
        ProjectionKind::HadamardSign => {
            let padded = m.next_power_of_two();
            let signs = random_signs(m, &mut rng);
            let rows = sample_rows(padded, p, &mut rng);
            (Operator::Hadamard { padded, rows, signs }, (padded as f64 / pf).sqrt())
        }
    };
    Ok(Projector { spec: ProjectorSpec { kind, m, p, seed, scale }, op })
}

/// In-place unnormalized fast Walsh–Hadamard transform; `x.len()` must be a power of two.
pub fn fwht(x: &mut [f64]) {
    let n = x.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in x.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, v) = (*a, *b);
                *a = u + v;
                *b = u - v;
            }
        }
        h *= 2;
    }
}

impl Projector {
    pub fn spec(&self) -> &ProjectorSpec {
        &self.spec
    }

    pub fn kind(&self) -> ProjectionKind {
        self.spec.kind
    }

    pub fn source_dim(&self) -> usize {
        self.spec.m
    }

    pub fn target_dim(&self) -> usize {
        self.spec.p
    }

    /// Selected transform rows (structured kinds only).
    pub fn rows(&self) -> Option<&[usize]> {
        match &self.op {
            Operator::Dense(_) => None,
            Operator::Fourier { rows, .. } | Operator::Hadamard { rows, .. } => Some(rows),
        }
    }

    /// Diagonal sign pattern (structured kinds only), length `m`.
    pub fn signs(&self) -> Option<&[f64]> {
        match &self.op {
            Operator::Dense(_) => None,
            Operator::Fourier { signs, .. } | Operator::Hadamard { signs, .. } => Some(signs),
        }
    }

    /// Replace the realization by an explicit `p × m` matrix, keeping the spec.
    /// Intended for tests that need e.g. an identity projection.
    pub fn with_matrix(mut self, matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.shape() != (self.spec.p, self.spec.m) {
            return Err(Error::Dimension(format!(
                "override matrix is {}x{}, expected {}x{}",
                matrix.nrows(),
                matrix.ncols(),
                self.spec.p,
                self.spec.m
            )));
        }
        self.op = Operator::Dense(matrix);
        Ok(self)
    }

    /// Identity map on `R^m`, reported as a gaussian projector with `p = m`.
    pub fn identity(m: usize) -> Result<Self> {
        make_projector(ProjectionKind::Gaussian, m, m, 0)?.with_matrix(DMatrix::identity(m, m))
    }

    /// Apply to every column of `x` (`m × N` → `p × N`).
    pub fn apply_matrix(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let (m, p) = (self.spec.m, self.spec.p);
        if x.nrows() != m {
            return Err(Error::Dimension(format!("data dimension {} does not match projector source dimension {m}", x.nrows())));
        }
        let n = x.ncols();
        let inv_sqrt_p = 1.0 / (p as f64).sqrt();
        match &self.op {
            Operator::Dense(phi) => Ok(phi * x),
            Operator::Fourier { rows, signs } => {
                let fft = FftPlanner::<f64>::new().plan_fft_forward(m);
                let mut buf = vec![Complex::new(0.0, 0.0); m];
                let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
                let mut out = DMatrix::zeros(p, n);
                for j in 0..n {
                    for (i, b) in buf.iter_mut().enumerate() {
                        *b = Complex::new(signs[i] * x[(i, j)], 0.0);
                    }
                    fft.process_with_scratch(&mut buf, &mut scratch);
                    for (k, &r) in rows.iter().enumerate() {
                        out[(k, j)] = buf[r].re * inv_sqrt_p;
                    }
                }
                Ok(out)
            }
            Operator::Hadamard { padded, rows, signs } => {
                let mut buf = vec![0.0; *padded];
                let mut out = DMatrix::zeros(p, n);
                for j in 0..n {
                    buf.iter_mut().for_each(|b| *b = 0.0);
                    for i in 0..m {
                        buf[i] = signs[i] * x[(i, j)];
                    }
                    fwht(&mut buf);
                    for (k, &r) in rows.iter().enumerate() {
                        out[(k, j)] = buf[r] * inv_sqrt_p;
                    }
                }
                Ok(out)
            }
        }
    }

    pub fn apply_vector(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let m = DMatrix::from_column_slice(x.len(), 1, x.as_slice());
        Ok(self.apply_matrix(&m)?.column(0).into_owned())
    }

    /// Project a data set; labels are carried through unchanged.
    pub fn apply(&self, data: &DataSet) -> Result<DataSet> {
        let projected = self.apply_matrix(data.points())?;
        DataSet::new(projected, data.labels().map(<[usize]>::to_vec))
    }

    /// Dense `p × m` matrix of the realization.
    pub fn to_dense(&self) -> DMatrix<f64> {
        match &self.op {
            Operator::Dense(phi) => phi.clone(),
            _ => self
                .apply_matrix(&DMatrix::identity(self.spec.m, self.spec.m))
                .expect("identity has matching dimension"),
        }
    }
}

fn random_unit_vector(m: usize, rng: &mut seed::Rng) -> DVector<f64> {
    loop {
        let v = DVector::<f64>::from_fn(m, |_, _| StandardNormal.sample(rng));
        let n = v.norm();
        if n > 0.0 {
            return v / n;
        }
    }
}

/// Fraction of trials with `|‖Φx‖² − 1| ≥ t` for a random unit `x` and a fresh
/// projector realization per trial.
pub fn jl_distortion_survey(kind: ProjectionKind, m: usize, p: usize, t: f64, trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidInput(format!("distortion threshold must be positive, got {t}")));
    }
    let mut violations = 0usize;
    for trial in 0..trials as u64 {
        let proj = make_projector(kind, m, p, seed::derive(seed, &[trial, 0]))?;
        let mut rng = seed::rng(seed::derive(seed, &[trial, 1]));
        let x = random_unit_vector(m, &mut rng);
        let y = proj.apply_vector(&x)?;
        if (y.norm_squared() - 1.0).abs() >= t {
            violations += 1;
        }
    }
    Ok(violations as f64 / trials as f64)
}

/// Empirical `c̃`: the largest constant for which the surveyed failure rate at
/// every `t` in `thresholds` stays below `2 exp(−c̃ t² p)`. Rates of zero are
/// floored at `1 / trials`, the resolution of the survey.
pub fn calibrate_c_tilde(
    kind: ProjectionKind,
    m: usize,
    p: usize,
    thresholds: &[f64],
    trials: usize,
    seed: u64,
) -> Result<ProjectorCalibration> {
    if thresholds.is_empty() {
        return Err(Error::InvalidInput("at least one threshold is needed".into()));
    }
    let mut c = f64::INFINITY;
    for (i, &t) in thresholds.iter().enumerate() {
        let rate = jl_distortion_survey(kind, m, p, t, trials, seed::derive(seed, &[i as u64]))?;
        let rate = rate.max(1.0 / trials as f64);
        if rate < 2.0 {
            c = c.min((2.0 / rate).ln() / (t * t * p as f64));
        }
    }
    ProjectorCalibration::new(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(m: usize, seed: u64) -> DVector<f64> {
        random_unit_vector(m, &mut seed::rng(seed))
    }

    #[test]
    fn rejects_p_above_m() {
        for kind in ProjectionKind::ALL {
            assert!(matches!(make_projector(kind, 4, 5, 0), Err(Error::Dimension(_))));
        }
    }

    #[test]
    fn full_hadamard_is_isometry() {
        let proj = make_projector(ProjectionKind::HadamardSign, 16, 16, 3).unwrap();
        for s in 0..20 {
            let x = unit(16, s) * (s as f64 + 0.5);
            let y = proj.apply_vector(&x).unwrap();
            assert!((y.norm() - x.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn hadamard_pads_to_power_of_two() {
        let proj = make_projector(ProjectionKind::HadamardSign, 10, 5, 1).unwrap();
        assert!(proj.rows().unwrap().iter().all(|&r| r < 16));
        assert_eq!(proj.signs().unwrap().len(), 10);
        assert!((proj.spec().scale - (16.0f64 / 5.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rows_are_distinct() {
        let proj = make_projector(ProjectionKind::FourierSign, 64, 40, 11).unwrap();
        let rows = proj.rows().unwrap();
        assert_eq!(rows.len(), 40);
        assert!(rows.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn gaussian_mean_square_norm_is_one() {
        let x = unit(120, 5);
        let mean: f64 = (0..1000)
            .map(|s| {
                let proj = make_projector(ProjectionKind::Gaussian, 120, 100, s).unwrap();
                proj.apply_vector(&x).unwrap().norm_squared()
            })
            .sum::<f64>()
            / 1000.0;
        assert!((0.9..=1.1).contains(&mean), "{mean}");
    }

    #[test]
    fn identity_override_passes_data_through() {
        let data = DataSet::new(DMatrix::from_fn(5, 7, |i, j| (i * 7 + j) as f64 - 3.0), Some(vec![0; 7])).unwrap();
        let out = Projector::identity(5).unwrap().apply(&data).unwrap();
        assert_eq!(out, data);
    }

    #[test]
    fn override_checks_shape() {
        let proj = make_projector(ProjectionKind::Gaussian, 5, 3, 0).unwrap();
        assert!(proj.with_matrix(DMatrix::zeros(5, 5)).is_err());
    }

    #[test]
    fn duplicated_columns_map_identically() {
        for kind in ProjectionKind::ALL {
            let proj = make_projector(kind, 12, 6, 2).unwrap();
            let x = unit(12, 1);
            let m = DMatrix::from_columns(&[x.clone(), x]);
            let y = proj.apply_matrix(&m).unwrap();
            assert_eq!(y.column(0), y.column(1));
        }
    }

    #[test]
    fn dimension_mismatch_on_apply() {
        let proj = make_projector(ProjectionKind::FourierSign, 8, 3, 0).unwrap();
        assert!(proj.apply_matrix(&DMatrix::zeros(7, 2)).is_err());
    }

    #[test]
    fn deterministic_realization() {
        for kind in ProjectionKind::ALL {
            let a = make_projector(kind, 20, 7, 99).unwrap().to_dense();
            let b = make_projector(kind, 20, 7, 99).unwrap().to_dense();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn survey_edge_cases() {
        assert_eq!(jl_distortion_survey(ProjectionKind::Gaussian, 64, 32, 10.0, 200, 0).unwrap(), 0.0);
        assert_eq!(jl_distortion_survey(ProjectionKind::HadamardSign, 32, 32, 1e-6, 100, 0).unwrap(), 0.0);
        assert!(jl_distortion_survey(ProjectionKind::Gaussian, 8, 4, 0.5, 0, 0).is_err());
        assert!(jl_distortion_survey(ProjectionKind::Gaussian, 8, 4, 0.0, 10, 0).is_err());
    }

    #[test]
    fn spec_record_round_trip() {
        let spec = *make_projector(ProjectionKind::HadamardSign, 100, 30, 12345).unwrap().spec();
        let back = ProjectorSpec::from_record(&spec.to_record()).unwrap();
        assert_eq!(spec, back);
        assert!(ProjectorSpec::from_record("kind=gaussian,m=3").is_err());
    }

    #[test]
    fn calibration_is_positive() {
        let cal = calibrate_c_tilde(ProjectionKind::Gaussian, 64, 50, &[0.3, 0.5], 300, 1).unwrap();
        assert!(cal.c_tilde > 0.0 && cal.c_tilde.is_finite());
        assert!(ProjectorCalibration::new(0.0).is_err());
    }

    #[test]
    fn fwht_of_delta_is_flat() {
        let mut x = vec![0.0; 8];
        x[0] = 1.0;
        fwht(&mut x);
        assert!(x.iter().all(|&v| v == 1.0));
    }
}
