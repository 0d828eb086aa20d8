//! Sparse subspace clustering: self-representation of every point by the
//! others, followed by `A = |Z| + |Z|ᵀ`.
//!
//! Two solvers are available per column `x_j` with dictionary `X` minus
//! column `j` (so `z_jj = 0` holds exactly):
//!
//! * [`SscMode::ExactL1`]: `min ‖z‖₁ s.t. x_j = X z`, solved as an LP.
//! * [`SscMode::LassoAdmm`]: `min (μ_j/α)‖z‖₁ + ½‖x_j − X z‖²` with
//!   `μ_j = max_{i≠j} |⟨x_i, x_j⟩|`, solved by ADMM.
//!
//! Columns are independent and solved in parallel; results are assembled by
//! column index so the output does not depend on scheduling.

pub mod admm;
pub mod lp;

use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adjacency::Adjacency;
use crate::error::{Error, Result};
use crate::synth::DataSet;

pub use admm::{lasso_admm, lasso_kkt_residual, lasso_objective, AdmmResult, AdmmSettings};
pub use lp::{min_l1_representation, L1Solution, LpError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SscMode {
    ExactL1,
    LassoAdmm,
}

impl FromStr for SscMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact_l1" | "exact" | "l1" => Ok(Self::ExactL1),
            "lasso_admm" | "lasso" | "admm" => Ok(Self::LassoAdmm),
            other => Err(Error::InvalidInput(format!("unknown SSC mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SscConfig {
    pub mode: SscMode,
    /// Lasso weight multiplier: the ℓ1 weight of column `j` is `μ_j / alpha`.
    pub alpha: f64,
    /// ADMM penalty in the data-weighted scaling `‖z‖₁ + (α/2μ_j)‖x_j − Xz‖²`;
    /// the effective penalty on the solved problem is `admm_rho · μ_j / alpha`.
    pub admm_rho: f64,
    pub max_iter: usize,
    pub tol_abs: f64,
    pub tol_rel: f64,
}

impl Default for SscConfig {
    fn default() -> Self {
        Self { mode: SscMode::LassoAdmm, alpha: 20.0, admm_rho: 20.0, max_iter: 200, tol_abs: 1e-6, tol_rel: 1e-6 }
    }
}

impl SscConfig {
    pub fn exact() -> Self {
        Self { mode: SscMode::ExactL1, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.admm_rho > 0.0 && self.tol_abs > 0.0 && self.tol_rel > 0.0) {
            return Err(Error::InvalidInput("alpha, admm_rho and tolerances must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidInput("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-column solver diagnostics.
#[derive(Debug, Clone, Default)]
pub struct ColumnReport {
    /// ADMM iterations or simplex pivots.
    pub iterations: usize,
    pub objective: f64,
    /// ADMM: `‖z − c‖`. Exact mode: `‖X z − x_j‖`.
    pub primal_residual: f64,
    /// ADMM: `ρ‖c − c_prev‖`. Exact mode: duality gap.
    pub dual_residual: f64,
    pub converged: bool,
    /// Exact-mode dual certificate (length = data dimension).
    pub dual: Option<DVector<f64>>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SscSolution {
    /// Column `j` holds `z_j`; the diagonal is exactly zero.
    pub coefficients: DMatrix<f64>,
    pub columns: Vec<ColumnReport>,
}

impl SscSolution {
    /// Columns that hit `max_iter` or failed outright.
    pub fn warnings(&self) -> Vec<String> {
        self.columns
            .iter()
            .enumerate()
            .filter_map(|(j, c)| match &c.error {
                Some(e) => Some(format!("column {j}: {e}")),
                None if !c.converged => Some(format!("column {j}: not converged after {} iterations", c.iterations)),
                None => None,
            })
            .collect()
    }

    /// `j,iterations,objective,primal_residual,dual_residual,converged,error`
    pub fn diagnostics_csv(&self) -> String {
        let mut s = String::from("j,iterations,objective,primal_residual,dual_residual,converged,error\n");
        for (j, c) in self.columns.iter().enumerate() {
            let _ = writeln!(
                s,
                "{j},{},{:.16e},{:.16e},{:.16e},{},{}",
                c.iterations,
                c.objective,
                c.primal_residual,
                c.dual_residual,
                c.converged,
                c.error.as_deref().unwrap_or("").replace([',', '\n'], ";")
            );
        }
        s
    }
}

fn check_input(data: &DataSet) -> Result<()> {
    if data.len() < 2 {
        return Err(Error::InvalidInput(format!("SSC needs at least 2 points, got {}", data.len())));
    }
    if let Some(j) = data.first_zero_column() {
        return Err(Error::InvalidInput(format!("column {j} is all zeros")));
    }
    Ok(())
}

fn solve_column(x: &DMatrix<f64>, j: usize, cfg: &SscConfig) -> (DVector<f64>, ColumnReport) {
    let n = x.ncols();
    let dict = x.clone().remove_column(j);
    let target = x.column(j).into_owned();
    let embed = |c: &DVector<f64>| {
        let mut z = DVector::zeros(n);
        for (i, &v) in c.iter().enumerate() {
            z[if i < j { i } else { i + 1 }] = v;
        }
        z
    };
    match cfg.mode {
        SscMode::ExactL1 => match lp::min_l1_representation(&dict, &target) {
            Ok(sol) => {
                let report = ColumnReport {
                    iterations: sol.pivots,
                    objective: sol.objective,
                    primal_residual: sol.residual,
                    dual_residual: sol.duality_gap(),
                    converged: sol.duality_gap() <= cfg.tol_abs * (1.0 + sol.objective.abs()),
                    dual: Some(sol.dual.clone()),
                    error: None,
                };
                (embed(&sol.coefficients), report)
            }
            Err(e) => (DVector::zeros(n), ColumnReport { error: Some(e.to_string()), ..Default::default() }),
        },
        SscMode::LassoAdmm => {
            let mu = dict.tr_mul(&target).amax();
            if mu == 0.0 {
                // Orthogonal to every other point: the Lasso solution is zero.
                return (DVector::zeros(n), ColumnReport { converged: true, ..Default::default() });
            }
            let settings = AdmmSettings {
                rho: cfg.admm_rho * mu / cfg.alpha,
                max_iter: cfg.max_iter,
                tol_abs: cfg.tol_abs,
                tol_rel: cfg.tol_rel,
                track_objective: false,
            };
            match admm::lasso_admm(&dict, &target, mu / cfg.alpha, &settings) {
                Ok(r) => {
                    let report = ColumnReport {
                        iterations: r.iterations,
                        objective: r.objective,
                        primal_residual: r.primal_residual,
                        dual_residual: r.dual_residual,
                        converged: r.converged,
                        dual: None,
                        error: None,
                    };
                    (embed(&r.coefficients), report)
                }
                Err(e) => (DVector::zeros(n), ColumnReport { error: Some(e.to_string()), ..Default::default() }),
            }
        }
    }
}

/// Self-representation coefficients `Z` (column `j` is `z_j`).
pub fn ssc_coefficients(data: &DataSet, cfg: &SscConfig) -> Result<SscSolution> {
    cfg.validate()?;
    check_input(data)?;
    let x = data.points();
    let n = x.ncols();
    let solved: Vec<(DVector<f64>, ColumnReport)> = (0..n).into_par_iter().map(|j| solve_column(x, j, cfg)).collect();
    let mut coefficients = DMatrix::zeros(n, n);
    let mut columns = Vec::with_capacity(n);
    for (j, (z, report)) in solved.into_iter().enumerate() {
        coefficients.set_column(j, &z);
        coefficients[(j, j)] = 0.0;
        columns.push(report);
    }
    Ok(SscSolution { coefficients, columns })
}

/// SSC adjacency `|Z| + |Z|ᵀ`, together with the solver report.
pub fn ssc_adjacency_with_report(data: &DataSet, cfg: &SscConfig) -> Result<(Adjacency, SscSolution)> {
    let sol = ssc_coefficients(data, cfg)?;
    let adj = Adjacency::from_coefficients(&sol.coefficients)?;
    Ok((adj, sol))
}

pub fn ssc_adjacency(data: &DataSet, cfg: &SscConfig) -> Result<Adjacency> {
    ssc_adjacency_with_report(data, cfg).map(|(a, _)| a)
}
