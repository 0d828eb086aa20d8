//! Lasso `min w‖c‖₁ + ½‖b − A c‖²` by ADMM on the splitting `z = c`.
//!
//! Iteration (scaled dual `u`):
//!
//! ```text
//! z ← (AᵀA + ρI)⁻¹ (Aᵀb + ρ(c − u))
//! c ← soft(z + u, w/ρ)
//! u ← u + z − c
//! ```
//!
//! The returned coefficients are the sparse iterate `c`. Stopping follows the
//! usual primal/dual residual test with absolute and relative tolerances.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmmSettings {
    pub rho: f64,
    pub max_iter: usize,
    pub tol_abs: f64,
    pub tol_rel: f64,
    /// Record the objective at every iterate.
    pub track_objective: bool,
}

#[derive(Debug, Clone)]
pub struct AdmmResult {
    pub coefficients: DVector<f64>,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub converged: bool,
    pub objective: f64,
    pub objective_trace: Vec<f64>,
}

/// `(AᵀA + ρI)⁻¹` applied either directly or through the `p × p` Woodbury form.
enum RidgeSolver {
    Direct(Cholesky<f64, Dyn>),
    Woodbury { chol: Cholesky<f64, Dyn>, rho: f64 },
}

impl RidgeSolver {
    fn new(a: &DMatrix<f64>, rho: f64) -> Result<Self> {
        let (p, n) = a.shape();
        let fail = || Error::Numeric("ridge system is not positive definite".into());
        if p < n {
            let mut m = a * a.transpose();
            for i in 0..p {
                m[(i, i)] += rho;
            }
            Ok(Self::Woodbury { chol: m.cholesky().ok_or_else(fail)?, rho })
        } else {
            let mut m = a.tr_mul(a);
            for i in 0..n {
                m[(i, i)] += rho;
            }
            Ok(Self::Direct(m.cholesky().ok_or_else(fail)?))
        }
    }

    fn solve(&self, a: &DMatrix<f64>, q: &DVector<f64>) -> DVector<f64> {
        match self {
            Self::Direct(chol) => chol.solve(q),
            Self::Woodbury { chol, rho } => {
                let s = chol.solve(&(a * q));
                (q - a.tr_mul(&s)) / *rho
            }
        }
    }
}

fn soft_threshold(v: f64, k: f64) -> f64 {
    if v > k {
        v - k
    } else if v < -k {
        v + k
    } else {
        0.0
    }
}

pub fn lasso_objective(a: &DMatrix<f64>, b: &DVector<f64>, z: &DVector<f64>, weight: f64) -> f64 {
    weight * z.lp_norm(1) + 0.5 * (b - a * z).norm_squared()
}

/// Largest violation of the Lasso optimality conditions
/// `Aᵀ(b − Az) ∈ w ∂‖z‖₁`, measured coordinatewise.
pub fn lasso_kkt_residual(a: &DMatrix<f64>, b: &DVector<f64>, z: &DVector<f64>, weight: f64) -> f64 {
    let g = a.tr_mul(&(b - a * z));
    g.iter()
        .zip(z.iter())
        .map(|(&gi, &zi)| {
            if zi != 0.0 {
                (gi - weight * zi.signum()).abs()
            } else {
                (gi.abs() - weight).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

pub fn lasso_admm(a: &DMatrix<f64>, b: &DVector<f64>, weight: f64, settings: &AdmmSettings) -> Result<AdmmResult> {
    let (p, n) = a.shape();
    if b.len() != p {
        return Err(Error::Dimension(format!("target length {} vs {p} dictionary rows", b.len())));
    }
    if !(settings.rho > 0.0) || !(weight >= 0.0) {
        return Err(Error::InvalidInput("ADMM needs rho > 0 and a nonnegative weight".into()));
    }
    let rho = settings.rho;
    let solver = RidgeSolver::new(a, rho)?;
    let atb = a.tr_mul(b);
    let mut c = DVector::zeros(n);
    let mut u = DVector::zeros(n);
    let sqrt_n = (n as f64).sqrt();
    let mut trace = Vec::new();
    let (mut r_norm, mut s_norm) = (f64::INFINITY, f64::INFINITY);
    let mut converged = false;
    let mut iterations = 0;
    let thresh = weight / rho;

    for k in 0..settings.max_iter {
        iterations = k + 1;
        let z = solver.solve(a, &(&atb + (&c - &u) * rho));
        let c_prev = std::mem::replace(&mut c, (&z + &u).map(|v| soft_threshold(v, thresh)));
        u += &z - &c;

        r_norm = (&z - &c).norm();
        s_norm = rho * (&c - &c_prev).norm();
        if settings.track_objective {
            trace.push(lasso_objective(a, b, &c, weight));
        }
        let eps_pri = sqrt_n * settings.tol_abs + settings.tol_rel * z.norm().max(c.norm());
        let eps_dual = sqrt_n * settings.tol_abs + settings.tol_rel * rho * u.norm();
        if r_norm <= eps_pri && s_norm <= eps_dual {
            converged = true;
            break;
        }
    }
    let objective = lasso_objective(a, b, &c, weight);
    Ok(AdmmResult {
        coefficients: c,
        iterations,
        primal_residual: r_norm,
        dual_residual: s_norm,
        converged,
        objective,
        objective_trace: trace,
    })
}
