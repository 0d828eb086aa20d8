//! Sufficient conditions for graphs without false connections after a JL
//! projection, evaluated on a concrete model and projector.
//!
//! * SSC: `aff_max + √(28 d_max + 8 log L + 2τ)/√(3 c̃ p) ≤ √(log ρ_min) / (65 log N)`
//! * TSC: `aff_max + (√10/√(12 c̃))·√(d_max/p) ≤ 1 / (15 log N)` with `n_l ≥ 6q`
//! * projected SSC: `max_{k≠l} ‖V_l† V_k‖_F / √d_k ≤ √(log ρ_min) / (64 log N)`, `V = ΦU`
//!
//! All logarithms are natural. `ρ_min = min_l (n_l − 1)/d_l`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::metrics::projected_affinity_thm3;
use crate::project::{Projector, ProjectorCalibration};
use crate::synth::UnionModel;

pub const DEFAULT_TAU: f64 = 2.0;

/// JL term of the SSC condition.
pub fn ssc_projection_term(d_max: usize, l: usize, tau: f64, c_tilde: f64, p: usize) -> f64 {
    (28.0 * d_max as f64 + 8.0 * (l as f64).ln() + 2.0 * tau).sqrt() / (3.0 * c_tilde * p as f64).sqrt()
}

/// JL term of the TSC condition.
pub fn tsc_projection_term(d_max: usize, c_tilde: f64, p: usize) -> f64 {
    10f64.sqrt() / (12.0 * c_tilde).sqrt() * (d_max as f64 / p as f64).sqrt()
}

/// `√(log ρ_min) / (denominator · log N)`, zero when `ρ_min ≤ 1`.
pub fn ssc_threshold(rho_min: f64, n: usize, denominator: f64) -> f64 {
    let lr = rho_min.ln();
    if lr > 0.0 {
        lr.sqrt() / (denominator * (n as f64).ln())
    } else {
        0.0
    }
}

pub fn tsc_threshold(n: usize) -> f64 {
    1.0 / (15.0 * (n as f64).ln())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoremReport {
    pub aff_max: f64,
    pub d_max: usize,
    pub rho_min: f64,
    pub n: usize,
    pub l: usize,
    pub p: usize,
    pub q: usize,
    pub tau: f64,
    pub c_tilde: f64,
    pub lhs_eq3: f64,
    pub rhs_eq3: f64,
    pub eq3_satisfied: bool,
    pub lhs_eq4: f64,
    pub rhs_eq4: f64,
    /// `n_l ≥ 6q` for every subspace.
    pub counts_ok: bool,
    pub eq4_satisfied: bool,
    /// `None` when some projected basis is rank deficient.
    pub lhs_eq5_max: Option<f64>,
    pub rhs_eq5: f64,
    pub eq5_satisfied: bool,
    /// Why a condition could not hold regardless of the data, if applicable.
    pub notes: Vec<String>,
}

impl TheoremReport {
    pub const CSV_HEADER: &'static str = "p,aff_max,d_max,rho_min,N,L,q,tau,c_tilde,lhs_eq3,rhs_eq3,eq3_satisfied,lhs_eq4,rhs_eq4,counts_ok,eq4_satisfied,lhs_eq5_max,rhs_eq5,eq5_satisfied,notes";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.16e},{},{:.16e},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e},{:.16e},{},{},{},{:.16e},{},{}",
            self.p,
            self.aff_max,
            self.d_max,
            self.rho_min,
            self.n,
            self.l,
            self.q,
            self.tau,
            self.c_tilde,
            self.lhs_eq3,
            self.rhs_eq3,
            self.eq3_satisfied,
            self.lhs_eq4,
            self.rhs_eq4,
            self.counts_ok,
            self.eq4_satisfied,
            self.lhs_eq5_max.map(|v| format!("{v:.16e}")).unwrap_or_default(),
            self.rhs_eq5,
            self.eq5_satisfied,
            self.notes.join("; ").replace(',', " ")
        )
    }

    /// One `key = value` line per field.
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let header: Vec<&str> = Self::CSV_HEADER.split(',').collect();
        let row = self.csv_row();
        let values: Vec<&str> = row.splitn(header.len(), ',').collect();
        for (k, v) in header.iter().zip(values) {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}

/// Evaluate all three conditions for `model` under the realization `proj`.
pub fn theorem_report(
    model: &UnionModel,
    proj: &Projector,
    cal: &ProjectorCalibration,
    tau: f64,
    q: usize,
) -> Result<TheoremReport> {
    if !(tau > 0.0) {
        return Err(Error::InvalidInput(format!("tau must be positive, got {tau}")));
    }
    if proj.source_dim() != model.ambient_dim() {
        return Err(Error::Dimension(format!(
            "projector acts on R^{} but the model lives in R^{}",
            proj.source_dim(),
            model.ambient_dim()
        )));
    }
    let n = model.num_points();
    if n < 2 {
        return Err(Error::InvalidInput("conditions need at least two points".into()));
    }
    let l = model.num_subspaces();
    let d_max = model.max_dim();
    let rho_min = model.rho_min();
    let p = proj.target_dim();
    let c = cal.c_tilde;
    let aff_max = model.max_affinity();
    let mut notes = Vec::new();

    let rho_ok = rho_min > 1.0;
    if !rho_ok {
        notes.push(format!("rho_min = {rho_min} <= 1 so sqrt(log rho_min) is undefined or zero; SSC conditions unsatisfiable"));
    }

    let lhs_eq3 = aff_max + ssc_projection_term(d_max, l, tau, c, p);
    let rhs_eq3 = ssc_threshold(rho_min, n, 65.0);
    let eq3_satisfied = rho_ok && lhs_eq3 <= rhs_eq3;

    let lhs_eq4 = aff_max + tsc_projection_term(d_max, c, p);
    let rhs_eq4 = tsc_threshold(n);
    let counts_ok = model.counts().iter().all(|&nl| nl >= 6 * q);
    if !counts_ok {
        notes.push(format!("some n_l < 6q with q = {q}"));
    }
    let eq4_satisfied = counts_ok && lhs_eq4 <= rhs_eq4;

    let projected: Vec<_> =
        model.bases().iter().map(|b| proj.apply_matrix(b.matrix())).collect::<Result<_>>()?;
    let mut lhs_eq5_max = Some(0.0f64);
    'pairs: for (li, v_l) in projected.iter().enumerate() {
        for (ki, v_k) in projected.iter().enumerate() {
            if li == ki {
                continue;
            }
            match projected_affinity_thm3(v_l, v_k) {
                Ok(v) => lhs_eq5_max = lhs_eq5_max.map(|m| m.max(v)),
                Err(e) => {
                    notes.push(format!("projected basis {li} rank deficient: {e}"));
                    lhs_eq5_max = None;
                    break 'pairs;
                }
            }
        }
    }
    let rhs_eq5 = ssc_threshold(rho_min, n, 64.0);
    let eq5_satisfied = rho_ok && lhs_eq5_max.is_some_and(|v| v <= rhs_eq5);

    Ok(TheoremReport {
        aff_max,
        d_max,
        rho_min,
        n,
        l,
        p,
        q,
        tau,
        c_tilde: c,
        lhs_eq3,
        rhs_eq3,
        eq3_satisfied,
        lhs_eq4,
        rhs_eq4,
        counts_ok,
        eq4_satisfied,
        lhs_eq5_max,
        rhs_eq5,
        eq5_satisfied,
        notes,
    })
}
