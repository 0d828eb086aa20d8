//! Evaluation: clustering error, false connections, and the projected
//! affinity quantities behind the clustering guarantees.

pub mod hungarian;
pub mod theorem;

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::adjacency::Adjacency;
use crate::error::{Error, Result};
use crate::project::Projector;
use crate::synth::SubspaceBasis;

pub use theorem::{theorem_report, TheoremReport};

/// Map arbitrary label values onto `0..k` in increasing order of value.
fn compact(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = BTreeMap::new();
    for &l in labels {
        map.entry(l).or_insert(0);
    }
    for (i, v) in map.values_mut().enumerate() {
        *v = i;
    }
    (labels.iter().map(|l| map[l]).collect(), map.len())
}

/// Confusion counts `conf[pred][truth]` on a square `k × k` grid, `k = max(#pred, #truth)`.
pub fn confusion(pred: &[usize], truth: &[usize]) -> Result<Vec<Vec<usize>>> {
    if pred.len() != truth.len() {
        return Err(Error::InvalidInput(format!("{} predicted vs {} true labels", pred.len(), truth.len())));
    }
    let (p, kp) = compact(pred);
    let (t, kt) = compact(truth);
    let k = kp.max(kt);
    let mut conf = vec![vec![0usize; k]; k];
    for (&a, &b) in p.iter().zip(&t) {
        conf[a][b] += 1;
    }
    Ok(conf)
}

/// Fraction of misclassified points under the best bijective relabeling.
pub fn clustering_error(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let conf = confusion(pred, truth)?;
    let n = pred.len();
    if n == 0 {
        return Ok(0.0);
    }
    let big = n as f64;
    let cost: Vec<Vec<f64>> = conf.iter().map(|r| r.iter().map(|&c| big - c as f64).collect()).collect();
    let assign = hungarian::min_cost_assignment(&cost);
    let agree: usize = assign.iter().enumerate().map(|(i, &j)| conf[i][j]).sum();
    Ok(1.0 - agree as f64 / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FalseConnectionReport {
    pub count: usize,
    pub total_edges: usize,
    pub has_false: bool,
}

/// Count unordered pairs `i < j` with `A_ij > 0` joining different ground-truth groups.
pub fn false_connections(adj: &Adjacency, truth: &[usize]) -> Result<FalseConnectionReport> {
    let n = adj.len();
    if truth.len() != n {
        return Err(Error::InvalidInput(format!("{} labels for {n} vertices", truth.len())));
    }
    let w = adj.weights();
    let (mut count, mut total) = (0, 0);
    for i in 0..n {
        for j in i + 1..n {
            if w[(i, j)] > 0.0 {
                total += 1;
                if truth[i] != truth[j] {
                    count += 1;
                }
            }
        }
    }
    Ok(FalseConnectionReport { count, total_edges: total, has_false: count > 0 })
}

/// Relative threshold on the smallest singular value for full column rank.
pub const RANK_TOL: f64 = 1e-8;

/// `‖V_l† V_k‖_F / √d_k` for a full-column-rank `V_l`.
pub fn projected_affinity_thm3(v_l: &DMatrix<f64>, v_k: &DMatrix<f64>) -> Result<f64> {
    if v_l.nrows() != v_k.nrows() {
        return Err(Error::Dimension(format!("row counts differ: {} vs {}", v_l.nrows(), v_k.nrows())));
    }
    let (p, d_l) = v_l.shape();
    if d_l == 0 || v_k.ncols() == 0 {
        return Err(Error::Dimension("bases need at least one column".into()));
    }
    if p < d_l {
        return Err(Error::RankDeficient { smallest: 0.0, largest: v_l.singular_values().max() });
    }
    let sv = v_l.singular_values();
    let (smallest, largest) = (sv.min(), sv.max());
    if !(smallest > RANK_TOL * largest) {
        return Err(Error::RankDeficient { smallest, largest });
    }
    // V† V_k = R⁻¹ Qᵀ V_k for the thin QR factorization V = QR.
    let qr = v_l.clone().qr();
    let rhs = qr.q().tr_mul(v_k);
    let solved = qr
        .r()
        .solve_upper_triangular(&rhs)
        .ok_or_else(|| Error::Numeric("triangular solve failed".into()))?;
    Ok(solved.norm() / (v_k.ncols() as f64).sqrt())
}

fn projected_bases(u_l: &SubspaceBasis, u_k: &SubspaceBasis, proj: &Projector) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if u_l.ambient_dim() != proj.source_dim() || u_k.ambient_dim() != proj.source_dim() {
        return Err(Error::Dimension(format!(
            "bases in R^{} / R^{} but projector acts on R^{}",
            u_l.ambient_dim(),
            u_k.ambient_dim(),
            proj.source_dim()
        )));
    }
    Ok((proj.apply_matrix(u_l.matrix())?, proj.apply_matrix(u_k.matrix())?))
}

/// `‖U_lᵀ(ΦᵀΦ − I)U_k‖_F / √(min(d_l, d_k))`.
pub fn perturbation_norm(u_l: &SubspaceBasis, u_k: &SubspaceBasis, proj: &Projector) -> Result<f64> {
    let (v_l, v_k) = projected_bases(u_l, u_k, proj)?;
    let diff = v_l.tr_mul(&v_k) - u_l.matrix().tr_mul(u_k.matrix());
    Ok(diff.norm() / (u_l.dim().min(u_k.dim()) as f64).sqrt())
}

/// `‖V_lᵀ V_k‖_F / √(min(d_l, d_k))` with `V = ΦU` (not re-orthonormalized).
pub fn projected_cross_norm(u_l: &SubspaceBasis, u_k: &SubspaceBasis, proj: &Projector) -> Result<f64> {
    let (v_l, v_k) = projected_bases(u_l, u_k, proj)?;
    Ok(v_l.tr_mul(&v_k).norm() / (u_l.dim().min(u_k.dim()) as f64).sqrt())
}

/// Affinity of the projected subspaces `span(ΦU_l)` and `span(ΦU_k)` in `R^p`.
pub fn projected_pair_affinity(u_l: &SubspaceBasis, u_k: &SubspaceBasis, proj: &Projector) -> Result<f64> {
    let (v_l, v_k) = projected_bases(u_l, u_k, proj)?;
    let q_l = orthonormal_range(v_l)?;
    let q_k = orthonormal_range(v_k)?;
    crate::synth::affinity(&q_l, &q_k)
}

fn orthonormal_range(v: DMatrix<f64>) -> Result<SubspaceBasis> {
    let (p, d) = v.shape();
    if p < d {
        return Err(Error::RankDeficient { smallest: 0.0, largest: v.amax() });
    }
    let sv = v.singular_values();
    if !(sv.min() > RANK_TOL * sv.max()) {
        return Err(Error::RankDeficient { smallest: sv.min(), largest: sv.max() });
    }
    SubspaceBasis::new(v.qr().q())
}
