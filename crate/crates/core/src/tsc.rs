//! Thresholding-based subspace clustering.
//!
//! Each point is connected to the `q` other points with the largest absolute
//! inner product, with weight `exp(−2·acos(|⟨x_j, x_i⟩| / (‖x_j‖‖x_i‖)))`,
//! and `A = Z + Zᵀ`. Ties in the selection go to the lower index.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::adjacency::Adjacency;
use crate::error::{Error, Result};
use crate::synth::DataSet;

pub const DEFAULT_Q: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TscConfig {
    pub q: usize,
    /// Rank neighbours by normalized rather than raw inner products.
    pub normalize_selection: bool,
}

impl Default for TscConfig {
    fn default() -> Self {
        Self { q: DEFAULT_Q, normalize_selection: false }
    }
}

impl TscConfig {
    pub fn with_q(q: usize) -> Self {
        Self { q, ..Self::default() }
    }
}

fn check(data: &DataSet, q: usize) -> Result<()> {
    let n = data.len();
    if q == 0 || q + 1 > n {
        return Err(Error::InvalidInput(format!("q = {q} is out of range for {n} points (need 1 ≤ q ≤ N − 1)")));
    }
    Ok(())
}

fn column_norms(x: &DMatrix<f64>) -> Vec<f64> {
    x.column_iter().map(|c| c.norm()).collect()
}

fn select(gram: &DMatrix<f64>, norms: Option<&[f64]>, q: usize) -> Vec<Vec<usize>> {
    let n = gram.ncols();
    (0..n)
        .map(|j| {
            let score = |i: usize| {
                let g = gram[(i, j)].abs();
                match norms {
                    Some(nr) => g / (nr[i] * nr[j]),
                    None => g,
                }
            };
            let mut cand: Vec<(f64, usize)> = (0..n).filter(|&i| i != j).map(|i| (score(i), i)).collect();
            let cmp = |a: &(f64, usize), b: &(f64, usize)| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1));
            if q < cand.len() {
                cand.select_nth_unstable_by(q - 1, cmp);
                cand.truncate(q);
            }
            cand.sort_by(cmp);
            cand.into_iter().map(|(_, i)| i).collect()
        })
        .collect()
}

/// Neighbour sets `S_j`, each sorted by decreasing `|⟨x_j, x_i⟩|`.
pub fn tsc_neighbors(data: &DataSet, q: usize) -> Result<Vec<Vec<usize>>> {
    tsc_neighbors_with(data, &TscConfig::with_q(q))
}

pub fn tsc_neighbors_with(data: &DataSet, cfg: &TscConfig) -> Result<Vec<Vec<usize>>> {
    check(data, cfg.q)?;
    let x = data.points();
    let gram = x.tr_mul(x);
    if cfg.normalize_selection {
        if let Some(j) = data.first_zero_column() {
            return Err(Error::InvalidInput(format!("column {j} has zero norm")));
        }
        let norms = column_norms(x);
        Ok(select(&gram, Some(&norms), cfg.q))
    } else {
        Ok(select(&gram, None, cfg.q))
    }
}

/// Weight for a normalized absolute inner product `c`, clamped into `[0, 1]`.
pub fn spherical_weight(c: f64) -> f64 {
    (-2.0 * c.clamp(0.0, 1.0).acos()).exp()
}

pub fn tsc_adjacency(data: &DataSet, cfg: &TscConfig) -> Result<Adjacency> {
    check(data, cfg.q)?;
    if let Some(j) = data.first_zero_column() {
        return Err(Error::InvalidInput(format!("column {j} has zero norm")));
    }
    let x = data.points();
    let n = x.ncols();
    let gram = x.tr_mul(x);
    let norms = column_norms(x);
    let sets = select(&gram, cfg.normalize_selection.then_some(norms.as_slice()), cfg.q);
    let mut z = DMatrix::zeros(n, n);
    for (j, s) in sets.iter().enumerate() {
        for &i in s {
            z[(i, j)] = spherical_weight(gram[(i, j)].abs() / (norms[i] * norms[j]));
        }
    }
    Adjacency::from_coefficients(&z)
}
