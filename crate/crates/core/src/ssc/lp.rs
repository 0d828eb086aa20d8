//! Exact ℓ1 minimization `min ‖z‖₁ s.t. A z = b` as a linear program.
//!
//! The program is written on split variables `z = u − v`, `u, v ≥ 0`, and
//! solved with a dense two-phase tableau simplex (Dantzig pricing, switching
//! to Bland's rule on long degenerate runs). The final basis is re-solved
//! directly against the original data for the primal point and the dual
//! vector `ν` of `max bᵀν s.t. ‖Aᵀν‖_∞ ≤ 1`.
//!
//! Inputs are scaled by `1 / max|A_ij|` before pivoting, which makes the
//! pivot sequence invariant to a global rescaling of `(A, b)`.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("target is not in the span of the dictionary (phase-one residual {residual:e})")]
    Infeasible { residual: f64 },

    #[error("simplex did not terminate within {0} pivots")]
    PivotLimit(usize),

    #[error("numerical breakdown: {0}")]
    Numeric(String),
}

#[derive(Debug, Clone)]
pub struct L1Solution {
    pub coefficients: DVector<f64>,
    /// Dual certificate `ν`; at optimality `‖Aᵀν‖_∞ ≤ 1` and `(Aᵀν)_i = sign(z_i)` on the support.
    pub dual: DVector<f64>,
    pub objective: f64,
    pub dual_objective: f64,
    pub pivots: usize,
    /// `‖Az − b‖₂` in the caller's scale.
    pub residual: f64,
}

impl L1Solution {
    pub fn duality_gap(&self) -> f64 {
        (self.objective - self.dual_objective).abs()
    }
}

const EPS_OPT: f64 = 1e-10;
const EPS_PIVOT: f64 = 1e-11;
const EPS_DRIVE_OUT: f64 = 1e-8;
const DEGENERATE_RUN: usize = 50;
/// Basic variables below this fraction of `‖z‖_∞` are degenerate zeros.
const EPS_ZERO: f64 = 1e-12;

struct Tableau {
    rows: usize,
    width: usize,
    /// Row-major `rows × width`, last column is the right-hand side.
    data: Vec<f64>,
    /// Reduced costs; last entry is minus the objective value.
    cost: Vec<f64>,
    basis: Vec<usize>,
    active: Vec<bool>,
    pivots: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.data[i * self.width + self.width - 1]
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let w = self.width;
        let pv = self.data[r * w + e];
        for v in &mut self.data[r * w..(r + 1) * w] {
            *v /= pv;
        }
        let (before, rest) = self.data.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_mut(w).chain(after.chunks_mut(w)) {
            let f = row[e];
            if f != 0.0 {
                for (x, &y) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * y;
                }
                row[e] = 0.0;
            }
        }
        let f = self.cost[e];
        if f != 0.0 {
            for (x, &y) in self.cost.iter_mut().zip(prow.iter()) {
                *x -= f * y;
            }
            self.cost[e] = 0.0;
        }
        self.basis[r] = e;
        self.pivots += 1;
    }

    /// Run simplex iterations over columns `0..allowed`.
    fn optimize(&mut self, allowed: usize, max_pivots: usize) -> Result<(), LpError> {
        let mut degenerate = 0usize;
        loop {
            if self.pivots >= max_pivots {
                return Err(LpError::PivotLimit(max_pivots));
            }
            let bland = degenerate >= DEGENERATE_RUN;
            let mut enter = None;
            let mut best = -EPS_OPT;
            for j in 0..allowed {
                let d = self.cost[j];
                if d < best {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(e) = enter else { return Ok(()) };

            let mut leave: Option<(usize, f64, f64)> = None;
            for i in 0..self.rows {
                if !self.active[i] {
                    continue;
                }
                let a = self.at(i, e);
                if a <= EPS_PIVOT {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio, a)),
                    Some((r, best_ratio, best_a)) => {
                        let tie = (ratio - best_ratio).abs() <= 1e-12 * (1.0 + best_ratio);
                        let better = if tie {
                            if bland {
                                self.basis[i] < self.basis[r]
                            } else {
                                a > best_a
                            }
                        } else {
                            ratio < best_ratio
                        };
                        if better {
                            Some((i, ratio, a))
                        } else {
                            Some((r, best_ratio, best_a))
                        }
                    }
                };
            }
            let Some((r, ratio, _)) = leave else {
                return Err(LpError::Numeric("unbounded direction in a bounded program".into()));
            };
            if ratio <= 1e-14 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, e);
        }
    }
}

fn solve_square(m: DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    let sol = m.lu().solve(rhs)?;
    sol.iter().all(|v| v.is_finite()).then_some(sol)
}

/// Solve `min ‖z‖₁ s.t. A z = b`.
pub fn min_l1_representation(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<L1Solution, LpError> {
    let (p, n) = a.shape();
    if b.len() != p {
        return Err(LpError::Numeric(format!("target has length {}, dictionary has {p} rows", b.len())));
    }
    let amax = a.amax();
    if amax == 0.0 || n == 0 {
        let r = b.norm();
        if r == 0.0 {
            return Ok(L1Solution {
                coefficients: DVector::zeros(n),
                dual: DVector::zeros(p),
                objective: 0.0,
                dual_objective: 0.0,
                pivots: 0,
                residual: 0.0,
            });
        }
        return Err(LpError::Infeasible { residual: r });
    }
    let scale = 1.0 / amax;
    let sa = a * scale;
    let sb = b * scale;

    let width = 2 * n + p + 1;
    let mut data = vec![0.0; p * width];
    let mut cost = vec![0.0; width];
    for i in 0..p {
        let sign = if sb[i] < 0.0 { -1.0 } else { 1.0 };
        let row = &mut data[i * width..(i + 1) * width];
        for j in 0..n {
            row[j] = sign * sa[(i, j)];
            row[n + j] = -sign * sa[(i, j)];
        }
        row[2 * n + i] = 1.0;
        row[width - 1] = sign * sb[i];
        for (c, v) in cost.iter_mut().zip(row.iter()) {
            *c -= v;
        }
    }
    for c in &mut cost[2 * n..2 * n + p] {
        *c = 0.0;
    }
    let mut t = Tableau {
        rows: p,
        width,
        data,
        cost,
        basis: (2 * n..2 * n + p).collect(),
        active: vec![true; p],
        pivots: 0,
    };
    let max_pivots = 50 * (p + 2 * n) + 1000;

    // Phase one: find a feasible basis.
    t.optimize(2 * n, max_pivots)?;
    let infeasibility = -t.cost[width - 1];
    let rhs_size = sb.iter().map(|v| v.abs()).sum::<f64>();
    if infeasibility > 1e-9 * (1.0 + rhs_size) {
        return Err(LpError::Infeasible { residual: infeasibility / scale });
    }

    // Drive artificial variables out of the basis; rows where that is
    // impossible are linearly dependent on the others and are dropped.
    for i in 0..p {
        if t.basis[i] < 2 * n {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for j in 0..2 * n {
            let v = t.at(i, j).abs();
            if v > EPS_DRIVE_OUT && best.is_none_or(|(_, bv)| v > bv) {
                best = Some((j, v));
            }
        }
        match best {
            Some((j, _)) => t.pivot(i, j),
            None => t.active[i] = false,
        }
    }

    // Phase two: unit cost on every structural column.
    t.cost.iter_mut().for_each(|c| *c = 0.0);
    for j in 0..2 * n {
        t.cost[j] = 1.0;
    }
    for i in 0..p {
        let bv = t.basis[i];
        if t.active[i] && bv < 2 * n {
            for j in 0..width {
                t.cost[j] -= t.data[i * width + j];
            }
        }
    }
    t.optimize(2 * n, max_pivots)?;

    // Re-solve the final basis against the unflipped scaled system.
    let rows: Vec<usize> = (0..p).filter(|&i| t.active[i]).collect();
    let k = rows.len();
    let mut bmat = DMatrix::zeros(k, k);
    for (c, &i) in rows.iter().enumerate() {
        let var = t.basis[i];
        let (col, sign) = if var < n { (var, 1.0) } else { (var - n, -1.0) };
        for (r, &ri) in rows.iter().enumerate() {
            bmat[(r, c)] = sign * sa[(ri, col)];
        }
    }
    let brhs = DVector::from_iterator(k, rows.iter().map(|&i| sb[i]));
    let mut z = DVector::zeros(n);
    match solve_square(bmat.clone(), &brhs) {
        Some(w) => {
            for (c, &i) in rows.iter().enumerate() {
                let var = t.basis[i];
                if var < n {
                    z[var] += w[c];
                } else {
                    z[var - n] -= w[c];
                }
            }
        }
        None => {
            for &i in &rows {
                let var = t.basis[i];
                let v = t.rhs(i);
                if var < n {
                    z[var] += v;
                } else {
                    z[var - n] -= v;
                }
            }
        }
    }
    let cutoff = EPS_ZERO * z.amax();
    z.iter_mut().filter(|v: &&mut f64| v.abs() <= cutoff).for_each(|v| *v = 0.0);
    let nu_active = solve_square(bmat.transpose(), &DVector::from_element(k, 1.0))
        .ok_or_else(|| LpError::Numeric("singular optimal basis".into()))?;
    let mut dual = DVector::zeros(p);
    for (r, &i) in rows.iter().enumerate() {
        dual[i] = nu_active[r] * scale;
    }

    let objective = z.lp_norm(1);
    let dual_objective = b.dot(&dual);
    let residual = (a * &z - b).norm();
    Ok(L1Solution { coefficients: z, dual, objective, dual_objective, pivots: t.pivots, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unique_representation_in_two_unknowns() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let a = DMatrix::from_column_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let b = DVector::from_vec(vec![h, h]);
        let s = min_l1_representation(&a, &b).unwrap();
        assert!((s.coefficients[0] - h).abs() < 1e-12);
        assert!((s.coefficients[1] - h).abs() < 1e-12);
        assert!((s.objective - 2f64.sqrt()).abs() < 1e-12);
        assert!(s.duality_gap() < 1e-12);
    }

    #[test]
    fn negative_coefficients() {
        let a = DMatrix::from_column_slice(2, 3, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![-2.0, -2.0]);
        let s = min_l1_representation(&a, &b).unwrap();
        assert!((s.objective - 2.0).abs() < 1e-12);
        assert!((s.coefficients[2] + 2.0).abs() < 1e-12);
        assert!(s.residual < 1e-12);
    }

    #[test]
    fn infeasible_target() {
        let a = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let b = DVector::from_vec(vec![0.0, 0.0, 1.0]);
        assert!(matches!(min_l1_representation(&a, &b), Err(LpError::Infeasible { .. })));
    }

    #[test]
    fn redundant_rows_are_handled() {
        // Rank-2 dictionary embedded in R^4.
        let a = DMatrix::from_row_slice(4, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 0.0, 2.0]);
        let b = &a * DVector::from_vec(vec![0.0, 0.0, 0.7]);
        let s = min_l1_representation(&a, &b).unwrap();
        assert!((s.objective - 0.7).abs() < 1e-10);
        assert!(s.residual < 1e-10);
        let g = a.transpose() * &s.dual;
        assert!(g.amax() <= 1.0 + 1e-9);
    }

    #[test]
    fn dual_certificate_is_valid() {
        let a = DMatrix::from_fn(4, 9, |i, j| ((i * 31 + j * 17) % 11) as f64 - 5.0);
        let b = DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0]);
        let s = min_l1_representation(&a, &b).unwrap();
        let g = a.transpose() * &s.dual;
        assert!(g.amax() <= 1.0 + 1e-9);
        for i in 0..9 {
            if s.coefficients[i].abs() > 1e-12 {
                assert!((g[i] - s.coefficients[i].signum()).abs() < 1e-9);
            }
        }
        assert!(s.duality_gap() < 1e-9);
    }
}
