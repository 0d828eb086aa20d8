//! Union-of-subspaces data model and subspace geometry.
//!
//! Points of block `l` are `y = U_l a` with `a` uniform on the unit sphere of
//! `R^{d_l}`, so every generated point is a unit vector of its subspace.
//! Labels are 0-based block indices.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::seed;

const ORTHONORMAL_TOL: f64 = 1e-10;

/// Orthonormal basis `U ∈ R^{m×d}` of a `d`-dimensional subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    matrix: DMatrix<f64>,
}

impl SubspaceBasis {
    /// Wrap a matrix, checking `UᵀU = I` entrywise to 1e-10.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let (m, d) = matrix.shape();
        if d == 0 || m == 0 {
            return Err(Error::Dimension("basis must have at least one row and column".into()));
        }
        if d > m {
            return Err(Error::Dimension(format!("basis dimension {d} exceeds ambient dimension {m}")));
        }
        let gram = matrix.tr_mul(&matrix);
        let dev = (gram - DMatrix::<f64>::identity(d, d)).amax();
        if dev > ORTHONORMAL_TOL {
            return Err(Error::InvalidInput(format!("columns are not orthonormal (max deviation {dev:e})")));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn ambient_dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }
}

/// Deterministic subspaces plus per-subspace point counts.
#[derive(Debug, Clone)]
pub struct UnionModel {
    bases: Vec<SubspaceBasis>,
    counts: Vec<usize>,
    seed: u64,
}

impl UnionModel {
    pub fn new(bases: Vec<SubspaceBasis>, counts: Vec<usize>, seed: u64) -> Result<Self> {
        if bases.is_empty() {
            return Err(Error::InvalidInput("a union model needs at least one subspace".into()));
        }
        if bases.len() != counts.len() {
            return Err(Error::InvalidInput(format!(
                "{} bases but {} point counts",
                bases.len(),
                counts.len()
            )));
        }
        let m = bases[0].ambient_dim();
        if let Some(b) = bases.iter().find(|b| b.ambient_dim() != m) {
            return Err(Error::Dimension(format!(
                "bases live in different ambient dimensions ({m} vs {})",
                b.ambient_dim()
            )));
        }
        if let Some(l) = counts.iter().position(|&n| n == 0) {
            return Err(Error::InvalidInput(format!("subspace {l} has no points")));
        }
        Ok(Self { bases, counts, seed })
    }

    pub fn bases(&self) -> &[SubspaceBasis] {
        &self.bases
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn ambient_dim(&self) -> usize {
        self.bases[0].ambient_dim()
    }

    pub fn num_subspaces(&self) -> usize {
        self.bases.len()
    }

    pub fn num_points(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn max_dim(&self) -> usize {
        self.bases.iter().map(SubspaceBasis::dim).max().unwrap_or(0)
    }

    /// `min_l (n_l − 1) / d_l`.
    pub fn rho_min(&self) -> f64 {
        self.bases
            .iter()
            .zip(&self.counts)
            .map(|(b, &n)| (n as f64 - 1.0) / b.dim() as f64)
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest affinity over all pairs of distinct subspaces (0 when L = 1).
    pub fn max_affinity(&self) -> f64 {
        let mut best = 0.0f64;
        for k in 0..self.bases.len() {
            for l in k + 1..self.bases.len() {
                best = best.max(affinity_unchecked(&self.bases[k], &self.bases[l]));
            }
        }
        best
    }
}

/// Points as columns of a `D × N` matrix, with optional ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    points: DMatrix<f64>,
    labels: Option<Vec<usize>>,
}

impl DataSet {
    pub fn new(points: DMatrix<f64>, labels: Option<Vec<usize>>) -> Result<Self> {
        if points.nrows() == 0 {
            return Err(Error::Dimension("data points must have positive dimension".into()));
        }
        if let Some(l) = &labels {
            if l.len() != points.ncols() {
                return Err(Error::InvalidInput(format!(
                    "{} labels for {} points",
                    l.len(),
                    points.ncols()
                )));
            }
        }
        Ok(Self { points, labels })
    }

    pub fn points(&self) -> &DMatrix<f64> {
        &self.points
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.points.nrows()
    }

    pub fn len(&self) -> usize {
        self.points.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.points.ncols() == 0
    }

    pub fn into_parts(self) -> (DMatrix<f64>, Option<Vec<usize>>) {
        (self.points, self.labels)
    }

    /// Index of the first column with zero Euclidean norm, if any.
    pub fn first_zero_column(&self) -> Option<usize> {
        self.points.column_iter().position(|c| c.norm() == 0.0)
    }

    /// Rescale every column to unit norm. Zero columns are an error.
    pub fn normalized(&self) -> Result<Self> {
        if let Some(j) = self.first_zero_column() {
            return Err(Error::InvalidInput(format!("column {j} has zero norm")));
        }
        let mut points = self.points.clone();
        for mut c in points.column_iter_mut() {
            let n = c.norm();
            c /= n;
        }
        Ok(Self { points, labels: self.labels.clone() })
    }

    /// Same points scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { points: &self.points * factor, labels: self.labels.clone() }
    }

    /// Number of distinct ground-truth labels (0 without labels).
    pub fn num_classes(&self) -> usize {
        self.labels.as_ref().map_or(0, |l| l.iter().max().map_or(0, |&m| m + 1))
    }
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut seed::Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Haar-distributed orthonormal `m × d` frame.
fn haar_frame(m: usize, d: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = seed::rng(seed);
    let g = gaussian_matrix(m, d, &mut rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    // Fix the sign ambiguity of QR so the frame is exactly Haar.
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Uniformly random (Haar) orthonormal basis of a `d`-dimensional subspace of `R^m`.
pub fn random_orthonormal_basis(m: usize, d: usize, seed: u64) -> Result<SubspaceBasis> {
    if d == 0 || m == 0 {
        return Err(Error::Dimension("dimensions must be positive".into()));
    }
    if d > m {
        return Err(Error::Dimension(format!("subspace dimension {d} exceeds ambient dimension {m}")));
    }
    SubspaceBasis::new(haar_frame(m, d, seed))
}

/// Two `d`-dimensional subspaces that share exactly `t` dimensions, the
/// remaining directions being mutually orthogonal, so `aff = √(t/d)`.
pub fn intersecting_pair(m: usize, d: usize, t: usize, seed: u64) -> Result<(SubspaceBasis, SubspaceBasis)> {
    let mut family = shared_intersection_family(m, &[d, d], t, seed)?;
    let second = family.pop().expect("two bases");
    let first = family.pop().expect("two bases");
    Ok((first, second))
}

/// `L` subspaces all containing one common `t`-dimensional subspace, with all
/// other directions mutually orthogonal. Pairwise affinity is `√(t / min(d_k, d_l))`.
pub fn shared_intersection_family(m: usize, dims: &[usize], t: usize, seed: u64) -> Result<Vec<SubspaceBasis>> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::Dimension("subspace dimensions must be positive".into()));
    }
    let d_min = *dims.iter().min().expect("non-empty");
    if t > d_min {
        return Err(Error::Dimension(format!("intersection dimension {t} exceeds smallest subspace dimension {d_min}")));
    }
    let needed = t + dims.iter().map(|d| d - t).sum::<usize>();
    if needed > m {
        return Err(Error::Dimension(format!(
            "construction needs ambient dimension at least {needed}, got {m}"
        )));
    }
    let frame = haar_frame(m, needed, seed);
    let mut offset = t;
    dims.iter()
        .map(|&d| {
            let mut u = DMatrix::zeros(m, d);
            u.columns_mut(0, t).copy_from(&frame.columns(0, t));
            u.columns_mut(t, d - t).copy_from(&frame.columns(offset, d - t));
            offset += d - t;
            SubspaceBasis::new(u)
        })
        .collect()
}

/// Draw the data set of a union model. Block `l` uses the child seed
/// `derive(model.seed, [l])`.
pub fn generate(model: &UnionModel) -> DataSet {
    let m = model.ambient_dim();
    let n = model.num_points();
    let mut points = DMatrix::zeros(m, n);
    let mut labels = Vec::with_capacity(n);
    let mut col = 0;
    for (l, (basis, &count)) in model.bases.iter().zip(&model.counts).enumerate() {
        let mut rng = seed::rng(seed::derive(model.seed, &[l as u64]));
        let d = basis.dim();
        for _ in 0..count {
            let mut a = DVector::<f64>::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
            // A zero draw has probability zero; redraw rather than divide by it.
            while a.norm() == 0.0 {
                a = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
            }
            a /= a.norm();
            let mut y = basis.matrix() * a;
            y /= y.norm();
            points.set_column(col, &y);
            labels.push(l);
            col += 1;
        }
    }
    DataSet { points, labels: Some(labels) }
}

fn check_same_ambient(a: &SubspaceBasis, b: &SubspaceBasis) -> Result<()> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(Error::Dimension(format!(
            "ambient dimensions differ: {} vs {}",
            a.ambient_dim(),
            b.ambient_dim()
        )));
    }
    Ok(())
}

/// Cosines of the principal angles between `span(A)` and `span(B)`,
/// descending, clamped to `[0, 1]`, of length `min(d_A, d_B)`.
pub fn principal_angles(a: &SubspaceBasis, b: &SubspaceBasis) -> Result<Vec<f64>> {
    check_same_ambient(a, b)?;
    let cross = a.matrix().tr_mul(b.matrix());
    let mut s: Vec<f64> = cross.singular_values().iter().map(|v| v.clamp(0.0, 1.0)).collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s.truncate(a.dim().min(b.dim()));
    Ok(s)
}

fn affinity_unchecked(a: &SubspaceBasis, b: &SubspaceBasis) -> f64 {
    let cross = a.matrix().tr_mul(b.matrix());
    let d = a.dim().min(b.dim()) as f64;
    (cross.norm() / d.sqrt()).clamp(0.0, 1.0)
}

/// `‖AᵀB‖_F / √(min(d_A, d_B))`, clamped to `[0, 1]`.
pub fn affinity(a: &SubspaceBasis, b: &SubspaceBasis) -> Result<f64> {
    check_same_ambient(a, b)?;
    Ok(affinity_unchecked(a, b))
}
