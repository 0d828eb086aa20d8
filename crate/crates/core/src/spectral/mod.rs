//! Normalized spectral clustering (Ng–Jordan–Weiss) on an adjacency matrix.
//!
//! `L_sym = I − D^{−1/2} A D^{−1/2}`. A vertex of zero degree keeps an
//! identity row, so it contributes an eigenvalue of 1 and a zero row in the
//! spectral embedding; k-means then attaches it to the nearest centroid.

pub mod kmeans;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::adjacency::Adjacency;
use crate::error::{Error, Result};

pub use kmeans::{kmeans, KMeansParams, KMeansResult};

pub const DEFAULT_L_MAX: usize = 10;

#[derive(Debug, Clone)]
pub struct ClusteringResult {
    pub labels: Vec<usize>,
    pub l_hat: usize,
    /// Smallest eigenvalues of `L_sym`, ascending.
    pub eigenvalues: Vec<f64>,
    pub kmeans: KMeansMeta,
}

/// k-means settings and outcome, kept for auditability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansMeta {
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
    pub best_restart: usize,
    pub inertia: f64,
}

impl ClusteringResult {
    /// `index,eigenvalue` lines with header.
    pub fn eigenvalues_csv(&self) -> String {
        let mut s = String::from("index,eigenvalue\n");
        for (i, v) in self.eigenvalues.iter().enumerate() {
            s.push_str(&format!("{i},{v:.16e}\n"));
        }
        s
    }
}

pub fn normalized_laplacian(adj: &Adjacency) -> DMatrix<f64> {
    let w = adj.weights();
    let n = w.nrows();
    let inv_sqrt: Vec<f64> = adj.degrees().iter().map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 }).collect();
    DMatrix::from_fn(n, n, |i, j| {
        let off = -w[(i, j)] * inv_sqrt[i] * inv_sqrt[j];
        if i == j {
            1.0 + off
        } else {
            off
        }
    })
}

/// Validate and build `L_sym` from a raw weight matrix.
pub fn normalized_laplacian_of(weights: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(normalized_laplacian(&Adjacency::new(weights.clone())?))
}

/// Full spectrum of `L_sym`: eigenvalues ascending and matching eigenvectors as columns.
pub fn laplacian_spectrum(adj: &Adjacency) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let lap = normalized_laplacian(adj);
    if lap.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite Laplacian entries".into()));
    }
    let eig = SymmetricEigen::new(lap);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

fn largest_gap(values: &[f64], l_max: usize) -> usize {
    let upper = l_max.min(values.len().saturating_sub(1));
    let mut best = (1, f64::NEG_INFINITY);
    for i in 1..=upper {
        let gap = values[i] - values[i - 1];
        if gap > best.1 {
            best = (i, gap);
        }
    }
    best.0
}

/// `argmax_{1 ≤ i ≤ L_max} (λ_{i+1} − λ_i)` over the ascending spectrum; ties go to the smaller `i`.
pub fn eigengap_estimate(adj: &Adjacency, l_max: usize) -> Result<usize> {
    let n = adj.len();
    if l_max == 0 || l_max > n {
        return Err(Error::InvalidInput(format!("L_max = {l_max} must lie in 1..={n}")));
    }
    if n == 1 {
        return Ok(1);
    }
    let (values, _) = laplacian_spectrum(adj)?;
    Ok(largest_gap(&values, l_max))
}

fn cluster_from_spectrum(values: &[f64], vectors: &DMatrix<f64>, l_hat: usize, seed: u64) -> ClusteringResult {
    let n = vectors.nrows();
    let mut emb = vectors.columns(0, l_hat).into_owned();
    for mut row in emb.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row /= norm;
        }
    }
    let params = KMeansParams::new(l_hat, seed);
    let km = kmeans(&emb, &params);
    let n_eig = n.min((l_hat + 1).max(DEFAULT_L_MAX + 1));
    ClusteringResult {
        labels: km.labels,
        l_hat,
        eigenvalues: values[..n_eig].to_vec(),
        kmeans: KMeansMeta {
            restarts: params.restarts,
            max_iter: params.max_iter,
            seed,
            best_restart: km.best_restart,
            inertia: km.inertia,
        },
    }
}

/// Embed into the `l_hat` bottom eigenvectors of `L_sym`, normalize rows, and run k-means++.
pub fn spectral_cluster(adj: &Adjacency, l_hat: usize, seed: u64) -> Result<ClusteringResult> {
    let n = adj.len();
    if l_hat == 0 || l_hat > n {
        return Err(Error::InvalidInput(format!("number of clusters {l_hat} must lie in 1..={n}")));
    }
    let (values, vectors) = laplacian_spectrum(adj)?;
    Ok(cluster_from_spectrum(&values, &vectors, l_hat, seed))
}

/// Estimate `L̂` by the eigengap (unless `forced`) and cluster, sharing one eigendecomposition.
pub fn cluster_auto(adj: &Adjacency, forced: Option<usize>, l_max: usize, seed: u64) -> Result<ClusteringResult> {
    let n = adj.len();
    let (values, vectors) = laplacian_spectrum(adj)?;
    let l_hat = match forced {
        Some(l) => l,
        None => {
            if l_max == 0 {
                return Err(Error::InvalidInput("L_max must be positive".into()));
            }
            if n == 1 { 1 } else { largest_gap(&values, l_max.min(n)) }
        }
    };
    if l_hat == 0 || l_hat > n {
        return Err(Error::InvalidInput(format!("number of clusters {l_hat} must lie in 1..={n}")));
    }
    Ok(cluster_from_spectrum(&values, &vectors, l_hat, seed))
}

/// Connected components over positive entries, numbered by smallest member index.
pub fn connected_components(adj: &Adjacency) -> Vec<usize> {
    let w = adj.weights();
    let n = w.nrows();
    let mut labels = vec![usize::MAX; n];
    let mut next = 0;
    for start in 0..n {
        if labels[start] != usize::MAX {
            continue;
        }
        labels[start] = next;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for u in 0..n {
                if w[(v, u)] > 0.0 && labels[u] == usize::MAX {
                    labels[u] = next;
                    stack.push(u);
                }
            }
        }
        next += 1;
    }
    labels
}
