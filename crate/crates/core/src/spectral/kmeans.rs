//! Seeded k-means with k-means++ initialisation and restarts.

use nalgebra::DMatrix;
use rand::Rng as _;

use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KMeansParams {
    pub k: usize,
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl KMeansParams {
    pub fn new(k: usize, seed: u64) -> Self {
        Self { k, restarts: 10, max_iter: 100, seed }
    }
}

#[derive(Debug, Clone)]
pub struct KMeansResult {
    /// Labels relabelled in order of first appearance.
    pub labels: Vec<usize>,
    pub inertia: f64,
    /// Restart that produced the result (ties keep the earliest).
    pub best_restart: usize,
}

fn sq_dist(points: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>, c: usize) -> f64 {
    points.row(i).iter().zip(centers.row(c).iter()).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn plus_plus_init(points: &DMatrix<f64>, k: usize, rng: &mut seed::Rng) -> DMatrix<f64> {
    let (n, dim) = points.shape();
    let mut centers = DMatrix::zeros(k, dim);
    let first = rng.random_range(0..n);
    centers.set_row(0, &points.row(first));
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(points, i, &centers, 0)).collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 && r < w {
                    chosen = i;
                    break;
                }
                r -= w;
            }
            // Guard against rounding landing on a zero-weight tail point.
            if d2[chosen] == 0.0 {
                chosen = d2.iter().rposition(|&w| w > 0.0).unwrap_or(chosen);
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centers.set_row(c, &points.row(pick));
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(points, i, &centers, c));
        }
    }
    centers
}

fn lloyd(points: &DMatrix<f64>, mut centers: DMatrix<f64>, max_iter: usize) -> (Vec<usize>, f64) {
    let (n, dim) = points.shape();
    let k = centers.nrows();
    let mut labels = vec![usize::MAX; n];
    for _ in 0..max_iter {
        let mut changed = false;
        for i in 0..n {
            let best = (0..k)
                .map(|c| (sq_dist(points, i, &centers, c), c))
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                .map(|(_, c)| c)
                .unwrap_or(0);
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = DMatrix::zeros(k, dim);
        let mut counts = vec![0usize; k];
        for i in 0..n {
            let mut row = sums.row_mut(labels[i]);
            row += points.row(i);
            counts[labels[i]] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers.set_row(c, &(sums.row(c) / counts[c] as f64));
            } else {
                // Re-seed an empty cluster at the point farthest from its center.
                let far = (0..n)
                    .map(|i| (sq_dist(points, i, &centers, labels[i]), i))
                    .max_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)))
                    .map(|(_, i)| i)
                    .unwrap_or(0);
                centers.set_row(c, &points.row(far));
                labels[far] = c;
            }
        }
    }
    let inertia = (0..n).map(|i| sq_dist(points, i, &centers, labels[i])).sum();
    (labels, inertia)
}

fn relabel_by_first_appearance(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

/// Cluster the rows of `points` into `params.k` groups.
pub fn kmeans(points: &DMatrix<f64>, params: &KMeansParams) -> KMeansResult {
    let n = points.nrows();
    assert!(params.k >= 1 && params.k <= n, "k must lie in 1..=N");
    let mut best: Option<KMeansResult> = None;
    for r in 0..params.restarts.max(1) {
        let mut rng = seed::rng(seed::derive(params.seed, &[r as u64]));
        let centers = plus_plus_init(points, params.k, &mut rng);
        let (labels, inertia) = lloyd(points, centers, params.max_iter);
        if best.as_ref().is_none_or(|b| inertia < b.inertia) {
            best = Some(KMeansResult { labels, inertia, best_restart: r });
        }
    }
    let mut best = best.expect("at least one restart");
    best.labels = relabel_by_first_appearance(&best.labels);
    best
}
