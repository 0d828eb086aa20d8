//! Independent reference implementations used to cross-check the library.
//! Each one takes the slow, obvious route.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(r: usize, c: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn unit_columns(mut x: DMatrix<f64>) -> DMatrix<f64> {
    for mut c in x.column_iter_mut() {
        let n = c.norm();
        c /= n;
    }
    x
}

fn compact(labels: &[usize]) -> Vec<usize> {
    let mut map = BTreeMap::new();
    for &l in labels {
        let next = map.len();
        map.entry(l).or_insert(next);
    }
    labels.iter().map(|l| map[l]).collect()
}

/// Heap's algorithm; calls `f` on every permutation of `0..k`.
fn for_each_permutation(k: usize, f: &mut impl FnMut(&[usize])) {
    let mut a: Vec<usize> = (0..k).collect();
    let mut c = vec![0; k];
    f(&a);
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            f(&a);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Clustering error by trying every relabeling of the predicted groups.
pub fn brute_force_ce(pred: &[usize], truth: &[usize]) -> f64 {
    let p = compact(pred);
    let t = compact(truth);
    let k = p.iter().chain(&t).max().map_or(0, |m| m + 1);
    let mut best = 0;
    for_each_permutation(k, &mut |perm| {
        let agree = p.iter().zip(&t).filter(|(a, b)| perm[**a] == **b).count();
        best = best.max(agree);
    });
    if pred.is_empty() {
        0.0
    } else {
        1.0 - best as f64 / pred.len() as f64
    }
}

fn combinations(n: usize, r: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == r {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < r - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, r, cur, f);
            cur.pop();
        }
    }
    rec(0, n, r, &mut Vec::with_capacity(r), f);
}

fn numeric_rank(a: &DMatrix<f64>) -> usize {
    let sv = a.singular_values();
    let tol = 1e-10 * sv.max().max(1.0);
    sv.iter().filter(|&&s| s > tol).count()
}

/// `min ‖z‖₁ s.t. A z = b` by enumerating basic solutions of the split LP:
/// some optimum is supported on `rank(A)` linearly independent columns.
pub fn vertex_enumeration_l1(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<f64> {
    let r = numeric_rank(a);
    if r == 0 {
        return (b.norm() < 1e-12).then_some(0.0);
    }
    let mut best: Option<f64> = None;
    combinations(a.ncols(), r, &mut |s| {
        let sub = DMatrix::from_fn(a.nrows(), r, |i, k| a[(i, s[k])]);
        if numeric_rank(&sub) < r {
            return;
        }
        let z = sub.clone().svd(true, true).solve(b, 1e-12).expect("svd solve");
        if (&sub * &z - b).norm() > 1e-9 * (1.0 + b.norm()) {
            return;
        }
        let obj = z.lp_norm(1);
        best = Some(best.map_or(obj, |v: f64| v.min(obj)));
    });
    best
}

/// Coordinatewise Lasso optimality violation for `w‖z‖₁ + ½‖b − Az‖²`.
pub fn lasso_kkt_violation(a: &DMatrix<f64>, b: &DVector<f64>, z: &DVector<f64>, w: f64) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.ncols() {
        let g: f64 = (0..a.nrows()).map(|r| a[(r, i)] * (b[r] - (0..a.ncols()).map(|k| a[(r, k)] * z[k]).sum::<f64>())).sum();
        let v = if z[i] > 0.0 {
            (g - w).abs()
        } else if z[i] < 0.0 {
            (g + w).abs()
        } else {
            (g.abs() - w).max(0.0)
        };
        worst = worst.max(v);
    }
    worst
}

/// TSC adjacency from its definition: per column, sort all other points.
pub fn brute_force_tsc(x: &DMatrix<f64>, q: usize) -> DMatrix<f64> {
    let n = x.ncols();
    let dot = |i: usize, j: usize| (0..x.nrows()).map(|r| x[(r, i)] * x[(r, j)]).sum::<f64>();
    let mut z = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut others: Vec<(f64, usize)> = (0..n).filter(|&i| i != j).map(|i| (dot(i, j).abs(), i)).collect();
        others.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        for &(ip, i) in others.iter().take(q) {
            let c = (ip / (dot(i, i).sqrt() * dot(j, j).sqrt())).min(1.0);
            z[(i, j)] = (-2.0 * c.acos()).exp();
        }
    }
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                a[(i, j)] = z[(i, j)].abs() + z[(j, i)].abs();
            }
        }
    }
    a
}

/// Components by union-find over positive off-diagonal entries.
pub fn union_find_components(w: &DMatrix<f64>) -> Vec<usize> {
    let n = w.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if w[(i, j)] > 0.0 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    compact(&roots)
}

/// Real part of the partial DFT with random signs, built entry by entry.
pub fn dense_fourier_sign(m: usize, rows: &[usize], signs: &[f64]) -> DMatrix<f64> {
    let p = rows.len();
    DMatrix::from_fn(p, m, |k, i| {
        let angle = -2.0 * PI * ((rows[k] * i) % m) as f64 / m as f64;
        angle.cos() * signs[i] / (p as f64).sqrt()
    })
}

/// Selected Sylvester–Hadamard rows (order `padded`) with random signs, built entry by entry.
pub fn dense_hadamard_sign(m: usize, padded: usize, rows: &[usize], signs: &[f64]) -> DMatrix<f64> {
    assert!(padded.is_power_of_two() && padded >= m);
    let p = rows.len();
    DMatrix::from_fn(p, m, |k, i| {
        let s = if (rows[k] & i).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        s * signs[i] / (p as f64).sqrt()
    })
}

/// `‖V_l⁺ V_k‖_F / √d_k` through the SVD pseudo-inverse.
pub fn pinv_affinity(v_l: &DMatrix<f64>, v_k: &DMatrix<f64>) -> f64 {
    let pinv = v_l.clone().pseudo_inverse(1e-12).expect("pseudo-inverse");
    (pinv * v_k).norm() / (v_k.ncols() as f64).sqrt()
}

/// Subspace affinity from principal-angle cosines of orthonormalized bases.
pub fn affinity_by_angles(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let qa = a.clone().qr().q();
    let qb = b.clone().qr().q();
    let sv = (qa.transpose() * qb).singular_values();
    let d = a.ncols().min(b.ncols()) as f64;
    (sv.iter().map(|s| s.min(1.0).powi(2)).sum::<f64>() / d).sqrt()
}

/// Random block-diagonal weights with `sizes` blocks, vertices shuffled.
/// Returns the weights and the block of each vertex.
pub fn random_block_graph(sizes: &[usize], rng: &mut ChaCha8Rng) -> (DMatrix<f64>, Vec<usize>) {
    let n: usize = sizes.iter().sum();
    let mut truth = Vec::with_capacity(n);
    for (b, &s) in sizes.iter().enumerate() {
        truth.extend(std::iter::repeat(b).take(s));
    }
    // Fisher–Yates shuffle of the vertex order.
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        truth.swap(i, j);
    }
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            if truth[i] == truth[j] {
                let v = rng.random_range(0.5..1.0);
                w[(i, j)] = v;
                w[(j, i)] = v;
            }
        }
    }
    (w, truth)
}
