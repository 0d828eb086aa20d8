mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rpsc::metrics::{self, theorem};
use rpsc::spectral::{self, kmeans};
use rpsc::ssc::{self, admm, SscConfig};
use rpsc::synth::{self, intersecting_pair, random_orthonormal_basis, UnionModel};
use rpsc::tsc::{self, TscConfig};
use rpsc::{make_projector, Adjacency, DataSet, ProjectionKind};

fn kind() -> impl Strategy<Value = ProjectionKind> {
    prop::sample::select(ProjectionKind::ALL.to_vec())
}

fn labels(n: usize, k: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..k, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn affinity_symmetric_and_bounded(m in 3usize..20, da in 1usize..4, db in 1usize..4, seed in any::<u64>()) {
        prop_assume!(da <= m && db <= m);
        let a = random_orthonormal_basis(m, da, seed).unwrap();
        let b = random_orthonormal_basis(m, db, seed ^ 0xFF).unwrap();
        let ab = synth::affinity(&a, &b).unwrap();
        let ba = synth::affinity(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&ab));
    }

    #[test]
    fn intersecting_pair_affinity(d in 1usize..6, extra in 0usize..10, t_frac in 0.0f64..=1.0, seed in any::<u64>()) {
        let t = (t_frac * d as f64).round() as usize;
        let m = 2 * d - t + extra;
        let (a, b) = intersecting_pair(m, d, t, seed).unwrap();
        let aff = synth::affinity(&a, &b).unwrap();
        prop_assert!((aff - (t as f64 / d as f64).sqrt()).abs() <= 1e-10);
    }

    #[test]
    fn generated_points_lie_in_their_subspace(m in 4usize..15, d in 1usize..4, n in 1usize..10, seed in any::<u64>()) {
        let bases = vec![random_orthonormal_basis(m, d, seed).unwrap(), random_orthonormal_basis(m, d, !seed).unwrap()];
        let model = UnionModel::new(bases.clone(), vec![n, n + 1], seed).unwrap();
        let data = synth::generate(&model);
        let again = synth::generate(&model);
        prop_assert_eq!(data.points(), again.points());
        for (j, &l) in data.labels().unwrap().iter().enumerate() {
            let y = data.points().column(j);
            let u = bases[l].matrix();
            prop_assert!((y - u * u.tr_mul(&y)).norm() <= 1e-10);
            prop_assert!((y.norm() - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn projection_is_linear_and_deterministic(k in kind(), m in 1usize..70, pf in 0.01f64..=1.0, seed in any::<u64>(),
                                             alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
        let p = ((pf * m as f64).ceil() as usize).clamp(1, m);
        let proj = make_projector(k, m, p, seed).unwrap();
        prop_assert_eq!(proj.to_dense(), make_projector(k, m, p, seed).unwrap().to_dense());
        let mut r = rng(seed);
        let x = gaussian_matrix(m, 1, &mut r).column(0).into_owned();
        let y = gaussian_matrix(m, 1, &mut r).column(0).into_owned();
        let lhs = proj.apply_vector(&(&x * alpha + &y * beta)).unwrap();
        let rhs = proj.apply_vector(&x).unwrap() * alpha + proj.apply_vector(&y).unwrap() * beta;
        prop_assert!((lhs - rhs).amax() <= 1e-8);
    }

    #[test]
    fn ce_relabeling_and_symmetry(
        (pred, truth) in (1usize..30).prop_flat_map(|n| (labels(n, 5), labels(n, 5))),
        shift in 1usize..50,
    ) {
        let ce = metrics::clustering_error(&pred, &truth).unwrap();
        let relabeled: Vec<usize> = pred.iter().map(|&l| (4 - l) * 7 + shift).collect();
        prop_assert!((metrics::clustering_error(&relabeled, &truth).unwrap() - ce).abs() < 1e-15);
        let truth2: Vec<usize> = truth.iter().map(|&l| l * 11 + shift).collect();
        prop_assert!((metrics::clustering_error(&pred, &truth2).unwrap() - ce).abs() < 1e-15);
        prop_assert!((metrics::clustering_error(&truth, &pred).unwrap() - ce).abs() < 1e-15);
        prop_assert!((0.0..1.0).contains(&ce));
    }

    #[test]
    fn tsc_invariants(n in 3usize..30, m in 2usize..10, qf in 0.0f64..1.0, c in 1e-3f64..1e3, e in -20i32..20, seed in any::<u64>()) {
        let q = 1 + (qf * (n - 2) as f64) as usize;
        let x = gaussian_matrix(m, n, &mut rng(seed));
        let cfg = TscConfig::with_q(q);
        let plain = DataSet::new(x.clone(), None).unwrap();
        let a = tsc::tsc_adjacency(&plain, &cfg).unwrap();
        // Scaling by a power of two is exact in floating point, so the graph is bit-identical.
        let b = tsc::tsc_adjacency(&DataSet::new(&x * 2f64.powi(e), None).unwrap(), &cfg).unwrap();
        prop_assert_eq!(a.weights(), b.weights());
        // Any other factor: same neighbour sets, weights equal up to rounding.
        let scaled = DataSet::new(&x * c, None).unwrap();
        prop_assert_eq!(tsc::tsc_neighbors(&plain, q).unwrap(), tsc::tsc_neighbors(&scaled, q).unwrap());
        let b = tsc::tsc_adjacency(&scaled, &cfg).unwrap();
        prop_assert!((a.weights() - b.weights()).amax() <= 1e-12);
        let w = a.weights();
        prop_assert_eq!(w, &w.transpose());
        for i in 0..n {
            prop_assert_eq!(w[(i, i)], 0.0);
            prop_assert!(w.row(i).iter().filter(|&&v| v > 0.0).count() >= q);
        }
        // Neighbour weights fall as the spherical distance grows.
        let norms: Vec<f64> = x.column_iter().map(|c| c.norm()).collect();
        for (j, nbrs) in tsc::tsc_neighbors(&DataSet::new(x.clone(), None).unwrap(), q).unwrap().iter().enumerate() {
            let mut pairs: Vec<(f64, f64)> = nbrs.iter().map(|&i| {
                let cos = (x.column(i).dot(&x.column(j)).abs() / (norms[i] * norms[j])).min(1.0);
                (cos.acos(), tsc::spherical_weight(cos))
            }).collect();
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            for w in pairs.windows(2) {
                prop_assert!(w[1].1 <= w[0].1);
            }
        }
    }

    #[test]
    fn laplacian_spectrum_in_range(n in 1usize..25, density in 0.0f64..1.0, seed in any::<u64>()) {
        use rand::Rng;
        let mut r = rng(seed);
        let mut w = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                if r.random_bool(density) {
                    let v = r.random_range(0.01..5.0);
                    w[(i, j)] = v;
                    w[(j, i)] = v;
                }
            }
        }
        let (vals, _) = spectral::laplacian_spectrum(&Adjacency::new(w).unwrap()).unwrap();
        prop_assert!(vals.iter().all(|&v| (-1e-8..=2.0 + 1e-8).contains(&v)));
    }

    #[test]
    fn kmeans_is_deterministic(n in 2usize..40, k in 1usize..5, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let pts = gaussian_matrix(n, 3, &mut rng(seed));
        let params = kmeans::KMeansParams::new(k, seed);
        let a = kmeans::kmeans(&pts, &params);
        let b = kmeans::kmeans(&pts, &params);
        prop_assert_eq!(a.labels, b.labels);
    }

    #[test]
    fn theorem_terms_monotone_in_p(d in 1usize..20, l in 1usize..10, tau in 0.1f64..5.0, c in 0.01f64..1.0, p in 1usize..500) {
        prop_assert!(theorem::ssc_projection_term(d, l, tau, c, p + 1) <= theorem::ssc_projection_term(d, l, tau, c, p));
        prop_assert!(theorem::tsc_projection_term(d, c, p + 1) <= theorem::tsc_projection_term(d, c, p));
    }

    #[test]
    fn perturbation_norm_symmetric(k in kind(), d in 1usize..5, pf in 0.2f64..=1.0, seed in any::<u64>()) {
        let m = 24;
        let p = ((pf * m as f64) as usize).max(d);
        let a = random_orthonormal_basis(m, d, seed).unwrap();
        let b = random_orthonormal_basis(m, d, !seed).unwrap();
        let proj = make_projector(k, m, p, seed).unwrap();
        let ab = metrics::perturbation_norm(&a, &b, &proj).unwrap();
        let ba = metrics::perturbation_norm(&b, &a, &proj).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12);
    }

    #[test]
    fn projected_cross_norm_triangle_bound(k in kind(), d in 1usize..5, pf in 0.3f64..=1.0, t in 0usize..3, seed in any::<u64>()) {
        let m = 32;
        let p = ((pf * m as f64) as usize).max(2 * d);
        let (a, b) = intersecting_pair(m, d, t.min(d), seed).unwrap();
        let proj = make_projector(k, m, p, seed).unwrap();
        let aff = synth::affinity(&a, &b).unwrap();
        let lhs = metrics::projected_cross_norm(&a, &b, &proj).unwrap();
        let rhs = aff + metrics::perturbation_norm(&a, &b, &proj).unwrap();
        prop_assert!(lhs <= rhs + 1e-8, "{lhs} > {rhs}");

        // ‖V_l⁺V_k‖_F/√d ≤ ‖(V_lᵀV_l)⁻¹‖₂ (aff + ‖U_lᵀ(ΦᵀΦ − I)U_k‖₂) for equal dimensions.
        let (va, vb) = (proj.apply_matrix(a.matrix()).unwrap(), proj.apply_matrix(b.matrix()).unwrap());
        let q_norm = 1.0 / va.singular_values().min().powi(2);
        let pert = (va.tr_mul(&vb) - a.matrix().tr_mul(b.matrix())).singular_values().max();
        let thm3 = metrics::projected_affinity_thm3(&va, &vb).unwrap();
        prop_assert!(thm3 <= q_norm * (aff + pert) + 1e-8, "{thm3} > {}", q_norm * (aff + pert));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn exact_ssc_scale_invariant_with_certificate(seed in any::<u64>(), c in 0.01f64..100.0) {
        let m = 6;
        let model = UnionModel::new(
            vec![random_orthonormal_basis(m, 2, seed).unwrap(), random_orthonormal_basis(m, 2, !seed).unwrap()],
            vec![6, 6],
            seed,
        ).unwrap();
        let data = synth::generate(&model);
        let cfg = SscConfig::exact();
        let a = ssc::ssc_coefficients(&data, &cfg).unwrap();
        let b = ssc::ssc_coefficients(&data.scaled(c), &cfg).unwrap();
        prop_assert!((&a.coefficients - &b.coefficients).amax() <= 1e-8);
        let x = data.points();
        for (j, col) in a.columns.iter().enumerate() {
            let nu = col.dual.as_ref().unwrap();
            let g = x.tr_mul(nu);
            for i in 0..x.ncols() {
                if i == j {
                    continue;
                }
                prop_assert!(g[i].abs() <= 1.0 + 1e-8);
                let z = a.coefficients[(i, j)];
                if z.abs() > 1e-9 {
                    prop_assert!((g[i] - z.signum()).abs() <= 1e-8);
                }
            }
        }
    }

    #[test]
    fn admm_iterates_are_certified_by_lasso_dual(seed in any::<u64>(), n in 6usize..20, m in 3usize..10) {
        let mut r = rng(seed);
        let a = unit_columns(gaussian_matrix(m, n, &mut r));
        let b = unit_columns(gaussian_matrix(m, 1, &mut r)).column(0).into_owned();
        let mu = a.tr_mul(&b).amax();
        let w = mu / 20.0;
        let settings = admm::AdmmSettings { rho: mu, max_iter: 100_000, tol_abs: 1e-9, tol_rel: 1e-9, track_objective: true };
        let res = admm::lasso_admm(&a, &b, w, &settings).unwrap();
        prop_assert!(res.converged);
        // Scaling the residual into {‖Aᵀν‖_∞ ≤ w} gives a dual-feasible point and a lower bound.
        let resid = &b - &a * &res.coefficients;
        let nu = &resid * (w / a.tr_mul(&resid).amax()).min(1.0);
        let lower = b.dot(&nu) - 0.5 * nu.norm_squared();
        for &f in &res.objective_trace {
            prop_assert!(f >= lower - 1e-12);
        }
        let tol = settings.tol_abs;
        prop_assert!(res.primal_residual <= (n as f64).sqrt() * tol + tol * (1.0 + res.coefficients.norm()));
        // Iterates within ~1e-9 of optimal leave a gap of the same order, inflated by conditioning.
        prop_assert!(res.objective - lower <= 1e-6 * (1.0 + res.objective), "gap {}", res.objective - lower);
    }

    #[test]
    fn exact_support_covers_subspace_dimension(seed in any::<u64>()) {
        let (m, d) = (12, 3);
        let model = UnionModel::new(
            synth::shared_intersection_family(m, &[d, d], 0, seed).unwrap(),
            vec![10, 10],
            seed,
        ).unwrap();
        let data = synth::generate(&model);
        let (adj, sol) = ssc::ssc_adjacency_with_report(&data, &SscConfig::exact()).unwrap();
        let truth = data.labels().unwrap();
        prop_assume!(!metrics::false_connections(&adj, truth).unwrap().has_false);
        for j in 0..data.len() {
            let support = sol.coefficients.column(j).iter().filter(|v| v.abs() > 1e-9).count();
            prop_assert!(support >= d);
        }
    }
}

#[test]
fn distortion_rate_falls_with_p() {
    let ps = [25usize, 50, 100, 200];
    for kind in [ProjectionKind::Gaussian, ProjectionKind::HadamardSign] {
        let mut mean = [0.0; 4];
        for rep in 0..10u64 {
            let rates: Vec<f64> = ps
                .iter()
                .map(|&p| rpsc::project::jl_distortion_survey(kind, 256, p, 0.3, 200, rep).unwrap())
                .collect();
            let inversions = rates.windows(2).filter(|w| w[1] > w[0]).count();
            assert!(inversions <= 1, "{kind} rep {rep}: {rates:?}");
            for (m, r) in mean.iter_mut().zip(&rates) {
                *m += r / 10.0;
            }
        }
        assert!(mean.windows(2).all(|w| w[1] <= w[0]), "{kind}: {mean:?}");
    }
}

/// The real part of a DFT row keeps half the energy except at the DC and Nyquist
/// rows, so `E‖Φx‖²` over random unit `x` is `(1/p) Σ_k c_k`, `c_k ∈ {1, ½}`.
#[test]
fn fourier_sign_energy_matches_row_average() {
    let (m, p) = (256, 100);
    let proj = make_projector(ProjectionKind::FourierSign, m, p, 4).unwrap();
    let want: f64 = proj.rows().unwrap().iter().map(|&r| if r == 0 || 2 * r == m { 1.0 } else { 0.5 }).sum::<f64>() / p as f64;
    let dense = proj.to_dense();
    let exact = dense.norm_squared() / m as f64;
    assert!((exact - want).abs() < 1e-12);
    let mut r = rng(8);
    let trials = 2000;
    let mean = (0..trials)
        .map(|_| proj.apply_matrix(&unit_columns(gaussian_matrix(m, 1, &mut r))).unwrap().norm_squared())
        .sum::<f64>()
        / trials as f64;
    assert!((mean - want).abs() < 0.02, "{mean} vs {want}");
}

#[test]
fn tsc_has_no_false_connections_on_orthogonal_subspaces() {
    for seed in 0..20 {
        let model =
            UnionModel::new(synth::shared_intersection_family(30, &[3, 3], 0, seed).unwrap(), vec![30, 30], seed)
                .unwrap();
        let data = synth::generate(&model);
        let adj = tsc::tsc_adjacency(&data, &TscConfig::with_q(4)).unwrap();
        assert_eq!(metrics::false_connections(&adj, data.labels().unwrap()).unwrap().count, 0);
    }
}

#[test]
fn unit_vector_helper_norms() {
    let x = unit_columns(DMatrix::from_fn(3, 4, |i, j| (i + j + 1) as f64));
    assert!(x.column_iter().all(|c| (c.norm() - 1.0).abs() < 1e-15));
    let _ = DVector::<f64>::zeros(1);
}
