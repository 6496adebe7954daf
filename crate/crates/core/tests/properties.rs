mod common;

use std::f64::consts::PI;

use multimodel::biclustering::{codelength, extract_biclusters, mdl_select, Bicluster, BiclusterConfig, ResidualSnapshot};
use multimodel::eval::{gnmi, misclassification_error, precision_recall, GroupCover};
use multimodel::geometry::{consensus_set, DataSet, Model, ModelFamily};
use multimodel::l1nmf::{admm_l1_col, admm_l1_row, irls_rank_one, rank_one_l1nmf, support, SolverConfig};
use multimodel::sampling::{build_preference_matrix, draw_hypotheses, SamplingConfig};
use multimodel::sketch::{hadamard_apply, leverage_scores, FctEmbedding};
use multimodel::validation::{binomial_tail, exclusion_filter, log10_nfa_from_counts, NfaConfig};
use nalgebra::{DMatrix, DVector, Rotation2, Rotation3, Vector2, Vector3};
use proptest::prelude::*;

fn points_2d(n: usize) -> impl Strategy<Value = Vec<[f64; 2]>> {
    prop::collection::vec(prop::array::uniform2(-1.0..1.0f64), n)
}

fn binary_matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    (2..=max_rows, 2..=max_cols).prop_flat_map(|(m, n)| {
        prop::collection::vec(prop::bool::weighted(0.35), m * n)
            .prop_map(move |bits| DMatrix::from_fn(m, n, |i, j| f64::from(u8::from(bits[j * m + i]))))
    })
}

fn masked_objective(a: &DMatrix<f64>, u: &DVector<f64>, v: &DVector<f64>, rows: &[usize], cols: &[usize]) -> f64 {
    rows.iter()
        .flat_map(|&i| cols.iter().map(move |&j| (i, j)))
        .map(|(i, j)| (a[(i, j)] - u[i] * v[j]).abs())
        .sum()
}

fn cover(universe: usize, groups: Vec<Vec<usize>>) -> GroupCover {
    GroupCover::new(universe, groups).unwrap()
}

fn groups_strategy(universe: usize) -> impl Strategy<Value = Vec<Vec<usize>>> {
    prop::collection::vec(prop::collection::btree_set(0..universe, 1..12), 0..5)
        .prop_map(|gs| gs.into_iter().map(|g| g.into_iter().collect()).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn error_vanishes_on_the_model(theta in 0.0..2.0 * PI, c in 0.0..1.0f64, t in -2.0..2.0f64,
                                   x in prop::array::uniform2(-2.0..2.0f64)) {
        let n = Vector2::new(theta.cos(), theta.sin());
        let line = Model::line(n, c).unwrap();
        let tangent = Vector2::new(-n.y, n.x);
        let on = n * c + tangent * t;
        prop_assert!(line.error(&[on.x, on.y]) < 1e-12);
        prop_assert!(line.error(&x) >= 0.0);

        let circle = Model::circle(Vector2::new(0.1, -0.2), 0.5 + c).unwrap();
        let on = Vector2::new(0.1, -0.2) + n * (0.5 + c);
        prop_assert!(circle.error(&[on.x, on.y]) < 1e-12);
        prop_assert!(circle.error(&x) >= 0.0);
    }

    #[test]
    fn error_invariant_under_rigid_motion(angle in 0.0..2.0 * PI, shift in prop::array::uniform2(-3.0..3.0f64),
                                          theta in 0.0..2.0 * PI, c in 0.0..1.0f64,
                                          x in prop::array::uniform2(-2.0..2.0f64)) {
        let rot = Rotation2::new(angle);
        let t = Vector2::from(shift);
        let p = Vector2::from(x);
        let moved = rot * p + t;

        let n = Vector2::new(theta.cos(), theta.sin());
        let line = Model::line(n, c).unwrap();
        let n2 = rot * n;
        let line2 = Model::line(n2, c + n2.dot(&t)).unwrap();
        prop_assert!((line.error(&x) - line2.error(&[moved.x, moved.y])).abs() < 1e-9);

        let center = Vector2::new(c, -c);
        let circle = Model::circle(center, 0.3 + c).unwrap();
        let circle2 = Model::circle(rot * center + t, 0.3 + c).unwrap();
        prop_assert!((circle.error(&x) - circle2.error(&[moved.x, moved.y])).abs() < 1e-9);
    }

    #[test]
    fn plane_error_invariant_under_rigid_motion(axis in prop::array::uniform3(-1.0..1.0f64), angle in 0.0..PI,
                                                shift in prop::array::uniform3(-3.0..3.0f64),
                                                normal in prop::array::uniform3(-1.0..1.0f64), c in 0.0..1.0f64,
                                                x in prop::array::uniform3(-2.0..2.0f64)) {
        let axis = Vector3::from(axis);
        let normal = Vector3::from(normal);
        prop_assume!(axis.norm() > 0.1 && normal.norm() > 0.1);
        let rot = Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle);
        let t = Vector3::from(shift);
        let n = normal.normalize();
        let plane = Model::plane(n, c).unwrap();
        let n2 = rot * n;
        let plane2 = Model::plane(n2, c + n2.dot(&t)).unwrap();
        let moved = rot * Vector3::from(x) + t;
        prop_assert!((plane.error(&x) - plane2.error(moved.as_slice())).abs() < 1e-9);
    }

    #[test]
    fn consensus_monotone_in_delta(pts in points_2d(60), theta in 0.0..PI, c in 0.0..0.5f64,
                                   d1 in 0.0..0.3f64, extra in 0.0..0.3f64) {
        let data = DataSet::from_points(&pts).unwrap();
        let line = Model::line(Vector2::new(theta.cos(), theta.sin()), c).unwrap();
        let small = consensus_set(&line, &data, d1);
        let large = consensus_set(&line, &data, d1 + extra);
        prop_assert!(small.iter().all(|i| large.binary_search(i).is_ok()));
    }

    #[test]
    fn least_squares_is_exact_on_exact_data(theta in 0.0..PI, c in 0.0..1.0f64, ts in prop::collection::vec(-1.0..1.0f64, 3..30),
                                            cx in -1.0..1.0f64, r in 0.1..2.0f64) {
        let n = Vector2::new(theta.cos(), theta.sin());
        let pts: Vec<[f64; 2]> = ts.iter().map(|&t| { let p = n * c + Vector2::new(-n.y, n.x) * t; [p.x, p.y] }).collect();
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let line = ModelFamily::Line2D.fit_least_squares(&refs).unwrap();
        prop_assert!(line.residual_sum(&refs) <= 1e-18);

        let spread: Vec<[f64; 2]> = ts.iter().enumerate()
            .map(|(k, _)| { let a = 2.0 * PI * k as f64 / ts.len() as f64; [cx + r * a.cos(), r * a.sin()] })
            .collect();
        let refs: Vec<&[f64]> = spread.iter().map(|p| p.as_slice()).collect();
        let circle = ModelFamily::Circle2D.fit_least_squares(&refs).unwrap();
        prop_assert!(circle.residual_sum(&refs) <= 1e-18);
    }

    #[test]
    fn binomial_tail_monotone(n in 0i64..400, p in 0.0..1.0f64) {
        let mut prev = 1.0;
        for k in 0..=n + 1 {
            let t = binomial_tail(n, k, p);
            prop_assert!((0.0..=1.0).contains(&t));
            prop_assert!(t <= prev * (1.0 + 1e-12));
            prev = t;
        }
    }

    #[test]
    fn nfa_decreases_with_more_inliers(m in 10usize..2000, wide_extra in 0usize..200, narrow in 0usize..400) {
        let wide = narrow + 1 + wide_extra;
        prop_assume!(wide <= m);
        let before = log10_nfa_from_counts(m, 2, narrow, wide, 3.0);
        let after = log10_nfa_from_counts(m, 2, narrow + 1, wide, 3.0);
        prop_assert!(after <= before + 1e-12);
    }

    #[test]
    fn exclusion_output_is_a_subsequence(pts in points_2d(80), thetas in prop::collection::vec(0.0..PI, 1..6)) {
        let data = DataSet::from_points(&pts).unwrap();
        let cfg = NfaConfig::new(0.05);
        let pairs: Vec<(Vec<usize>, Model)> = thetas.iter().map(|&t| {
            let m = Model::line(Vector2::new(t.cos(), t.sin()), 0.1).unwrap();
            (consensus_set(&m, &data, cfg.delta), m)
        }).collect();
        let kept = exclusion_filter(&pairs, &data, &cfg);
        prop_assert!(kept.windows(2).all(|w| w[0].index < w[1].index));
        prop_assert!(kept.iter().all(|k| k.index < pairs.len() && k.log10_nfa < 0.0));
    }

    #[test]
    fn sampling_is_indexed(pts in points_2d(30), seed in any::<u64>()) {
        let data = DataSet::from_points(&pts).unwrap();
        let short = draw_hypotheses(&data, ModelFamily::Line2D, &SamplingConfig::new(20, seed, 0.05)).unwrap();
        let long = draw_hypotheses(&data, ModelFamily::Line2D, &SamplingConfig::new(50, seed, 0.05)).unwrap();
        prop_assert_eq!(&short.hypotheses[..], &long.hypotheses[..20]);
        let again = draw_hypotheses(&data, ModelFamily::Line2D, &SamplingConfig::new(50, seed, 0.05)).unwrap();
        prop_assert_eq!(build_preference_matrix(&data, &long), build_preference_matrix(&data, &again));
    }

    #[test]
    fn columns_match_recomputed_consensus(pts in points_2d(40), seed in any::<u64>()) {
        let data = DataSet::from_points(&pts).unwrap();
        let pool = draw_hypotheses(&data, ModelFamily::Line2D, &SamplingConfig::new(30, seed, 0.05)).unwrap();
        let a = build_preference_matrix(&data, &pool);
        for j in 0..a.ncols() {
            let h = &pool.hypotheses[a.col_meta()[j]];
            let mut expect = consensus_set(&h.model, &data, 0.05);
            expect.extend(&h.mss);
            expect.sort_unstable();
            expect.dedup();
            prop_assert_eq!(a.column(j), &expect[..]);
        }
    }

    #[test]
    fn factors_nonnegative_with_unit_gauge(a in binary_matrix(30, 30)) {
        let f = rank_one_l1nmf(&a, &SolverConfig::default());
        prop_assert!(f.u.iter().chain(f.v.iter()).all(|x| *x >= 0.0));
        let umax = f.u.amax();
        prop_assert!(umax == 0.0 || (umax - 1.0).abs() < 1e-12);
    }

    #[test]
    fn update_steps_do_not_increase_their_objectives(a in binary_matrix(30, 30)) {
        let cfg = SolverConfig::default();
        let (u, v0) = irls_rank_one(&a, &cfg);
        prop_assert!(u.iter().chain(v0.iter()).all(|x| *x >= 0.0));
        let all_cols: Vec<usize> = (0..a.ncols()).collect();
        let rows = support(&u, 1e-4);
        let v = admm_l1_col(&a, &u, &rows, &v0, &cfg);
        prop_assert!(v.iter().all(|x| *x >= 0.0));
        let before = masked_objective(&a, &u, &v0, &rows, &all_cols);
        let after = masked_objective(&a, &u, &v, &rows, &all_cols);
        prop_assert!(after <= before + cfg.admm_tol * (1.0 + before));

        let cols = support(&v, 1e-4);
        let all_rows: Vec<usize> = (0..a.nrows()).collect();
        let u2 = admm_l1_row(&a, &v, &cols, &u, &cfg);
        prop_assert!(u2.iter().all(|x| *x >= 0.0));
        let before = masked_objective(&a, &u, &v, &all_rows, &cols);
        let after = masked_objective(&a, &u2, &v, &all_rows, &cols);
        prop_assert!(after <= before + cfg.admm_tol * (1.0 + before));
    }

    #[test]
    fn hadamard_is_an_involution_up_to_scale(k in 0u32..9, seed in any::<u64>()) {
        let s = 1usize << k;
        let mut r = common::rng(seed);
        let x: Vec<f64> = (0..s).map(|_| rand::Rng::random_range(&mut r, -1.0..1.0)).collect();
        let mut y = x.clone();
        hadamard_apply(&mut y);
        hadamard_apply(&mut y);
        for (a, b) in x.iter().zip(&y) {
            prop_assert!((a * s as f64 - b).abs() < 1e-9);
        }
    }

    #[test]
    fn fct_is_linear_and_deterministic(m in 1usize..100, h in 1usize..16, seed in any::<u64>(),
                                       alpha in -2.0..2.0f64, beta in -2.0..2.0f64, data_seed in any::<u64>()) {
        let emb = FctEmbedding::new(m, h, seed);
        prop_assert_eq!(&emb, &FctEmbedding::new(m, h, seed));
        let mut r = common::rng(data_seed);
        let mut draw = || (0..m).map(|_| rand::Rng::random_range(&mut r, -1.0..1.0)).collect::<Vec<f64>>();
        let (x, y) = (draw(), draw());
        let combo: Vec<f64> = x.iter().zip(&y).map(|(a, b)| alpha * a + beta * b).collect();
        let apply = |v: &[f64]| { let mut out = vec![0.0; h]; emb.apply_vec(v, &mut out); out };
        let (px, py, pc) = (apply(&x), apply(&y), apply(&combo));
        for k in 0..h {
            let expect = alpha * px[k] + beta * py[k];
            let scale = 1.0 + px[k].abs() + py[k].abs();
            prop_assert!((pc[k] - expect).abs() < 1e-9 * scale);
        }
    }

    #[test]
    fn codelength_symmetric(p in 1usize..5000, frac in 0.0..1.0f64) {
        let k = ((p as f64) * frac) as usize;
        prop_assert!((codelength(p, k) - codelength(p, p - k)).abs() < 1e-9 * (1.0 + codelength(p, k)));
        prop_assert!(codelength(p, k) >= (p as f64).log2() - 1e-12);
    }

    #[test]
    fn deflation_supports_disjoint_and_residual_shrinks(a in binary_matrix(40, 40)) {
        let run = extract_biclusters(&a, &BiclusterConfig::default());
        for (t, b) in run.biclusters.iter().enumerate() {
            for c in &run.biclusters[t + 1..] {
                prop_assert!(b.cols.iter().all(|j| c.cols.binary_search(j).is_err()));
            }
        }
        let total = a.iter().filter(|x| **x != 0.0).count();
        let mut prev = total;
        for r in &run.residuals {
            prop_assert!(r.nnz < prev);
            prev = r.nnz;
        }
        prop_assert!(run.k_selected <= run.biclusters.len());
    }

    #[test]
    fn mdl_ignores_appended_empty_biclusters(a in binary_matrix(40, 40), extra in 1usize..4) {
        let mut run = extract_biclusters(&a, &BiclusterConfig::default());
        prop_assume!(!run.biclusters.is_empty());
        let (m, n) = a.shape();
        let k = mdl_select(m, n, &run, false);
        let last: ResidualSnapshot = *run.residuals.last().unwrap();
        for _ in 0..extra {
            run.biclusters.push(Bicluster {
                u: DVector::zeros(m),
                v: DVector::zeros(n),
                rows: Vec::new(),
                cols: Vec::new(),
                objective: 0.0,
            });
            run.residuals.push(last);
        }
        prop_assert_eq!(mdl_select(m, n, &run, false), k);
    }

    #[test]
    fn metrics_in_range_and_invariant(g1 in groups_strategy(40), g2 in groups_strategy(40)) {
        let (a, b) = (cover(40, g1.clone()), cover(40, g2.clone()));
        let (p, r) = precision_recall(&a, &b);
        let nmi = gnmi(&a, &b);
        for x in [p, r, nmi] {
            prop_assert!((0.0..=1.0 + 1e-12).contains(&x));
        }
        let mut rev1 = g1.clone();
        rev1.reverse();
        let mut rev2 = g2.clone();
        rev2.reverse();
        let (p2, r2) = precision_recall(&cover(40, rev1.clone()), &cover(40, rev2.clone()));
        prop_assert!((p - p2).abs() < 1e-12 && (r - r2).abs() < 1e-12);
        prop_assert!((nmi - gnmi(&cover(40, rev1), &cover(40, rev2))).abs() < 1e-9);
    }

    #[test]
    fn misclassification_invariant_under_renaming(labels in prop::collection::vec(prop::option::of(0usize..4), 1..60),
                                                  other in prop::collection::vec(prop::option::of(0usize..4), 60)) {
        let other = &other[..labels.len()];
        let e = misclassification_error(&labels, other);
        prop_assert!((0.0..=1.0).contains(&e));
        let renamed: Vec<Option<usize>> = labels.iter().map(|l| l.map(|x| 3 - x)).collect();
        prop_assert!((misclassification_error(&renamed, other) - e).abs() < 1e-12);
        prop_assert_eq!(misclassification_error(&labels, &labels), 0.0);
    }
}

#[test]
fn fct_lower_distortion_holds_mostly() {
    let (m, d) = (256, 8);
    let mut r = common::rng(77);
    let a = DMatrix::from_fn(m, d, |_, _| rand::Rng::random_range(&mut r, -1.0..1.0));
    let emb = FctEmbedding::new(m, 32, 5);
    let pa = emb.apply(&a);
    let mut violations = 0;
    for _ in 0..200 {
        let x = DVector::from_fn(d, |_, _| rand::Rng::random_range(&mut r, -1.0..1.0)).normalize();
        if (&a * &x).lp_norm(1) > (&pa * &x).lp_norm(1) {
            violations += 1;
        }
    }
    assert!(violations <= 20, "{violations} of 200 vectors shrink");
}

#[test]
fn leverage_scores_ignore_column_order() {
    let mut r = common::rng(8);
    let a = DMatrix::from_fn(120, 10, |_, _| rand::Rng::random_range(&mut r, -1.0..1.0));
    let perm = [3, 7, 0, 9, 1, 5, 2, 8, 6, 4];
    let b = DMatrix::from_fn(120, 10, |i, j| a[(i, perm[j])]);
    let (sa, sb) = (leverage_scores(&a, 32, 4), leverage_scores(&b, 32, 4));
    for (x, y) in sa.as_slice().iter().zip(sb.as_slice()) {
        assert!((x - y).abs() < 1e-8 * (1.0 + x.abs()), "{x} vs {y}");
    }
}
