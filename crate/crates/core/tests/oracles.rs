mod common;

use common::*;
use multimodel::biclustering::codelength;
use multimodel::eval::hungarian_match;
use multimodel::validation::binomial_tail;
use nalgebra::DMatrix;
use rand::Rng;

#[test]
fn binomial_tail_matches_exact_rationals() {
    let mut worst = 0.0_f64;
    for &p in &[1.0 / 3.0, 0.1, 0.25, 0.5, 0.9, 0.013] {
        for n in 0..=60u64 {
            let exact_tails = exact_binomial_tails(n, p);
            for k in 0..=n + 1 {
                let exact = exact_tails[k as usize];
                let got = binomial_tail(n as i64, k as i64, p);
                if exact == 0.0 {
                    assert_eq!(got, 0.0, "n={n} k={k} p={p}");
                    continue;
                }
                let rel = (got - exact).abs() / exact;
                assert!(rel < 1e-12, "n={n} k={k} p={p}: {got} vs {exact}");
                worst = worst.max(rel);
            }
        }
    }
    eprintln!("binomial tail worst relative error {worst:e}");
}

#[test]
fn binomial_tail_decreases_in_k() {
    for n in [5i64, 30, 60, 1000] {
        let tails: Vec<f64> = (0..=n + 1).map(|k| binomial_tail(n, k, 1.0 / 3.0)).collect();
        assert!(tails.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(tails[0], 1.0);
        assert_eq!(tails[n as usize + 1], 0.0);
    }
}

#[test]
fn codelength_matches_big_integers() {
    for p in 1..=64u64 {
        for k in 0..=p {
            let got = codelength(p as usize, k as usize);
            let exact = exact_codelength(p, k);
            assert!((got - exact).abs() < 1e-9, "p={p} k={k}: {got} vs {exact}");
        }
    }
}

#[test]
fn hungarian_matches_brute_force() {
    let mut r = rng(5);
    for n in [5, 6, 7] {
        let count = if n == 7 { 20 } else { 200 };
        for _ in 0..count {
            let integer = r.random_bool(0.5);
            let cost = DMatrix::from_fn(n, n, |_, _| {
                if integer {
                    r.random_range(0..4) as f64
                } else {
                    r.random_range(-1.0..1.0)
                }
            });
            let assign = hungarian_match(&cost);
            let cols: Vec<usize> = assign.iter().map(|c| c.expect("square matrices match every row")).collect();
            let mut sorted = cols.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, (0..n).collect::<Vec<_>>());
            let total: f64 = cols.iter().enumerate().map(|(i, &j)| cost[(i, j)]).sum();
            assert!((total - brute_force_assignment(&cost)).abs() < 1e-9);
        }
    }
}

#[test]
fn hungarian_rectangular_against_padded_brute_force() {
    let mut r = rng(6);
    for _ in 0..100 {
        let (rows, cols) = (r.random_range(1..=6), r.random_range(1..=6));
        let cost = DMatrix::from_fn(rows, cols, |_, _| r.random_range(-1.0..1.0));
        let n = rows.max(cols);
        let padded = DMatrix::from_fn(n, n, |i, j| if i < rows && j < cols { cost[(i, j)] } else { 0.0 });
        let assign = hungarian_match(&cost);
        assert_eq!(assign.len(), rows);
        let total: f64 = assign.iter().enumerate().filter_map(|(i, c)| c.map(|j| cost[(i, j)])).sum();
        assert!((total - brute_force_assignment(&padded)).abs() < 1e-9);
    }
}

#[test]
fn row_update_matches_weighted_median() {
    let (obj, arg) = row_update_oracle_errors(1000, 11);
    assert!(obj < 1e-6, "objective gap {obj}");
    assert!(arg < 1e-6, "minimizer gap {arg}");
}

#[test]
fn hadamard_matches_dense_recursion() {
    let err = hadamard_errors(256, 3);
    assert!(err < 1e-12, "{err}");
}

#[test]
fn fct_matches_dense_product() {
    let err = fct_errors(50);
    assert!(err < 1e-10, "{err}");
}
