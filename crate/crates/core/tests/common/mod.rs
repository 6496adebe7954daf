//! Independent reference implementations shared by the test targets.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use multimodel::l1nmf::{admm_l1_row, SolverConfig};
use multimodel::sketch::{hadamard_apply, FctEmbedding};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn big_binomial(n: u64, k: u64) -> BigInt {
    let mut c = BigInt::one();
    for i in 0..k {
        c = c * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    c
}

/// `P[Bin(n, p) >= k]` for every `k` in `0..=n + 1`, summed in exact integer
/// arithmetic over the common denominator `D^n`, where `p = a / D` is the
/// exact value of the `f64`.
pub fn exact_binomial_tails(n: u64, p: f64) -> Vec<f64> {
    let p = BigRational::from_float(p).expect("finite p");
    let (a, d) = (p.numer().clone(), p.denom().clone());
    let b = &d - &a;
    let den = num_traits::pow(d, n as usize);
    let mut a_pow = vec![BigInt::one()];
    let mut b_pow = vec![BigInt::one()];
    for _ in 0..n {
        a_pow.push(a_pow.last().unwrap() * &a);
        b_pow.push(b_pow.last().unwrap() * &b);
    }
    let mut tails = vec![0.0; n as usize + 2];
    let mut total = BigInt::zero();
    for j in (0..=n).rev() {
        total += big_binomial(n, j) * &a_pow[j as usize] * &b_pow[(n - j) as usize];
        tails[j as usize] = ratio_to_f64(&total, &den);
    }
    tails
}

/// `num / den` rounded through a 64-bit quotient.
fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let shift = den.bits() as i64 - num.bits() as i64 + 64;
    let q = if shift >= 0 { (num << shift as usize) / den } else { (num >> (-shift) as usize) / den };
    let mut x = q.to_f64().expect("64-bit quotient");
    let mut e = -shift;
    while e < -512 {
        x *= 2f64.powi(-512);
        e += 512;
    }
    x * 2f64.powi(e as i32)
}

/// `log2 C(p, k) + log2 p` from the exact binomial coefficient.
pub fn exact_codelength(p: u64, k: u64) -> f64 {
    big_binomial(p, k).to_f64().unwrap().log2() + (p as f64).log2()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Minimum assignment cost of a square matrix by enumeration.
pub fn brute_force_assignment(cost: &DMatrix<f64>) -> f64 {
    let n = cost.nrows();
    permutations(n)
        .iter()
        .map(|p| p.iter().enumerate().map(|(i, &j)| cost[(i, j)]).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

/// `sum_j |a_j - t w_j|`.
pub fn scalar_objective(a: &[f64], w: &[f64], t: f64) -> f64 {
    a.iter().zip(w).map(|(x, y)| (x - t * y).abs()).sum()
}

/// Minimum and minimizer interval of `t >= 0 -> sum_j |a_j - t w_j|`,
/// scanning the breakpoints `{0} u {a_j / w_j}`.
pub fn scalar_oracle(a: &[f64], w: &[f64]) -> (f64, f64, f64) {
    let mut cands = vec![0.0];
    for (x, y) in a.iter().zip(w) {
        if *y > 0.0 && *x / *y > 0.0 {
            cands.push(x / y);
        }
    }
    let vals: Vec<f64> = cands.iter().map(|&t| scalar_objective(a, w, t)).collect();
    let best = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = 1e-12 * (1.0 + best);
    let ties: Vec<f64> = cands.iter().zip(&vals).filter(|(_, v)| **v <= best + tol).map(|(t, _)| *t).collect();
    let lo = ties.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ties.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (best, lo, hi)
}

/// Random row-update instances checked row by row against the scalar oracle.
/// Returns the worst objective gap and the worst distance of the solution to
/// the oracle's minimizer interval.
pub fn row_update_oracle_errors(instances: usize, seed: u64) -> (f64, f64) {
    let mut r = rng(seed);
    let cfg = SolverConfig::default();
    let (mut obj_err, mut arg_err) = (0.0_f64, 0.0_f64);
    for _ in 0..instances {
        let m = r.random_range(1..=6);
        let n = r.random_range(1..=50);
        let binary = r.random_bool(0.5);
        let a = DMatrix::from_fn(m, n, |_, _| {
            if binary {
                f64::from(u8::from(r.random_bool(0.4)))
            } else if r.random_bool(0.3) {
                0.0
            } else {
                r.random_range(0.0..2.0)
            }
        });
        let v = DVector::from_fn(n, |_, _| if r.random_bool(0.2) { 0.0 } else { r.random_range(0.05..1.5) });
        let cols: Vec<usize> = (0..n).filter(|_| r.random_bool(0.8)).collect();
        let u0 = DVector::from_element(m, 0.5);
        let u = admm_l1_row(&a, &v, &cols, &u0, &cfg);
        let active: Vec<usize> = cols.iter().copied().filter(|&j| v[j] > 0.0).collect();
        if active.is_empty() {
            continue;
        }
        let w: Vec<f64> = active.iter().map(|&j| v[j]).collect();
        for i in 0..m {
            let row: Vec<f64> = active.iter().map(|&j| a[(i, j)]).collect();
            let (best, lo, hi) = scalar_oracle(&row, &w);
            let got = scalar_objective(&row, &w, u[i]);
            obj_err = obj_err.max((got - best) / (1.0 + best));
            let dist = if u[i] < lo {
                lo - u[i]
            } else if u[i] > hi {
                u[i] - hi
            } else {
                0.0
            };
            arg_err = arg_err.max(dist / (1.0 + hi));
        }
    }
    (obj_err, arg_err)
}

/// Sylvester Hadamard matrix by the block recursion.
pub fn dense_hadamard(s: usize) -> DMatrix<f64> {
    if s == 1 {
        return DMatrix::from_element(1, 1, 1.0);
    }
    let h = dense_hadamard(s / 2);
    let k = s / 2;
    DMatrix::from_fn(s, s, |i, j| {
        let sign = if i >= k && j >= k { -1.0 } else { 1.0 };
        sign * h[(i % k, j % k)]
    })
}

/// Worst relative error of the fast transform against the dense matrix for
/// every power of two up to `max_s`.
pub fn hadamard_errors(max_s: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst = 0.0_f64;
    let mut s = 1;
    while s <= max_s {
        let h = dense_hadamard(s);
        for _ in 0..4 {
            let x: Vec<f64> = (0..s).map(|_| r.random_range(-1.0..1.0)).collect();
            let expect = &h * DVector::from_column_slice(&x);
            let mut got = x.clone();
            hadamard_apply(&mut got);
            let scale = 1.0 + x.iter().map(|v| v.abs()).sum::<f64>();
            for (g, e) in got.iter().zip(expect.iter()) {
                worst = worst.max((g - e).abs() / scale);
            }
        }
        s *= 2;
    }
    worst
}

/// `4 B C H~` materialized from the embedding's random draws, restricted
/// to the unpadded input columns.
pub fn dense_fct(emb: &FctEmbedding) -> DMatrix<f64> {
    let (s, mp, m, h) = (emb.block_size(), emb.padded_len(), emb.input_len(), emb.rows());
    let hs = dense_hadamard(s) / (s as f64).sqrt();
    let mut h_tilde = DMatrix::zeros(2 * mp, mp);
    for b in 0..mp / s {
        for i in 0..s {
            for j in 0..s {
                h_tilde[(2 * s * b + i, s * b + j)] = hs[(i, j)];
            }
            h_tilde[(2 * s * b + s + i, s * b + i)] = 1.0;
        }
    }
    let c = DMatrix::from_diagonal(&DVector::from_column_slice(emb.cauchy_diag()));
    let mut bmat = DMatrix::zeros(h, 2 * mp);
    for (k, &row) in emb.col_assignment().iter().enumerate() {
        bmat[(row, k)] = 1.0;
    }
    let pi = (bmat * c * h_tilde) * 4.0;
    pi.columns(0, m).into_owned()
}

/// Worst relative entry error of the fast sketch against the dense product
/// over seeded instances with `m' = 64` and `h = 8`.
pub fn fct_errors(instances: u64) -> f64 {
    let mut worst = 0.0_f64;
    for seed in 0..instances {
        let mut r = rng(1000 + seed);
        let m = r.random_range(57..=64);
        let cols = r.random_range(1..=6);
        let emb = FctEmbedding::with_block_size(m, 8, 8, seed);
        assert_eq!(emb.padded_len(), 64);
        let mat = DMatrix::from_fn(m, cols, |_, _| r.random_range(-1.0..1.0));
        let pi = dense_fct(&emb);
        let expect = &pi * &mat;
        let scale = pi.abs() * mat.abs();
        let got = emb.apply(&mat);
        for k in 0..got.len() {
            worst = worst.max((got[k] - expect[k]).abs() / (1.0 + scale[k]));
        }
    }
    worst
}
