//! Rank-one nonnegative matrix factorization under the entrywise L1 loss,
//! `min_{u, v >= 0} ||A - u v^T||_1`.
//!
//! The solver runs in three steps:
//! 1. an iteratively reweighted least-squares (IRLS) initialization,
//! 2. a `v` update restricted to the rows in the support of `u`,
//! 3. a `u` update restricted to the columns in the support of `v`.
//!
//! Steps 2 and 3 are nonnegative L1 regressions. Because the factorization is
//! rank one they split into independent scalar problems
//! `min_{t >= 0} sum_j |a_j - t w_j|`, each solved by ADMM and then snapped
//! to the exact breakpoint minimizer.
//!
//! The compressed variant replaces the full rows/columns of each subproblem
//! by the `r` rows/columns with the largest L1 leverage scores.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::sketch::{compression_matrix, leverage_scores};

/// Relative threshold of the support used for the `D_u` / `D_v` masks and
/// for binarization.
pub const SUPPORT_GAMMA: f64 = 1e-4;

const IRLS_REL_TOL: f64 = 1e-4;

/// Inner solver parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub admm_rho: f64,
    pub admm_max_iter: usize,
    pub admm_tol: f64,
    pub irls_max_iter: usize,
    pub irls_eps: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            admm_rho: 1.0,
            admm_max_iter: 500,
            admm_tol: 1e-6,
            irls_max_iter: 50,
            irls_eps: 1e-8,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> crate::Result<()> {
        let ok = self.admm_rho > 0.0
            && self.admm_max_iter > 0
            && self.admm_tol > 0.0
            && self.irls_max_iter > 0
            && self.irls_eps > 0.0;
        if ok {
            Ok(())
        } else {
            Err(crate::Error::Config(format!("solver parameters must be positive: {self:?}")))
        }
    }
}

/// Result of a rank-one factorization.
#[derive(Clone, Debug, PartialEq)]
pub struct RankOneFactors {
    pub u: DVector<f64>,
    pub v: DVector<f64>,
    /// `||A - u v^T||_1` at termination.
    pub objective: f64,
}

/// Entrywise L1 residual `||A - u v^T||_1`.
pub fn l1_objective(a: &DMatrix<f64>, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    (0..a.ncols())
        .into_par_iter()
        .map(|j| {
            let vj = v[j];
            a.column(j)
                .iter()
                .zip(u.iter())
                .map(|(aij, ui)| (aij - ui * vj).abs())
                .sum::<f64>()
        })
        .sum()
}

/// Indices `i` with `x_i > gamma * ||x||_inf`.
pub fn support(x: &DVector<f64>, gamma: f64) -> Vec<usize> {
    let max = x.iter().fold(0.0_f64, |acc, v| acc.max(*v));
    if max <= 0.0 {
        return Vec::new();
    }
    let thr = gamma * max;
    x.iter()
        .enumerate()
        .filter(|(_, v)| **v > thr)
        .map(|(i, _)| i)
        .collect()
}

fn scalar_objective(a: &[f64], w: &[f64], t: f64) -> f64 {
    a.iter().zip(w).map(|(aj, wj)| (aj - t * wj).abs()).sum()
}

/// True when `t` minimizes `sum_j w_j |b_j - t|` over `t >= 0`.
fn is_scalar_optimum(breaks: &[f64], w: &[f64], t: f64) -> bool {
    let mut below = 0.0;
    let mut at = 0.0;
    let mut above = 0.0;
    for (b, wj) in breaks.iter().zip(w) {
        if *b < t {
            below += wj;
        } else if *b > t {
            above += wj;
        } else {
            at += wj;
        }
    }
    let slack = 1e-12 * (below + at + above);
    let right = below + at - above;
    let left = below - at - above;
    right >= -slack && (t == 0.0 || left <= slack)
}

/// Smallest minimizer of `sum_j w_j |b_j - t|` over `t >= 0`.
fn breakpoint_minimizer(breaks: &[f64], w: &[f64]) -> f64 {
    let mut order: Vec<usize> = (0..breaks.len()).collect();
    order.sort_by(|&x, &y| breaks[x].total_cmp(&breaks[y]));
    let total: f64 = w.iter().sum();
    let mut acc = 0.0;
    for &k in &order {
        acc += w[k];
        if acc >= 0.5 * total {
            return breaks[k].max(0.0);
        }
    }
    0.0
}

/// `argmin_{t >= 0} sum_j |a_j - t w_j|` for strictly positive weights.
///
/// ADMM on the splitting `z = a - t w` with scaled dual, stopped on the
/// primal/dual residual test, followed by a snap to the nearest breakpoint
/// `a_j / w_j` (or 0) when that breakpoint passes the optimality check.
pub fn scalar_l1_admm(a: &[f64], w: &[f64], warm: Option<f64>, config: &SolverConfig) -> f64 {
    debug_assert_eq!(a.len(), w.len());
    let k = a.len();
    if k == 0 {
        return warm.unwrap_or(0.0).max(0.0);
    }
    let rho = config.admm_rho;
    let tol = config.admm_tol;
    let ww: f64 = w.iter().map(|x| x * x).sum();
    let w_norm = ww.sqrt();
    let a_norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut t = warm
        .unwrap_or_else(|| a.iter().zip(w).map(|(x, y)| x * y).sum::<f64>() / ww)
        .max(0.0);
    let mut z: Vec<f64> = a.iter().zip(w).map(|(aj, wj)| aj - t * wj).collect();
    let mut y = vec![0.0; k];
    let shrink = 1.0 / rho;
    for _ in 0..config.admm_max_iter {
        let num: f64 = (0..k).map(|j| w[j] * (a[j] - z[j] - y[j])).sum();
        t = (num / ww).max(0.0);
        let mut primal = 0.0;
        let mut dual = 0.0;
        let mut z_norm = 0.0;
        for j in 0..k {
            let target = a[j] - t * w[j] - y[j];
            let zj = target.signum() * (target.abs() - shrink).max(0.0);
            dual += w[j] * (zj - z[j]);
            z[j] = zj;
            let r = t * w[j] + zj - a[j];
            y[j] += r;
            primal += r * r;
            z_norm += zj * zj;
        }
        let primal = primal.sqrt();
        let dual = (rho * dual).abs();
        let eps_pri = (k as f64).sqrt() * tol + tol * (t * w_norm).max(z_norm.sqrt()).max(a_norm);
        let y_dot: f64 = (0..k).map(|j| w[j] * y[j]).sum();
        let eps_dual = tol + tol * rho * y_dot.abs();
        if primal <= eps_pri && dual <= eps_dual {
            break;
        }
    }
    polish(a, w, t)
}

fn polish(a: &[f64], w: &[f64], t: f64) -> f64 {
    let breaks: Vec<f64> = a.iter().zip(w).map(|(aj, wj)| aj / wj).collect();
    let mut snapped = 0.0;
    let mut dist = t.abs();
    for &b in &breaks {
        if b >= 0.0 && (b - t).abs() < dist {
            dist = (b - t).abs();
            snapped = b;
        }
    }
    if is_scalar_optimum(&breaks, w, snapped) {
        return snapped;
    }
    // ADMM stopped outside the basin of the optimum: fall back to the exact
    // breakpoint search.
    let exact = breakpoint_minimizer(&breaks, w);
    if scalar_objective(a, w, exact) <= scalar_objective(a, w, t) {
        exact
    } else {
        t
    }
}

/// Nonnegative L1 update of `u` with `v` fixed, restricted to `cols`:
/// `u_i = argmin_{t >= 0} sum_{j in cols} |A_ij - t v_j|`.
///
/// Columns with `v_j = 0` only add a constant and are skipped. Rows whose
/// restricted problem is empty keep their value from `u_init`.
pub fn admm_l1_row(
    a: &DMatrix<f64>,
    v: &DVector<f64>,
    cols: &[usize],
    u_init: &DVector<f64>,
    config: &SolverConfig,
) -> DVector<f64> {
    assert_eq!(v.len(), a.ncols());
    assert_eq!(u_init.len(), a.nrows());
    assert!(v.iter().all(|x| *x >= 0.0), "v must be nonnegative");
    let active: Vec<usize> = cols.iter().copied().filter(|&j| v[j] > 0.0).collect();
    if active.is_empty() {
        return u_init.clone();
    }
    let w: Vec<f64> = active.iter().map(|&j| v[j]).collect();
    let values: Vec<f64> = (0..a.nrows())
        .into_par_iter()
        .map(|i| {
            let row: Vec<f64> = active.iter().map(|&j| a[(i, j)]).collect();
            scalar_l1_admm(&row, &w, Some(u_init[i]), config)
        })
        .collect();
    DVector::from_vec(values)
}

/// Nonnegative L1 update of `v` with `u` fixed, restricted to `rows`:
/// `v_j = argmin_{t >= 0} sum_{i in rows} |A_ij - u_i t|`.
pub fn admm_l1_col(
    a: &DMatrix<f64>,
    u: &DVector<f64>,
    rows: &[usize],
    v_init: &DVector<f64>,
    config: &SolverConfig,
) -> DVector<f64> {
    assert_eq!(u.len(), a.nrows());
    assert_eq!(v_init.len(), a.ncols());
    assert!(u.iter().all(|x| *x >= 0.0), "u must be nonnegative");
    let active: Vec<usize> = rows.iter().copied().filter(|&i| u[i] > 0.0).collect();
    if active.is_empty() {
        return v_init.clone();
    }
    let w: Vec<f64> = active.iter().map(|&i| u[i]).collect();
    let values: Vec<f64> = (0..a.ncols())
        .into_par_iter()
        .map(|j| {
            let col = a.column(j);
            let vals: Vec<f64> = active.iter().map(|&i| col[i]).collect();
            scalar_l1_admm(&vals, &w, Some(v_init[j]), config)
        })
        .collect();
    DVector::from_vec(values)
}

/// Rank-one least-squares fit anchored on the heaviest column:
/// `u = A e_j`, `v = A^T u / ||u||^2`.
fn column_init(a: &DMatrix<f64>) -> Option<(DVector<f64>, DVector<f64>)> {
    let mut best = (0, 0.0);
    for (j, col) in a.column_iter().enumerate() {
        let w = col.iter().map(|x| x.abs()).sum::<f64>();
        if w > best.1 {
            best = (j, w);
        }
    }
    if best.1 == 0.0 {
        return None;
    }
    let u = a.column(best.0).into_owned();
    let v = a.tr_mul(&u) / u.norm_squared();
    Some((u, v))
}

/// Reweighted rank-one initialization.
///
/// Alternates closed-form weighted nonnegative least-squares updates of `u`
/// and `v` under the weights `1 / max(|A_ij - u_i v_j|, eps)`, starting from
/// the heaviest column of `A`. On exit `||u||_inf = 1` (or both are zero).
pub fn irls_rank_one(a: &DMatrix<f64>, config: &SolverConfig) -> (DVector<f64>, DVector<f64>) {
    let (m, n) = a.shape();
    let Some((mut u, mut v)) = column_init(a) else {
        return (DVector::zeros(m), DVector::zeros(n));
    };
    let eps = config.irls_eps;
    let mut last = l1_objective(a, &u, &v);
    const CHUNK: usize = 256;
    for _ in 0..config.irls_max_iter {
        // u-update, row chunks over contiguous column slices.
        let new_u: Vec<f64> = (0..m.div_ceil(CHUNK))
            .into_par_iter()
            .flat_map_iter(|c| {
                let r0 = c * CHUNK;
                let r1 = (r0 + CHUNK).min(m);
                let mut num = vec![0.0; r1 - r0];
                let mut den = vec![0.0; r1 - r0];
                for j in 0..n {
                    let vj = v[j];
                    if vj == 0.0 {
                        continue;
                    }
                    let col = &a.as_slice()[j * m + r0..j * m + r1];
                    for (q, &aij) in col.iter().enumerate() {
                        let wgt = 1.0 / (aij - u[r0 + q] * vj).abs().max(eps);
                        num[q] += wgt * aij * vj;
                        den[q] += wgt * vj * vj;
                    }
                }
                num.into_iter()
                    .zip(den)
                    .map(|(p, d)| if d > 0.0 { (p / d).max(0.0) } else { 0.0 })
                    .collect::<Vec<_>>()
            })
            .collect();
        u = DVector::from_vec(new_u);
        let new_v: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut num = 0.0;
                let mut den = 0.0;
                for (aij, ui) in a.column(j).iter().zip(u.iter()) {
                    if *ui == 0.0 {
                        continue;
                    }
                    let wgt = 1.0 / (aij - ui * v[j]).abs().max(eps);
                    num += wgt * aij * ui;
                    den += wgt * ui * ui;
                }
                if den > 0.0 {
                    (num / den).max(0.0)
                } else {
                    0.0
                }
            })
            .collect();
        v = DVector::from_vec(new_v);
        let obj = l1_objective(a, &u, &v);
        let done = (last - obj).abs() < IRLS_REL_TOL * last.max(f64::MIN_POSITIVE);
        last = obj;
        if done {
            break;
        }
    }
    normalize_gauge(&mut u, &mut v);
    (u, v)
}

/// Rescales so that `||u||_inf = 1`; zeroes both factors if either is zero.
pub fn normalize_gauge(u: &mut DVector<f64>, v: &mut DVector<f64>) {
    let umax = u.amax();
    if umax > 0.0 && v.amax() > 0.0 {
        *u /= umax;
        *v *= umax;
    } else {
        u.fill(0.0);
        v.fill(0.0);
    }
}

/// Three-step rank-one L1-NMF on the full matrix.
pub fn rank_one_l1nmf(a: &DMatrix<f64>, config: &SolverConfig) -> RankOneFactors {
    let (mut u, v0) = irls_rank_one(a, config);
    let rows = support(&u, SUPPORT_GAMMA);
    let mut v = admm_l1_col(a, &u, &rows, &v0, config);
    let cols = support(&v, SUPPORT_GAMMA);
    u = admm_l1_row(a, &v, &cols, &u, config);
    normalize_gauge(&mut u, &mut v);
    let objective = l1_objective(a, &u, &v);
    RankOneFactors { u, v, objective }
}

fn select_rows(a: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), a.ncols(), |q, j| a[(rows[q], j)])
}

fn select_cols_transposed(a: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(cols.len(), a.nrows(), |q, i| a[(i, cols[q])])
}

/// Row positions (into `candidates`) kept by leverage-score compression.
fn compress(sub: &DMatrix<f64>, candidates: &[usize], r: usize, seed: u64) -> Vec<usize> {
    if candidates.len() <= r {
        return candidates.to_vec();
    }
    let scores = leverage_scores(sub, r, seed);
    compression_matrix(&scores, r)
        .into_iter()
        .map(|q| candidates[q])
        .collect()
}

/// Rank-one L1-NMF with leverage-score compression at level `r`.
///
/// 1. IRLS on the `r` columns of `A` with the largest leverage scores of `A^T`.
/// 2. `v` update on the `r` rows of `D_u A` with the largest leverage scores.
/// 3. `u` update on the `r` columns of `A D_v` with the largest leverage
///    scores of `(A D_v)^T`.
///
/// When a subproblem has at most `r` rows/columns it is solved uncompressed.
pub fn rank_one_l1nmf_compressed(
    a: &DMatrix<f64>,
    config: &SolverConfig,
    r: usize,
    seed: u64,
) -> RankOneFactors {
    let (m, n) = a.shape();
    let all_cols: Vec<usize> = (0..n).collect();
    let init_cols = if n <= r {
        all_cols
    } else {
        let at = a.transpose();
        compress(&at, &all_cols, r, seed)
    };
    let compressed = DMatrix::from_fn(m, init_cols.len(), |i, q| a[(i, init_cols[q])]);
    let (mut u, _) = irls_rank_one(&compressed, config);

    let rows = support(&u, SUPPORT_GAMMA);
    let kept_rows = if rows.len() <= r {
        rows
    } else {
        compress(&select_rows(a, &rows), &rows, r, seed.wrapping_add(1))
    };
    let mut v = admm_l1_col(a, &u, &kept_rows, &DVector::zeros(n), config);

    let cols = support(&v, SUPPORT_GAMMA);
    let kept_cols = if cols.len() <= r {
        cols
    } else {
        compress(&select_cols_transposed(a, &cols), &cols, r, seed.wrapping_add(2))
    };
    u = admm_l1_row(a, &v, &kept_cols, &u, config);
    normalize_gauge(&mut u, &mut v);
    let objective = l1_objective(a, &u, &v);
    RankOneFactors { u, v, objective }
}
