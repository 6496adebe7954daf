//! Fast Cauchy transform sketching, L1 leverage scores and the top-score
//! row selection used to compress the L1 regression subproblems.
//!
//! The embedding is `Pi = 4 B C H~` with
//! - `H~` block diagonal with `m'/s` copies of `[s^{-1/2} H_s ; I_s]`,
//! - `C` a diagonal of `2m'` standard Cauchy samples,
//! - `B` an `h x 2m'` matrix whose columns are random standard basis vectors.
//!
//! Inputs with `m` rows are zero-padded to `m'`, the smallest multiple of `s`
//! that is at least `m`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Default sketch size (and compression level).
pub const DEFAULT_SKETCH_ROWS: usize = 32;

/// Relative pivot threshold used to decide the numerical rank of a sketch.
const RANK_TOL: f64 = 1e-10;

/// In-place unnormalized fast Walsh-Hadamard transform, `x <- H_s x`.
///
/// `H_s` follows the Sylvester recursion `H_s = [[H, H], [H, -H]]` with
/// `H_1 = [1]`. Panics if the length is not a power of two.
pub fn hadamard_apply(x: &mut [f64]) {
    let n = x.len();
    assert!(n.is_power_of_two(), "Hadamard transform length {n} is not a power of two");
    let mut half = 1;
    while half < n {
        for block in x.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, v) = (*a, *b);
                *a = u + v;
                *b = u - v;
            }
        }
        half *= 2;
    }
}

/// A seeded fast Cauchy transform from `R^m` to `R^h`.
#[derive(Clone, Debug, PartialEq)]
pub struct FctEmbedding {
    h: usize,
    s: usize,
    m: usize,
    m_padded: usize,
    col_assignment: Vec<usize>,
    cauchy_diag: Vec<f64>,
    seed: u64,
}

impl FctEmbedding {
    /// Embedding with block size `s = h` rounded up to a power of two.
    pub fn new(m: usize, h: usize, seed: u64) -> Self {
        Self::with_block_size(m, h, h.max(1).next_power_of_two(), seed)
    }

    /// Panics unless `s` is a power of two and `1 <= h <= 2m'`.
    pub fn with_block_size(m: usize, h: usize, s: usize, seed: u64) -> Self {
        assert!(s.is_power_of_two(), "block size {s} is not a power of two");
        let m_padded = m.div_ceil(s).max(1) * s;
        assert!(h >= 1 && h <= 2 * m_padded, "sketch size {h} outside [1, {}]", 2 * m_padded);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = 2 * m_padded;
        let col_assignment = (0..len).map(|_| rng.random_range(0..h)).collect();
        let cauchy_diag = (0..len)
            .map(|_| {
                let num: f64 = rng.sample(StandardNormal);
                let den: f64 = rng.sample(StandardNormal);
                num / den
            })
            .collect();
        Self {
            h,
            s,
            m,
            m_padded,
            col_assignment,
            cauchy_diag,
            seed,
        }
    }

    pub fn rows(&self) -> usize {
        self.h
    }

    pub fn block_size(&self) -> usize {
        self.s
    }

    pub fn input_len(&self) -> usize {
        self.m
    }

    pub fn padded_len(&self) -> usize {
        self.m_padded
    }

    /// Target row of each of the `2m'` intermediate rows (the columns of `B`).
    pub fn col_assignment(&self) -> &[usize] {
        &self.col_assignment
    }

    /// Diagonal of `C`.
    pub fn cauchy_diag(&self) -> &[f64] {
        &self.cauchy_diag
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `out <- Pi x` for a vector of length `m`.
    pub fn apply_vec(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.m, "input length does not match the embedding");
        assert_eq!(out.len(), self.h);
        out.iter_mut().for_each(|o| *o = 0.0);
        let s = self.s;
        let norm = (s as f64).sqrt().recip();
        let mut block = vec![0.0; s];
        for b in 0..self.m_padded / s {
            let start = b * s;
            let end = (start + s).min(self.m);
            block.iter_mut().for_each(|v| *v = 0.0);
            if start < end {
                block[..end - start].copy_from_slice(&x[start..end]);
            }
            // Identity half of the block.
            let base = 2 * s * b;
            for (q, &v) in block.iter().enumerate() {
                if v != 0.0 {
                    let k = base + s + q;
                    out[self.col_assignment[k]] += 4.0 * self.cauchy_diag[k] * v;
                }
            }
            if block.iter().all(|v| *v == 0.0) {
                continue;
            }
            hadamard_apply(&mut block);
            for (q, &v) in block.iter().enumerate() {
                let k = base + q;
                out[self.col_assignment[k]] += 4.0 * self.cauchy_diag[k] * norm * v;
            }
        }
    }

    /// `Pi M` for a matrix with `m` rows; columns are sketched independently.
    pub fn apply(&self, mat: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(mat.nrows(), self.m, "row count does not match the embedding");
        let cols: Vec<Vec<f64>> = (0..mat.ncols())
            .into_par_iter()
            .map(|j| {
                let mut out = vec![0.0; self.h];
                self.apply_vec(mat.column(j).as_slice(), &mut out);
                out
            })
            .collect();
        let mut result = DMatrix::zeros(self.h, mat.ncols());
        for (j, c) in cols.into_iter().enumerate() {
            result.column_mut(j).copy_from_slice(&c);
        }
        result
    }
}

/// Per-row L1 leverage scores.
#[derive(Clone, Debug, PartialEq)]
pub struct LeverageScores(pub Vec<f64>);

impl LeverageScores {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Householder QR with column pivoting, truncated at the numerical rank.
///
/// Returns the pivot order of the columns and the leading `k x k` upper
/// triangle of `R`, where `k` is the numerical rank.
pub(crate) fn pivoted_qr(mut a: DMatrix<f64>) -> (Vec<usize>, DMatrix<f64>) {
    let (rows, cols) = a.shape();
    let mut perm: Vec<usize> = (0..cols).collect();
    let steps = rows.min(cols);
    let mut norms: Vec<f64> = (0..cols).map(|j| a.column(j).norm_squared()).collect();
    let mut first = 0.0;
    let mut rank = 0;
    for j in 0..steps {
        let (p, &best) = norms[j..]
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.total_cmp(y.1).then(y.0.cmp(&x.0)))
            .unwrap();
        let p = p + j;
        let best = best.sqrt();
        if j == 0 {
            first = best;
        }
        if !(best > RANK_TOL * first) || best == 0.0 {
            break;
        }
        if p != j {
            a.swap_columns(p, j);
            perm.swap(p, j);
            norms.swap(p, j);
        }
        // Reflector for a[j.., j].
        let alpha = {
            let col = a.view((j, j), (rows - j, 1));
            let nrm = col.norm();
            if a[(j, j)] > 0.0 {
                -nrm
            } else {
                nrm
            }
        };
        let mut v: Vec<f64> = (j..rows).map(|i| a[(i, j)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        a[(j, j)] = alpha;
        for i in j + 1..rows {
            a[(i, j)] = 0.0;
        }
        if vnorm2 > 0.0 {
            for c in j + 1..cols {
                let dot: f64 = v.iter().enumerate().map(|(q, vq)| vq * a[(j + q, c)]).sum();
                let f = 2.0 * dot / vnorm2;
                for (q, vq) in v.iter().enumerate() {
                    a[(j + q, c)] -= f * vq;
                }
            }
        }
        for c in j + 1..cols {
            // Recompute rather than downdate; the sketches are small.
            norms[c] = a.view((j + 1, c), (rows - j - 1, 1)).norm_squared();
        }
        rank = j + 1;
    }
    let r = a.view((0, 0), (rank, rank)).upper_triangle();
    (perm, r)
}

/// L1 leverage scores of the rows of `a` from an `r`-row fast Cauchy sketch.
///
/// The sketch `Pi A` is orthogonalized with a pivoted QR; dependent columns
/// are dropped, and `lambda_i = || (A_S R^{-1})_{i,:} ||_1` is evaluated by
/// forward substitution, where `S` are the kept pivot columns.
pub fn leverage_scores(a: &DMatrix<f64>, r: usize, seed: u64) -> LeverageScores {
    let m = a.nrows();
    if m == 0 || a.ncols() == 0 {
        return LeverageScores(vec![0.0; m]);
    }
    let h = r.clamp(1, 2 * m.max(1));
    let emb = FctEmbedding::new(m, h, seed);
    let sketch = emb.apply(a);
    let (perm, tri) = pivoted_qr(sketch);
    let k = tri.nrows();
    if k == 0 {
        return LeverageScores(vec![0.0; m]);
    }
    let kept = &perm[..k];
    let scores = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut y = vec![0.0; k];
            let mut total = 0.0;
            for jj in 0..k {
                let mut acc = a[(i, kept[jj])];
                for l in 0..jj {
                    acc -= y[l] * tri[(l, jj)];
                }
                y[jj] = acc / tri[(jj, jj)];
                total += y[jj].abs();
            }
            total
        })
        .collect();
    LeverageScores(scores)
}

/// Indices of the `r` largest scores, ascending; ties go to the lower index.
pub fn compression_matrix(scores: &LeverageScores, r: usize) -> Vec<usize> {
    let n = scores.len();
    if r >= n {
        return (0..n).collect();
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| scores.0[y].total_cmp(&scores.0[x]).then(x.cmp(&y)));
    let mut top = order[..r].to_vec();
    top.sort_unstable();
    top
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h2_and_h4_columns() {
        let mut x = [1.0, 0.0];
        hadamard_apply(&mut x);
        assert_eq!(x, [1.0, 1.0]);
        let mut e1 = [1.0, 0.0, 0.0, 0.0];
        hadamard_apply(&mut e1);
        assert_eq!(e1, [1.0; 4]);
        let mut x = [0.0, 1.0];
        hadamard_apply(&mut x);
        assert_eq!(x, [1.0, -1.0]);
    }

    #[test]
    #[should_panic]
    fn non_power_of_two_panics() {
        hadamard_apply(&mut [1.0, 2.0, 3.0]);
    }

    #[test]
    fn fct_is_linear_and_zero_preserving() {
        let emb = FctEmbedding::new(50, 8, 11);
        let zero = DMatrix::zeros(50, 3);
        assert_eq!(emb.apply(&zero), DMatrix::zeros(8, 3));
        let m1 = DMatrix::from_fn(50, 3, |i, j| ((i * 7 + j * 3) % 11) as f64 - 5.0);
        let m2 = DMatrix::from_fn(50, 3, |i, j| ((i * 5 + j) % 13) as f64 * 0.25);
        let lhs = emb.apply(&(&m1 + &m2));
        let rhs = emb.apply(&m1) + emb.apply(&m2);
        assert!((lhs - rhs).amax() < 1e-10);
    }

    #[test]
    fn padding_and_determinism() {
        let emb = FctEmbedding::new(50, 32, 3);
        assert_eq!(emb.padded_len(), 64);
        assert_eq!(emb.block_size(), 32);
        assert_eq!(emb, FctEmbedding::new(50, 32, 3));
        assert_ne!(emb, FctEmbedding::new(50, 32, 4));
    }

    #[test]
    fn pivoted_qr_reconstructs_and_finds_rank() {
        // Rank-2 matrix: third column is the sum of the first two.
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 9.0, 7.0, 8.0, 15.0]);
        let (perm, r) = pivoted_qr(a.clone());
        assert_eq!(r.nrows(), 2);
        // R^T R equals the Gram matrix of the kept columns.
        let sel = DMatrix::from_fn(3, 2, |i, j| a[(i, perm[j])]);
        let gram = sel.transpose() * &sel;
        assert!((r.transpose() * &r - gram).amax() < 1e-9);
    }

    #[test]
    fn single_nonzero_row_dominates() {
        let mut a = DMatrix::zeros(40, 6);
        for j in 0..6 {
            a[(17, j)] = 1.0 + j as f64;
        }
        let scores = leverage_scores(&a, 8, 5);
        for (i, s) in scores.0.iter().enumerate() {
            if i != 17 {
                assert!(scores.0[17] > *s);
            }
        }
    }

    #[test]
    fn compression_selection_rules() {
        let s = LeverageScores(vec![3.0, 1.0, 2.0]);
        assert_eq!(compression_matrix(&s, 2), vec![0, 2]);
        assert_eq!(compression_matrix(&s, 3), vec![0, 1, 2]);
        let ties = LeverageScores(vec![1.0, 1.0, 1.0, 2.0]);
        assert_eq!(compression_matrix(&ties, 2), vec![0, 3]);
    }
}
