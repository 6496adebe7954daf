//! Sequential rank-one biclustering of a preference matrix with column
//! deflation and MDL model-count selection.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::l1nmf::{rank_one_l1nmf, rank_one_l1nmf_compressed, support, SolverConfig};
use crate::sketch::DEFAULT_SKETCH_ROWS;

/// Relative binarization threshold for `u` and `v`.
pub const BINARIZE_GAMMA: f64 = 1e-4;

/// Inner rank-one solver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMode {
    /// Full-matrix L1-NMF (RSE).
    Plain,
    /// Leverage-score compressed L1-NMF (ARSE).
    Compressed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BiclusterConfig {
    pub mode: SolverMode,
    pub solver: SolverConfig,
    /// Compression level for [`SolverMode::Compressed`].
    pub sketch_rows: usize,
    pub gamma: f64,
    /// Upper bound on extracted biclusters; `None` runs to the stop rule.
    pub max_biclusters: Option<usize>,
    /// Restrict the MDL search to `1 <= K < T`.
    pub strict_mdl: bool,
    pub seed: u64,
}

impl Default for BiclusterConfig {
    fn default() -> Self {
        Self {
            mode: SolverMode::Plain,
            solver: SolverConfig::default(),
            sketch_rows: DEFAULT_SKETCH_ROWS,
            gamma: BINARIZE_GAMMA,
            max_biclusters: None,
            strict_mdl: false,
            seed: 0,
        }
    }
}

impl BiclusterConfig {
    pub fn validate(&self) -> crate::Result<()> {
        self.solver.validate()?;
        if self.sketch_rows == 0 {
            return Err(crate::Error::Config("sketch rows must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(crate::Error::Config(format!("gamma must lie in [0, 1), got {}", self.gamma)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bicluster {
    pub u: DVector<f64>,
    pub v: DVector<f64>,
    /// Binarized support of `u` (element indices).
    pub rows: Vec<usize>,
    /// Binarized support of `v` (column indices of the input matrix).
    pub cols: Vec<usize>,
    pub objective: f64,
}

impl Bicluster {
    pub fn area(&self) -> usize {
        self.rows.len() * self.cols.len()
    }
}

/// Size and nonzero count of a deflated residual.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResidualSnapshot {
    pub nrows: usize,
    pub ncols: usize,
    pub nnz: usize,
}

impl ResidualSnapshot {
    pub fn codelength(&self) -> f64 {
        codelength(self.nrows * self.ncols, self.nnz)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BiclusterRun {
    pub biclusters: Vec<Bicluster>,
    /// `residuals[t]` is the matrix left after deflating biclusters `0..=t`.
    pub residuals: Vec<ResidualSnapshot>,
    pub k_selected: usize,
}

/// Enumerative code length in bits of a binary vector of length `p` with
/// `k` ones: `log2 C(p, k) + log2 p`.
pub fn codelength(p: usize, k: usize) -> f64 {
    assert!(p >= 1, "codelength needs a nonempty vector");
    assert!(k <= p, "more ones than entries");
    let (p, k) = (p as f64, k as f64);
    let ln_choose = ln_gamma(p + 1.0) - ln_gamma(k + 1.0) - ln_gamma(p - k + 1.0);
    (ln_choose / std::f64::consts::LN_2).max(0.0) + p.log2()
}

/// Code length of a binary matrix, vectorized.
pub fn matrix_codelength(a: &DMatrix<f64>) -> f64 {
    codelength(a.len(), a.iter().filter(|x| **x != 0.0).count())
}

/// Total description length with the first `k` biclusters.
pub fn description_length(m: usize, n: usize, run: &BiclusterRun, k: usize) -> f64 {
    assert!(k >= 1 && k <= run.biclusters.len());
    let factors: f64 = run.biclusters[..k]
        .iter()
        .map(|b| codelength(m, b.rows.len()) + codelength(n, b.cols.len()))
        .sum();
    factors + run.residuals[k - 1].codelength()
}

/// Smallest `K` minimizing the description length; `0` when nothing was
/// extracted.
pub fn mdl_select(m: usize, n: usize, run: &BiclusterRun, strict: bool) -> usize {
    let t = run.biclusters.len();
    if t == 0 {
        return 0;
    }
    let upper = if strict { (t - 1).max(1) } else { t };
    let mut best = (1, description_length(m, n, run, 1));
    for k in 2..=upper {
        let dl = description_length(m, n, run, k);
        if dl < best.1 {
            best = (k, dl);
        }
    }
    best.0
}

/// Extracts rank-one biclusters until the residual is zero or a factor
/// covers at most one column, deflating the columns of each factor.
pub fn extract_biclusters(a: &DMatrix<f64>, config: &BiclusterConfig) -> BiclusterRun {
    let (m, n) = a.shape();
    let mut active: Vec<usize> = (0..n)
        .filter(|&j| a.column(j).iter().any(|x| *x != 0.0))
        .collect();
    let mut nnz = a.iter().filter(|x| **x != 0.0).count();
    let mut biclusters = Vec::new();
    let mut residuals = Vec::new();
    let cap = config.max_biclusters.unwrap_or(usize::MAX);

    while !active.is_empty() && biclusters.len() < cap {
        let work = DMatrix::from_fn(m, active.len(), |i, q| a[(i, active[q])]);
        let seed = config.seed.wrapping_add(16 * biclusters.len() as u64);
        let f = match config.mode {
            SolverMode::Plain => rank_one_l1nmf(&work, &config.solver),
            SolverMode::Compressed => {
                rank_one_l1nmf_compressed(&work, &config.solver, config.sketch_rows, seed)
            }
        };
        let local_cols = support(&f.v, config.gamma);
        let rows = support(&f.u, config.gamma);
        if local_cols.len() <= 1 || rows.is_empty() {
            break;
        }
        let mut v = DVector::zeros(n);
        for (q, &j) in active.iter().enumerate() {
            v[j] = f.v[q];
        }
        let cols: Vec<usize> = local_cols.iter().map(|&q| active[q]).collect();
        for &j in &cols {
            nnz -= a.column(j).iter().filter(|x| **x != 0.0).count();
        }
        let mut drop = local_cols.iter().peekable();
        active = active
            .iter()
            .enumerate()
            .filter(|(q, _)| {
                if drop.peek() == Some(&q) {
                    drop.next();
                    false
                } else {
                    true
                }
            })
            .map(|(_, &j)| j)
            .collect();
        biclusters.push(Bicluster {
            u: f.u,
            v,
            rows,
            cols,
            objective: f.objective,
        });
        residuals.push(ResidualSnapshot {
            nrows: m,
            ncols: n,
            nnz,
        });
    }
    let mut run = BiclusterRun {
        biclusters,
        residuals,
        k_selected: 0,
    };
    run.k_selected = mdl_select(m, n, &run, config.strict_mdl);
    run
}
