//! Random minimal-sample hypothesis generation and the binary preference
//! matrix built from the resulting consensus sets.
//!
//! Randomness is indexed: the generator for draw `j` is a ChaCha stream
//! keyed by `(seed, j)`, so draws can be computed in any order or in
//! parallel and still produce the same pool.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{consensus_set, DataSet, Model, ModelFamily};

/// Parameters of the hypothesis generator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplingConfig {
    pub n_samples: usize,
    pub seed: u64,
    /// Inlier threshold in the units of [`Model::error`].
    pub delta: f64,
}

impl SamplingConfig {
    pub fn new(n_samples: usize, seed: u64, delta: f64) -> Self {
        Self {
            n_samples,
            seed,
            delta,
        }
    }

    /// Default number of minimal samples per family.
    pub fn default_samples(family: ModelFamily) -> usize {
        match family {
            ModelFamily::Line2D | ModelFamily::Circle2D => 2000,
            ModelFamily::Plane3D => 5000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::Config("n_samples must be at least 1".into()));
        }
        if !(self.delta >= 0.0) || !self.delta.is_finite() {
            return Err(Error::Config(format!(
                "inlier threshold must be a finite nonnegative number, got {}",
                self.delta
            )));
        }
        Ok(())
    }
}

/// One model hypothesis with its minimal sample and consensus set.
#[derive(Clone, Debug, PartialEq)]
pub struct Hypothesis {
    pub model: Model,
    /// Indices of the minimal sample set, in draw order.
    pub mss: Vec<usize>,
    /// Ascending element indices within `delta` of the model.
    pub consensus: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisPool {
    pub family: ModelFamily,
    pub delta: f64,
    pub hypotheses: Vec<Hypothesis>,
}

impl HypothesisPool {
    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }
}

/// The random generator used for draw `index` under `seed`.
pub fn draw_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws `n_samples` non-degenerate hypotheses and their consensus sets.
pub fn draw_hypotheses(
    data: &DataSet,
    family: ModelFamily,
    config: &SamplingConfig,
) -> Result<HypothesisPool> {
    config.validate()?;
    let b = family.min_sample_size();
    if data.dim() != family.dim() {
        return Err(Error::Config(format!(
            "{} needs {}D elements but the dataset is {}D",
            family.name(),
            family.dim(),
            data.dim()
        )));
    }
    if data.len() < b {
        return Err(Error::Config(format!(
            "{} needs at least {b} elements, dataset has {}",
            family.name(),
            data.len()
        )));
    }
    let max_attempts = 100 * config.n_samples;
    let hypotheses = (0..config.n_samples)
        .into_par_iter()
        .map(|j| {
            let mut rng = draw_rng(config.seed, j as u64);
            for _ in 0..max_attempts {
                let mss = rand::seq::index::sample(&mut rng, data.len(), b).into_vec();
                let Ok(model) = family.fit_minimal(&data.select(&mss)) else {
                    continue;
                };
                let mut consensus = consensus_set(&model, data, config.delta);
                // The sample lies on its own model; keep it in the consensus
                // set even when rounding puts it a hair above delta.
                for &i in &mss {
                    if let Err(pos) = consensus.binary_search(&i) {
                        consensus.insert(pos, i);
                    }
                }
                return Ok(Hypothesis {
                    model,
                    mss,
                    consensus,
                });
            }
            Err(Error::DegenerateData {
                attempts: max_attempts,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HypothesisPool {
        family,
        delta: config.delta,
        hypotheses,
    })
}

/// Binary `m x n` element-by-hypothesis membership matrix.
///
/// Columns are stored as sorted row-index lists; `col_meta[j]` is the id of
/// the hypothesis that produced column `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreferenceMatrix {
    m: usize,
    columns: Vec<Vec<usize>>,
    col_meta: Vec<usize>,
}

impl PreferenceMatrix {
    /// Panics if a row index is out of range or a column is unsorted.
    pub fn new(m: usize, columns: Vec<Vec<usize>>, col_meta: Vec<usize>) -> Self {
        assert_eq!(columns.len(), col_meta.len());
        for col in &columns {
            assert!(col.windows(2).all(|w| w[0] < w[1]), "column rows must be strictly ascending");
            assert!(col.last().is_none_or(|&i| i < m), "row index out of range");
        }
        Self {
            m,
            columns,
            col_meta,
        }
    }

    pub fn from_dense(dense: &DMatrix<f64>) -> Self {
        let columns: Vec<Vec<usize>> = dense
            .column_iter()
            .map(|c| c.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| i).collect())
            .collect();
        let meta = (0..columns.len()).collect();
        Self::new(dense.nrows(), columns, meta)
    }

    pub fn nrows(&self) -> usize {
        self.m
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn column(&self, j: usize) -> &[usize] {
        &self.columns[j]
    }

    pub fn col_meta(&self) -> &[usize] {
        &self.col_meta
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.columns[j].binary_search(&i).is_ok()
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    /// Number of hypotheses claiming each element.
    pub fn row_sums(&self) -> Vec<usize> {
        let mut sums = vec![0; self.m];
        for col in &self.columns {
            for &i in col {
                sums[i] += 1;
            }
        }
        sums
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut dense = DMatrix::zeros(self.m, self.columns.len());
        for (j, col) in self.columns.iter().enumerate() {
            for &i in col {
                dense[(i, j)] = 1.0;
            }
        }
        dense
    }

    /// New matrix with the given columns, in the given order.
    pub fn select_columns(&self, keep: &[usize]) -> Self {
        Self {
            m: self.m,
            columns: keep.iter().map(|&j| self.columns[j].clone()).collect(),
            col_meta: keep.iter().map(|&j| self.col_meta[j]).collect(),
        }
    }
}

/// Column `j` is the indicator vector of hypothesis `j`'s consensus set.
pub fn build_preference_matrix(data: &DataSet, pool: &HypothesisPool) -> PreferenceMatrix {
    let columns = pool
        .hypotheses
        .iter()
        .map(|h| h.consensus.clone())
        .collect();
    PreferenceMatrix::new(data.len(), columns, (0..pool.len()).collect())
}
