//! A contrario validation: the number of false alarms (NFA) of a model under
//! a locally uniform background, the column pre-filter, the exclusion
//! principle post-filter and the optional disjoint assignment.
//!
//! NFA values are handled in log10 internally; a model is meaningful when
//! `NFA < epsilon`.

use rayon::prelude::*;
use statrs::function::factorial::ln_binomial;

use crate::geometry::{band_counts, DataSet, Model, ModelFamily};
use crate::sampling::{HypothesisPool, PreferenceMatrix};

const LN_10: f64 = std::f64::consts::LN_10;

/// Parameters of the meaningfulness test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NfaConfig {
    /// Locality factor: the wide band has half-width `kappa * delta`.
    pub kappa: f64,
    /// Meaningfulness threshold.
    pub epsilon: f64,
    pub delta: f64,
}

impl NfaConfig {
    pub const DEFAULT_KAPPA: f64 = 3.0;
    pub const DEFAULT_EPSILON: f64 = 1.0;

    pub fn new(delta: f64) -> Self {
        Self {
            kappa: Self::DEFAULT_KAPPA,
            epsilon: Self::DEFAULT_EPSILON,
            delta,
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        if !(self.kappa > 1.0) {
            return Err(crate::Error::Config(format!("kappa must exceed 1, got {}", self.kappa)));
        }
        if !(self.epsilon >= 0.0) {
            return Err(crate::Error::Config(format!(
                "epsilon must be nonnegative, got {}",
                self.epsilon
            )));
        }
        if !(self.delta >= 0.0) {
            return Err(crate::Error::Config(format!("delta must be nonnegative, got {}", self.delta)));
        }
        Ok(())
    }

    fn log10_epsilon(&self) -> f64 {
        self.epsilon.log10()
    }
}

/// Natural log of the binomial tail `P[Bin(n, p) >= k_min]`.
///
/// Panics if `n_trials < 0` or `p` lies outside `[0, 1]`.
pub fn ln_binomial_tail(n_trials: i64, k_min: i64, p: f64) -> f64 {
    assert!(n_trials >= 0, "binomial tail needs a nonnegative trial count");
    assert!((0.0..=1.0).contains(&p), "probability out of range: {p}");
    if k_min <= 0 {
        return 0.0;
    }
    if k_min > n_trials {
        return f64::NEG_INFINITY;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return 0.0;
    }
    let n = n_trials as u64;
    let k0 = k_min as u64;
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let mode = (n as f64 + 1.0) * p;
    if (k0 as f64) <= mode {
        // Upper tail holds most of the mass: take the complement of the
        // short lower tail to keep full relative precision near 1.
        let lower = ln_tail_sum(n, k0 - 1, ln_p, ln_q, false);
        return (-lower.exp()).ln_1p().min(0.0);
    }
    ln_tail_sum(n, k0, ln_p, ln_q, true).min(0.0)
}

/// Log-sum-exp of the binomial terms from `start` up to `n` (`upward`) or
/// down to 0, via the term ratio recurrence. The walk starts on the far
/// side of the mode, so terms shrink geometrically and the sum is cut once
/// they drop below `e^-45` of the running maximum.
fn ln_tail_sum(n: u64, start: u64, ln_p: f64, ln_q: f64, upward: bool) -> f64 {
    let ln_odds = ln_p - ln_q;
    let mut ln_term = ln_binomial(n, start) + start as f64 * ln_p + (n - start) as f64 * ln_q;
    let max = ln_term;
    let mut scaled = 1.0;
    let mut k = start;
    loop {
        if upward {
            if k == n {
                break;
            }
            ln_term += ((n - k) as f64 / (k + 1) as f64).ln() + ln_odds;
            k += 1;
        } else {
            if k == 0 {
                break;
            }
            ln_term += (k as f64 / (n - k + 1) as f64).ln() - ln_odds;
            k -= 1;
        }
        scaled += (ln_term - max).exp();
        if ln_term < max - 45.0 {
            break;
        }
    }
    max + scaled.ln()
}

/// `P[Bin(n_trials, p) >= k_min]`.
pub fn binomial_tail(n_trials: i64, k_min: i64, p: f64) -> f64 {
    ln_binomial_tail(n_trials, k_min, p).exp()
}

/// log10 of `C(m, b)`, the number of possible minimal-sample models.
pub fn log10_num_tests(m: usize, b: usize) -> f64 {
    ln_binomial(m as u64, b as u64) / LN_10
}

/// log10 NFA from band counts: `C(m, b) * B(n_wide - b, n_narrow - b, 1/kappa)`.
///
/// Models supported by no more than `b` elements get `NFA = C(m, b)`.
pub fn log10_nfa_from_counts(m: usize, b: usize, narrow: usize, wide: usize, kappa: f64) -> f64 {
    let tests = log10_num_tests(m, b);
    if narrow <= b {
        return tests;
    }
    let wide = wide.max(narrow);
    tests + ln_binomial_tail((wide - b) as i64, (narrow - b) as i64, 1.0 / kappa) / LN_10
}

/// log10 NFA of `model` against the whole dataset.
pub fn log10_nfa(data: &DataSet, model: &Model, config: &NfaConfig) -> f64 {
    let (narrow, wide) = band_counts(model, data, config.delta, config.kappa * config.delta);
    log10_nfa_from_counts(
        data.len(),
        model.family().min_sample_size(),
        narrow,
        wide,
        config.kappa,
    )
}

/// NFA of `model` on the whole dataset (may underflow to zero).
pub fn nfa(data: &DataSet, model: &Model, config: &NfaConfig) -> f64 {
    10f64.powf(log10_nfa(data, model, config))
}

pub fn is_meaningful(log10_nfa: f64, config: &NfaConfig) -> bool {
    log10_nfa < config.log10_epsilon()
}

/// log10 NFA of every hypothesis in the pool.
pub fn pool_log10_nfa(data: &DataSet, pool: &HypothesisPool, config: &NfaConfig) -> Vec<f64> {
    pool.hypotheses
        .par_iter()
        .map(|h| log10_nfa(data, &h.model, config))
        .collect()
}

/// Keeps the columns whose hypothesis is epsilon-meaningful, in order.
///
/// `matrix.col_meta()` must index into `pool`.
pub fn prefilter_columns(
    matrix: &PreferenceMatrix,
    pool: &HypothesisPool,
    data: &DataSet,
    config: &NfaConfig,
) -> PreferenceMatrix {
    let meaningful: Vec<bool> = matrix
        .col_meta()
        .par_iter()
        .map(|&h| is_meaningful(log10_nfa(data, &pool.hypotheses[h].model, config), config))
        .collect();
    let keep: Vec<usize> = meaningful
        .iter()
        .enumerate()
        .filter(|(_, &ok)| ok)
        .map(|(j, _)| j)
        .collect();
    matrix.select_columns(&keep)
}

/// A model kept by the exclusion principle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kept {
    /// Position in the input list.
    pub index: usize,
    /// log10 NFA evaluated on the elements not yet claimed.
    pub log10_nfa: f64,
}

/// Exclusion principle: visit the pairs in order, keep a pair if its model is
/// meaningful on the elements not claimed by previously kept pairs, and then
/// claim its consensus set.
///
/// The number of tests stays `C(m, b)` for the full dataset size `m`.
pub fn exclusion_filter(pairs: &[(Vec<usize>, Model)], data: &DataSet, config: &NfaConfig) -> Vec<Kept> {
    let mut available = vec![true; data.len()];
    let wide_delta = config.kappa * config.delta;
    let mut kept = Vec::new();
    for (t, (consensus, model)) in pairs.iter().enumerate() {
        let mut narrow = 0;
        let mut wide = 0;
        for (i, p) in data.points().enumerate() {
            if !available[i] {
                continue;
            }
            let e = model.error(p);
            if e <= wide_delta {
                wide += 1;
            }
            if e <= config.delta {
                narrow += 1;
            }
        }
        let value = log10_nfa_from_counts(
            data.len(),
            model.family().min_sample_size(),
            narrow,
            wide,
            config.kappa,
        );
        if is_meaningful(value, config) {
            kept.push(Kept {
                index: t,
                log10_nfa: value,
            });
            for &i in consensus {
                available[i] = false;
            }
        }
    }
    kept
}

/// Assigns every claimed element to the closest claiming model (ties go to
/// the lower model index). Unclaimed elements map to `None`.
pub fn assign_disjoint(pairs: &[(Vec<usize>, Model)], data: &DataSet) -> Vec<Option<usize>> {
    let mut best: Vec<Option<(usize, f64)>> = vec![None; data.len()];
    for (t, (consensus, model)) in pairs.iter().enumerate() {
        for &i in consensus {
            let e = model.error(data.point(i));
            match best[i] {
                Some((_, current)) if current <= e => {}
                _ => best[i] = Some((t, e)),
            }
        }
    }
    best.into_iter().map(|b| b.map(|(t, _)| t)).collect()
}

/// Convenience wrapper returning the family's minimal sample size.
pub fn num_tests(m: usize, family: ModelFamily) -> f64 {
    10f64.powf(log10_num_tests(m, family.min_sample_size()))
}
