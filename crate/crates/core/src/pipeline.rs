//! End-to-end estimation: hypothesis sampling, preference matrix, NFA
//! pre-filter, biclustering, least-squares refit, exclusion post-filter and
//! optional disjoint assignment.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::biclustering::{extract_biclusters, BiclusterConfig, BiclusterRun, SolverMode};
use crate::error::{Error, Result};
use crate::geometry::{consensus_set, DataSet, Model, ModelFamily};
use crate::l1nmf::SolverConfig;
use crate::sampling::{build_preference_matrix, draw_hypotheses, PreferenceMatrix, SamplingConfig};
use crate::sketch::DEFAULT_SKETCH_ROWS;
use crate::validation::{assign_disjoint, exclusion_filter, prefilter_columns, NfaConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub family: ModelFamily,
    pub sampling: SamplingConfig,
    pub nfa: NfaConfig,
    pub solver: SolverConfig,
    pub mode: SolverMode,
    /// Compression level of the compressed solver.
    pub h: usize,
    pub disjoint_output: bool,
    pub strict_mdl: bool,
}

impl PipelineConfig {
    /// Default parameters for `family` at inlier threshold `delta`.
    pub fn new(family: ModelFamily, delta: f64, mode: SolverMode) -> Self {
        Self {
            family,
            sampling: SamplingConfig::new(SamplingConfig::default_samples(family), 0, delta),
            nfa: NfaConfig::new(delta),
            solver: SolverConfig::default(),
            mode,
            h: DEFAULT_SKETCH_ROWS,
            disjoint_output: false,
            strict_mdl: false,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.sampling.seed = seed;
        self
    }

    pub fn samples(mut self, n: usize) -> Self {
        self.sampling.n_samples = n;
        self
    }

    pub fn delta(&self) -> f64 {
        self.sampling.delta
    }

    pub fn validate(&self) -> Result<()> {
        self.sampling.validate()?;
        self.nfa.validate()?;
        self.solver.validate()?;
        if self.sampling.delta != self.nfa.delta {
            return Err(Error::Config(format!(
                "sampling and validation thresholds differ ({} vs {})",
                self.sampling.delta, self.nfa.delta
            )));
        }
        if self.h == 0 {
            return Err(Error::Config("compression level must be at least 1".into()));
        }
        Ok(())
    }

    fn bicluster_config(&self) -> BiclusterConfig {
        BiclusterConfig {
            mode: self.mode,
            solver: self.solver,
            sketch_rows: self.h,
            strict_mdl: self.strict_mdl,
            seed: self.sampling.seed ^ 0x5bd1_e995,
            ..BiclusterConfig::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatedModel {
    pub model: Model,
    /// Elements within `delta` of `model`, ascending.
    pub consensus: Vec<usize>,
    /// log10 NFA on the elements left unclaimed by earlier models.
    pub log10_nfa: f64,
    /// Index of the bicluster the model came from.
    pub bicluster: usize,
}

/// Wall-clock seconds per stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub sampling: f64,
    pub prefilter: f64,
    pub biclustering: f64,
    pub refit: f64,
    pub exclusion: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub family: ModelFamily,
    pub mode: SolverMode,
    pub delta: f64,
    pub num_elements: usize,
    pub models: Vec<EstimatedModel>,
    /// Per-element model index (into `models`) when disjoint output is on.
    pub labels: Option<Vec<Option<usize>>>,
    /// Preference matrix shape before the pre-filter.
    pub dims_before: (usize, usize),
    /// Preference matrix shape after the pre-filter.
    pub dims_after: (usize, usize),
    pub biclusters_extracted: usize,
    pub biclusters_selected: usize,
    pub timings: StageTimings,
}

fn seconds(since: Instant) -> f64 {
    since.elapsed().as_secs_f64()
}

/// Intermediate products of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    /// Preference matrix after the pre-filter.
    pub preference: PreferenceMatrix,
    pub biclusters: BiclusterRun,
}

/// Runs the whole estimation chain on `data`.
pub fn run(data: &DataSet, config: &PipelineConfig) -> Result<EstimationResult> {
    run_traced(data, config).map(|(result, _)| result)
}

/// Like [`run`], also returning the filtered preference matrix and the
/// extracted biclusters.
pub fn run_traced(data: &DataSet, config: &PipelineConfig) -> Result<(EstimationResult, Trace)> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::Data("dataset is empty".into()));
    }
    let delta = config.delta();
    let start = Instant::now();
    let mut timings = StageTimings::default();

    let t = Instant::now();
    let pool = draw_hypotheses(data, config.family, &config.sampling)?;
    let matrix = build_preference_matrix(data, &pool);
    timings.sampling = seconds(t);

    let t = Instant::now();
    let filtered = prefilter_columns(&matrix, &pool, data, &config.nfa);
    timings.prefilter = seconds(t);

    let t = Instant::now();
    let run = extract_biclusters(&filtered.to_dense(), &config.bicluster_config());
    timings.biclustering = seconds(t);

    let t = Instant::now();
    let b = config.family.min_sample_size();
    let mut candidates: Vec<(usize, usize, Vec<usize>, Model)> = Vec::new();
    for (k, bc) in run.biclusters.iter().take(run.k_selected).enumerate() {
        if bc.rows.len() < b {
            continue;
        }
        let Ok(model) = config.family.fit_subset(data, &bc.rows) else {
            continue;
        };
        let consensus = consensus_set(&model, data, delta);
        if consensus.is_empty() {
            continue;
        }
        candidates.push((k, bc.area(), consensus, model));
    }
    // Larger biclusters first; the sort is stable so ties keep extraction order.
    candidates.sort_by(|x, y| y.1.cmp(&x.1));
    timings.refit = seconds(t);

    let t = Instant::now();
    let pairs: Vec<(Vec<usize>, Model)> = candidates.iter().map(|c| (c.2.clone(), c.3.clone())).collect();
    let kept = exclusion_filter(&pairs, data, &config.nfa);
    let models: Vec<EstimatedModel> = kept
        .iter()
        .map(|k| EstimatedModel {
            model: candidates[k.index].3.clone(),
            consensus: candidates[k.index].2.clone(),
            log10_nfa: k.log10_nfa,
            bicluster: candidates[k.index].0,
        })
        .collect();
    let labels = config.disjoint_output.then(|| {
        let kept_pairs: Vec<(Vec<usize>, Model)> =
            models.iter().map(|m| (m.consensus.clone(), m.model.clone())).collect();
        assign_disjoint(&kept_pairs, data)
    });
    timings.exclusion = seconds(t);
    timings.total = seconds(start);

    let result = EstimationResult {
        family: config.family,
        mode: config.mode,
        delta,
        num_elements: data.len(),
        models,
        labels,
        dims_before: (matrix.nrows(), matrix.ncols()),
        dims_after: (filtered.nrows(), filtered.ncols()),
        biclusters_extracted: run.biclusters.len(),
        biclusters_selected: run.k_selected,
        timings,
    };
    Ok((
        result,
        Trace {
            preference: filtered,
            biclusters: run,
        },
    ))
}

impl EstimationResult {
    /// Consensus sets of the returned models, or the disjoint groups when
    /// labels are present.
    pub fn cover(&self) -> crate::eval::GroupCover {
        let groups: Vec<Vec<usize>> = match &self.labels {
            Some(labels) => {
                let mut g = vec![Vec::new(); self.models.len()];
                for (i, l) in labels.iter().enumerate() {
                    if let Some(l) = l {
                        g[*l].push(i);
                    }
                }
                g
            }
            None => self.models.iter().map(|m| m.consensus.clone()).collect(),
        };
        let groups = groups.into_iter().filter(|g| !g.is_empty()).collect();
        crate::eval::GroupCover::new(self.num_elements, groups).expect("indices come from the dataset")
    }
}
