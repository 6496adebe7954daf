//! Command-line front end: `generate`, `fit`, `eval` and `bench`.
//!
//! Exit codes: 0 on success, 2 on usage errors, 3 on data errors.

pub mod formats;
pub mod svg;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::biclustering::{extract_biclusters, BiclusterConfig, SolverMode};
use crate::datagen::{
    crossing_lines, exclusion_fixture, generate, parallel_planes, planted_preference, reestimate_truth, Structure,
    Synthetic, SyntheticSpec,
};
use crate::error::Error;
use crate::eval::{gnmi, misclassification_error, precision_recall_with, Averaging, GroupCover};
use crate::geometry::ModelFamily;
use crate::pipeline::{run_traced, PipelineConfig};
use crate::sketch::DEFAULT_SKETCH_ROWS;
use crate::validation::NfaConfig;
use formats::{FitSettings, Metrics, ResultFile, TruthFile, RESULT_SCHEMA};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "MULTIMODEL_THREADS";

#[derive(Debug, Parser)]
#[command(name = "multimodel", version, about = "Multiple model fitting with random sample ensembles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic dataset and its ground truth.
    Generate(GenerateArgs),
    /// Fit models to a dataset.
    Fit(FitArgs),
    /// Score fit results against ground truth.
    Eval(EvalArgs),
    /// Time both solvers on planted preference matrices of growing size.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenFamily {
    Star,
    Stairs,
    Circles,
    Noise,
    /// Two lines crossing at right angles.
    Crossing,
    /// Two vertical strips with a spurious horizontal alignment.
    Exclusion,
    /// Horizontal planes in the unit cube.
    Planes,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum, default_value = "star")]
    pub family: GenFamily,
    #[arg(long, default_value_t = 5)]
    pub models: usize,
    #[arg(long, default_value_t = 50)]
    pub per_model: usize,
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    /// Fraction of all elements that are outliers.
    #[arg(long, default_value_t = 0.0)]
    pub outlier_frac: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Existing output directory.
    #[arg(short, long)]
    pub out: PathBuf,
    /// Also write points.svg.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FitFamily {
    Line,
    Circle,
    Plane,
}

impl From<FitFamily> for ModelFamily {
    fn from(f: FitFamily) -> Self {
        match f {
            FitFamily::Line => ModelFamily::Line2D,
            FitFamily::Circle => ModelFamily::Circle2D,
            FitFamily::Plane => ModelFamily::Plane3D,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Rse,
    Arse,
}

impl From<Mode> for SolverMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Rse => SolverMode::Plain,
            Mode::Arse => SolverMode::Compressed,
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Point CSV with header x,y or x,y,z.
    pub dataset: PathBuf,
    /// Model family; lines for 2D data and planes for 3D data by default.
    #[arg(long, value_enum)]
    pub family: Option<FitFamily>,
    #[arg(long, value_enum, default_value = "rse")]
    pub mode: Mode,
    /// Inlier threshold; 0.04 for lines, 0.02 for circles and planes.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = NfaConfig::DEFAULT_KAPPA)]
    pub kappa: f64,
    #[arg(long, default_value_t = NfaConfig::DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Compression level of the accelerated solver.
    #[arg(long)]
    pub h: Option<usize>,
    /// Number of minimal samples; 2000 for lines and circles, 5000 for planes.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Assign every element to at most one model.
    #[arg(long)]
    pub disjoint: bool,
    /// Never select the last extracted bicluster.
    #[arg(long)]
    pub strict_mdl: bool,
    /// Result JSON; printed to stdout when absent.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// Points colored by model with the fitted models.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Preference matrix grouped by bicluster.
    #[arg(long)]
    pub heatmap: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Result JSON files.
    #[arg(long, required = true, num_args = 1..)]
    pub result: Vec<PathBuf>,
    /// Truth JSON files, one per result.
    #[arg(long, required = true, num_args = 1..)]
    pub truth: Vec<PathBuf>,
    /// Replace the generator groups by the consensus sets of the true models.
    #[arg(long, requires = "data")]
    pub reestimated: bool,
    /// Point CSV files, one per result; needed with --reestimated.
    #[arg(long, num_args = 1..)]
    pub data: Vec<PathBuf>,
    /// Threshold for re-estimation; defaults to the result's threshold.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Average precision and recall over matched pairs without size weights.
    #[arg(long)]
    pub unweighted: bool,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Output file; printed to stdout when absent.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Row counts of the planted matrices.
    #[arg(long, value_delimiter = ',', default_value = "250,1000,4000")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 700)]
    pub cols: usize,
    #[arg(long, default_value_t = 5)]
    pub blocks: usize,
    /// Repetitions per size; medians are reported.
    #[arg(long, default_value_t = 3)]
    pub seeds: u64,
    #[arg(long, default_value_t = DEFAULT_SKETCH_ROWS)]
    pub h: usize,
    /// Scaling CSV; printed to stdout when absent.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Data(Error::Config(_)) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Caps the global worker pool from [`THREADS_ENV`].
pub fn init_threads() -> CliResult<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {value:?}")))?;
    // A pool may already exist when embedded; the cap is then best effort.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match init_threads().and_then(|_| execute(&cli.command)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command) -> CliResult<()> {
    match command {
        Command::Generate(a) => cmd_generate(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

fn ensure_parent(path: &Path) -> CliResult<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(CliError::Usage(format!(
            "output directory {} does not exist",
            dir.display()
        ))),
        _ => Ok(()),
    }
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    ensure_parent(path)?;
    fs::write(path, text).map_err(|e| Error::io(path, e).into())
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Builds the dataset described by generator flags.
pub fn synthesize(a: &GenerateArgs) -> crate::Result<Synthetic> {
    let spec = |s: Structure| {
        SyntheticSpec::new(s, a.models, a.per_model)
            .sigma(a.sigma)
            .outliers(a.outlier_frac)
            .seed(a.seed)
    };
    let extra = |structured: usize| {
        let f = a.outlier_frac;
        if f >= 1.0 {
            structured
        } else {
            (f / (1.0 - f) * structured as f64).round() as usize
        }
    };
    match a.family {
        GenFamily::Star => generate(&spec(Structure::Star)),
        GenFamily::Stairs => generate(&spec(Structure::Stairs)),
        GenFamily::Circles => generate(&spec(Structure::Circles)),
        GenFamily::Noise => generate(&spec(Structure::Noise)),
        GenFamily::Crossing => {
            spec(Structure::Star).validate()?;
            Ok(crossing_lines(a.per_model, 0, a.sigma, extra(2 * a.per_model), a.seed))
        }
        GenFamily::Exclusion => Ok(exclusion_fixture(a.seed)),
        GenFamily::Planes => {
            spec(Structure::Star).validate()?;
            let heights: Vec<f64> = (1..=a.models).map(|t| t as f64 / (a.models + 1) as f64).collect();
            Ok(parallel_planes(&heights, a.per_model, a.sigma, extra(a.models * a.per_model), a.seed))
        }
    }
}

fn cmd_generate(a: &GenerateArgs) -> CliResult<()> {
    if !a.out.is_dir() {
        return Err(CliError::Usage(format!("output directory {} does not exist", a.out.display())));
    }
    let s = synthesize(a)?;
    formats::write_points(&a.out.join("points.csv"), &s.data)?;
    let truth = TruthFile {
        universe: s.data.len(),
        groups: s.truth.groups().to_vec(),
        labels: s.labels.clone(),
        models: s.models.clone(),
    };
    formats::write_json(&a.out.join("truth.json"), &truth)?;
    if a.svg {
        write_text(&a.out.join("points.svg"), &svg::overlay(&s.data, s.truth.groups(), &s.models))?;
    }
    Ok(())
}

/// Default inlier threshold per family.
pub fn default_delta(family: ModelFamily) -> f64 {
    match family {
        ModelFamily::Line2D => 0.04,
        ModelFamily::Circle2D | ModelFamily::Plane3D => 0.02,
    }
}

/// Pipeline configuration from fit flags and the dataset dimension.
pub fn fit_config(a: &FitArgs, dim: usize) -> CliResult<PipelineConfig> {
    let family: ModelFamily = match a.family {
        Some(f) => f.into(),
        None if dim == 3 => ModelFamily::Plane3D,
        None => ModelFamily::Line2D,
    };
    if family.dim() != dim {
        return Err(CliError::Usage(format!(
            "family {} needs {}D points, dataset is {dim}D",
            family.name(),
            family.dim()
        )));
    }
    let delta = a.delta.unwrap_or(default_delta(family));
    let mut cfg = PipelineConfig::new(family, delta, a.mode.into()).seed(a.seed);
    if let Some(n) = a.samples {
        cfg = cfg.samples(n);
    }
    cfg.nfa.kappa = a.kappa;
    cfg.nfa.epsilon = a.epsilon;
    if let Some(h) = a.h {
        if a.mode == Mode::Rse {
            eprintln!("warning: --h only applies to arse mode; ignored");
        } else {
            cfg.h = h;
        }
    }
    cfg.disjoint_output = a.disjoint;
    cfg.strict_mdl = a.strict_mdl;
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_fit(a: &FitArgs) -> CliResult<()> {
    for path in [&a.out, &a.svg, &a.heatmap].into_iter().flatten() {
        ensure_parent(path)?;
    }
    let data = formats::read_points(&a.dataset)?;
    let cfg = fit_config(a, data.dim())?;
    let (result, trace) = run_traced(&data, &cfg)?;
    if let Some(path) = &a.svg {
        let groups = result.cover().groups().to_vec();
        let models: Vec<_> = result.models.iter().map(|m| m.model).collect();
        write_text(path, &svg::overlay(&data, &groups, &models))?;
    }
    if let Some(path) = &a.heatmap {
        write_text(path, &svg::heatmap(&trace.preference, &trace.biclusters, 160))?;
    }
    let file = ResultFile {
        schema: RESULT_SCHEMA,
        settings: FitSettings {
            samples: cfg.sampling.n_samples,
            seed: cfg.sampling.seed,
            kappa: cfg.nfa.kappa,
            epsilon: cfg.nfa.epsilon,
            h: cfg.h,
            disjoint: cfg.disjoint_output,
            strict_mdl: cfg.strict_mdl,
        },
        result,
    };
    match &a.out {
        Some(path) => formats::write_json(path, &file)?,
        None => println!("{}", serde_json::to_string_pretty(&file).expect("result serializes")),
    }
    Ok(())
}

fn dataset_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

/// Scores one result against its truth.
pub fn evaluate(result: &ResultFile, truth: &TruthFile, truth_cover: &GroupCover, averaging: Averaging) -> CliResult<Metrics> {
    let r = &result.result;
    if r.num_elements != truth.universe || truth_cover.universe() != truth.universe {
        return Err(Error::Data(format!(
            "result covers {} elements, truth covers {}",
            r.num_elements, truth.universe
        ))
        .into());
    }
    let pred = r.cover();
    let (precision, recall) = precision_recall_with(&pred, truth_cover, averaging);
    let misclassification = r.labels.as_ref().map(|l| misclassification_error(l, &truth.labels));
    Ok(Metrics {
        dataset: String::new(),
        gnmi: gnmi(&pred, truth_cover),
        precision,
        recall,
        misclassification,
        models: r.models.len(),
        truth_models: truth_cover.len(),
        seconds_total: r.timings.total,
        seconds_biclustering: r.timings.biclustering,
    })
}

fn cmd_eval(a: &EvalArgs) -> CliResult<()> {
    if a.result.len() != a.truth.len() {
        return Err(CliError::Usage(format!(
            "{} result files but {} truth files",
            a.result.len(),
            a.truth.len()
        )));
    }
    if a.reestimated && a.data.len() != a.result.len() {
        return Err(CliError::Usage("--reestimated needs one --data file per result".into()));
    }
    if let Some(path) = &a.out {
        ensure_parent(path)?;
    }
    let averaging = if a.unweighted {
        Averaging::Unweighted
    } else {
        Averaging::SizeWeighted
    };
    let mut rows = Vec::with_capacity(a.result.len());
    for (k, (rp, tp)) in a.result.iter().zip(&a.truth).enumerate() {
        let result = formats::read_result(rp)?;
        let truth: TruthFile = formats::read_json(tp)?;
        truth.validate()?;
        let cover = if a.reestimated {
            let data = formats::read_points(&a.data[k])?;
            if data.len() != truth.universe {
                return Err(Error::Data(format!(
                    "{} has {} points, truth covers {}",
                    a.data[k].display(),
                    data.len(),
                    truth.universe
                ))
                .into());
            }
            reestimate_truth(&data, &truth.models, a.delta.unwrap_or(result.result.delta))
        } else {
            truth.cover()?
        };
        let mut row = evaluate(&result, &truth, &cover, averaging)?;
        row.dataset = dataset_name(rp);
        rows.push(row);
    }
    let text = match a.format {
        Format::Csv => formats::csv_string(&rows),
        Format::Json if rows.len() == 1 => serde_json::to_string_pretty(&rows[0]).expect("metrics serialize") + "\n",
        Format::Json => serde_json::to_string_pretty(&rows).expect("metrics serialize") + "\n",
    };
    emit(a.out.as_deref(), &text)
}

/// Median wall-clock time of one solver at one size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub m: usize,
    pub n: usize,
    pub mode: String,
    pub seconds: f64,
    /// Seconds per matrix entry, times 1e9.
    pub ns_per_entry: f64,
    /// Plain over compressed median time at this size.
    pub speedup: f64,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let k = xs.len();
    if k % 2 == 1 {
        xs[k / 2]
    } else {
        0.5 * (xs[k / 2 - 1] + xs[k / 2])
    }
}

/// Times bicluster extraction with both solvers on planted matrices, one
/// plain and one compressed row per size.
pub fn scaling(sizes: &[usize], n: usize, blocks: usize, seeds: u64, h: usize) -> Vec<BenchRow> {
    let mut rows = Vec::with_capacity(2 * sizes.len());
    for &m in sizes {
        let mut times = [Vec::new(), Vec::new()];
        for seed in 0..seeds {
            let planted = planted_preference(m, n, blocks, 0.9, 0.02, seed);
            for (slot, mode) in [SolverMode::Plain, SolverMode::Compressed].into_iter().enumerate() {
                let cfg = BiclusterConfig {
                    mode,
                    sketch_rows: h,
                    max_biclusters: Some(blocks),
                    seed,
                    ..BiclusterConfig::default()
                };
                let t = Instant::now();
                let run = extract_biclusters(&planted.matrix, &cfg);
                times[slot].push(t.elapsed().as_secs_f64());
                std::hint::black_box(run);
            }
        }
        let [plain, compressed] = times.map(median);
        let speedup = plain / compressed;
        for (mode, seconds) in [("rse", plain), ("arse", compressed)] {
            rows.push(BenchRow {
                m,
                n,
                mode: mode.into(),
                seconds,
                ns_per_entry: seconds / (m * n) as f64 * 1e9,
                speedup,
            });
        }
    }
    rows
}

fn cmd_bench(a: &BenchArgs) -> CliResult<()> {
    if a.sizes.is_empty() || a.seeds == 0 || a.h == 0 {
        return Err(CliError::Usage("bench needs at least one size, one seed and h >= 1".into()));
    }
    if let Some(&m) = a.sizes.iter().find(|&&m| m < 2 * a.blocks) {
        return Err(CliError::Usage(format!("size {m} is too small for {} blocks", a.blocks)));
    }
    if a.cols < 2 * a.blocks {
        return Err(CliError::Usage(format!("{} columns are too few for {} blocks", a.cols, a.blocks)));
    }
    for path in [&a.out, &a.svg].into_iter().flatten() {
        ensure_parent(path)?;
    }
    let rows = scaling(&a.sizes, a.cols, a.blocks, a.seeds, a.h);
    if let Some(path) = &a.svg {
        let series = |mode: &str, f: fn(&BenchRow) -> f64| {
            rows.iter().filter(|r| r.mode == mode).map(|r| (r.m as f64, f(r))).collect::<Vec<_>>()
        };
        let panel = |title, f: fn(&BenchRow) -> f64| svg::Panel {
            title,
            series: vec![
                svg::Series { label: "rse", points: series("rse", f) },
                svg::Series { label: "arse", points: series("arse", f) },
            ],
        };
        let panels = [panel("seconds", |r| r.seconds), panel("ns per matrix entry", |r| r.ns_per_entry)];
        write_text(path, &svg::scaling_plot("rows m", &panels))?;
    }
    emit(a.out.as_deref(), &formats::csv_string(&rows))
}
