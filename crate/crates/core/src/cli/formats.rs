//! On-disk formats: point CSV, truth JSON, result JSON and metric rows.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::GroupCover;
use crate::geometry::{DataSet, Model};
use crate::pipeline::EstimationResult;

pub const RESULT_SCHEMA: u32 = 1;

const HEADERS: [&str; 3] = ["x", "y", "z"];

pub fn write_points(path: &Path, data: &DataSet) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    w.write_record(&HEADERS[..data.dim()]).map_err(|e| csv_error(path, e))?;
    for p in data.points() {
        w.write_record(p.iter().map(|x| x.to_string())).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_points(path: &Path) -> Result<DataSet> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = r.headers().map_err(|e| csv_error(path, e))?.clone();
    let dim = header.len();
    if !(2..=3).contains(&dim) || header.iter().zip(HEADERS).any(|(h, e)| h.trim() != e) {
        return Err(Error::Data(format!(
            "{}: expected header x,y or x,y,z",
            path.display()
        )));
    }
    let mut coords = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        for field in rec.iter() {
            let x: f64 = field.trim().parse().map_err(|_| {
                Error::Data(format!("{}: row {}: not a number: {field:?}", path.display(), row + 1))
            })?;
            coords.push(x);
        }
    }
    DataSet::new(dim, coords)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::Data(format!("{}: {other:?}", path.display())),
    }
}

/// Generator ground truth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthFile {
    pub universe: usize,
    pub groups: Vec<Vec<usize>>,
    /// Generating model per element, `null` for outliers.
    pub labels: Vec<Option<usize>>,
    pub models: Vec<Model>,
}

impl TruthFile {
    pub fn cover(&self) -> Result<GroupCover> {
        GroupCover::new(self.universe, self.groups.clone())
    }

    pub fn validate(&self) -> Result<()> {
        if self.labels.len() != self.universe {
            return Err(Error::Data(format!(
                "truth has {} labels for {} elements",
                self.labels.len(),
                self.universe
            )));
        }
        if let Some(l) = self.labels.iter().flatten().find(|l| **l >= self.models.len()) {
            return Err(Error::Data(format!("truth label {l} has no model")));
        }
        self.cover().map(|_| ())
    }
}

/// Settings a fit was run with, beyond those stored in the result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSettings {
    pub samples: usize,
    pub seed: u64,
    pub kappa: f64,
    pub epsilon: f64,
    pub h: usize,
    pub disjoint: bool,
    pub strict_mdl: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub schema: u32,
    pub settings: FitSettings,
    #[serde(flatten)]
    pub result: EstimationResult,
}

/// One evaluation row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub dataset: String,
    pub gnmi: f64,
    pub precision: f64,
    pub recall: f64,
    /// Present when the result carries disjoint labels.
    pub misclassification: Option<f64>,
    pub models: usize,
    pub truth_models: usize,
    pub seconds_total: f64,
    pub seconds_biclustering: f64,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.into(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.into(),
        source,
    })
}

pub fn read_result(path: &Path) -> Result<ResultFile> {
    let file: ResultFile = read_json(path)?;
    if file.schema != RESULT_SCHEMA {
        return Err(Error::Data(format!(
            "{}: unsupported result schema {}",
            path.display(),
            file.schema
        )));
    }
    Ok(file)
}

/// Writes serializable rows as CSV with a header.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// CSV text of serializable rows, header included.
pub fn csv_string<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for row in rows {
        w.serialize(row).expect("in-memory CSV");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV")).expect("UTF-8 CSV")
}
