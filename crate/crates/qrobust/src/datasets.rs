//! CSV readers for the raw dataset files.
//!
//! | dataset | columns (header row required, extra columns ignored) |
//! |---------|------------------------------------------------------|
//! | iris | `sepal_length, sepal_width, petal_length, petal_width, species` |
//! | pid  | `Pregnancies, Glucose, BloodPressure, SkinThickness, Insulin, BMI, DiabetesPedigreeFunction, Age, Outcome` |
//! | bc   | `clump_thickness, uniformity_cell_size, uniformity_cell_shape, marginal_adhesion, single_epithelial_cell_size, bare_nuclei, bland_chromatin, normal_nucleoli, mitoses, class` |
//!
//! Empty cells, `?`, `NA` and `nan` are read as missing.

use std::path::Path;

use qrobust_core::data::{prepare_bc, prepare_iris, prepare_pid, BcRecord, Dataset, IrisRecord, PidRecord};

use crate::config::{DatasetName, ExperimentConfig};
use crate::error::{Error, Result};

pub const IRIS_COLUMNS: [&str; 5] = ["sepal_length", "sepal_width", "petal_length", "petal_width", "species"];
pub const PID_COLUMNS: [&str; 9] = [
    "Pregnancies",
    "Glucose",
    "BloodPressure",
    "SkinThickness",
    "Insulin",
    "BMI",
    "DiabetesPedigreeFunction",
    "Age",
    "Outcome",
];
pub const BC_COLUMNS: [&str; 10] = [
    "clump_thickness",
    "uniformity_cell_size",
    "uniformity_cell_shape",
    "marginal_adhesion",
    "single_epithelial_cell_size",
    "bare_nuclei",
    "bland_chromatin",
    "normal_nucleoli",
    "mitoses",
    "class",
];

struct Table {
    rows: Vec<Vec<String>>,
}

fn read_table(path: &Path, columns: &[&str]) -> Result<Table> {
    let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(csv_err)?;
    let headers = reader.headers().map_err(csv_err)?.clone();
    let idx = columns
        .iter()
        .map(|c| {
            headers.iter().position(|h| h == *c).ok_or_else(|| Error::Format {
                path: path.to_path_buf(),
                message: format!("missing column {c:?}"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(csv_err)?;
        rows.push(idx.iter().map(|&i| rec.get(i).unwrap_or("").to_string()).collect());
    }
    Ok(Table { rows })
}

fn cell(path: &Path, row: usize, s: &str) -> Result<Option<f64>> {
    if s.is_empty() || s == "?" || s.eq_ignore_ascii_case("na") || s.eq_ignore_ascii_case("nan") {
        return Ok(None);
    }
    s.parse::<f64>().map(Some).map_err(|_| Error::Format {
        path: path.to_path_buf(),
        message: format!("row {}: cannot parse {s:?} as a number", row + 1),
    })
}

fn required(path: &Path, row: usize, s: &str) -> Result<f64> {
    cell(path, row, s)?.ok_or_else(|| Error::Format { path: path.to_path_buf(), message: format!("row {}: missing value", row + 1) })
}

fn label(path: &Path, row: usize, s: &str) -> Result<Option<u8>> {
    match cell(path, row, s)? {
        None => Ok(None),
        Some(v) if v.fract() == 0.0 && (0.0..=255.0).contains(&v) => Ok(Some(v as u8)),
        Some(v) => Err(Error::Format { path: path.to_path_buf(), message: format!("row {}: label {v} is not an integer", row + 1) }),
    }
}

pub fn read_iris(path: &Path) -> Result<Vec<IrisRecord>> {
    let t = read_table(path, &IRIS_COLUMNS)?;
    t.rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut features = [0.0; 4];
            for (f, s) in features.iter_mut().zip(&r[..4]) {
                *f = required(path, i, s)?;
            }
            Ok(IrisRecord { features, species: r[4].clone() })
        })
        .collect()
}

pub fn read_pid(path: &Path) -> Result<Vec<PidRecord>> {
    let t = read_table(path, &PID_COLUMNS)?;
    t.rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut values = [None; 8];
            for (v, s) in values.iter_mut().zip(&r[..8]) {
                *v = cell(path, i, s)?;
            }
            Ok(PidRecord { values, outcome: label(path, i, &r[8])? })
        })
        .collect()
}

pub fn read_bc(path: &Path) -> Result<Vec<BcRecord>> {
    let t = read_table(path, &BC_COLUMNS)?;
    t.rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut values = [None; 9];
            for (v, s) in values.iter_mut().zip(&r[..9]) {
                *v = cell(path, i, s)?;
            }
            Ok(BcRecord { values, class: label(path, i, &r[9])? })
        })
        .collect()
}

/// Reads and preprocesses the dataset named in `cfg`.
pub fn load_dataset(cfg: &ExperimentConfig) -> Result<Dataset> {
    let path = cfg.resolve(&cfg.dataset.path);
    if !path.exists() {
        return Err(Error::config(format!(
            "dataset file {} not found (see scripts/fetch_data.sh)",
            path.display()
        )));
    }
    let seed = cfg.split_seed();
    Ok(match cfg.dataset.name {
        DatasetName::Iris => prepare_iris(&read_iris(&path)?, seed, cfg.embedding())?,
        DatasetName::Pid => prepare_pid(&read_pid(&path)?, seed)?,
        DatasetName::Bc => prepare_bc(&read_bc(&path)?, seed)?,
    })
}
