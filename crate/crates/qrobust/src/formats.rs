//! JSON file formats: channels, solver reports, checkpoints and datasets.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use qrobust_core::channels::validate_cptp;
use qrobust_core::consts::{CHANNEL_LOAD_TOL, HERMITIAN_TOL};
use qrobust_core::data::Dataset;
use qrobust_core::qml::{Classifier, Embedding, TrainConfig};
use qrobust_core::sdp::{Order, SolverResult};
use qrobust_core::{CMatrix, ChoiMatrix, C64};

use crate::error::{Error, Result};

pub const CHOI_CONVENTION: &str = "in-out-unnormalized";

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format { path: path.to_path_buf(), message: e.to_string() })
}

/// Choi matrix `J = Σ |i⟩⟨j| ⊗ E(|i⟩⟨j|)` (input factor first, `Tr J = d`)
/// as row-major real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    pub dim: usize,
    pub convention: String,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl ChannelFile {
    pub fn from_choi(j: &ChoiMatrix) -> Self {
        let m = j.matrix();
        let n = m.rows();
        Self {
            dim: j.dim(),
            convention: CHOI_CONVENTION.to_string(),
            re: (0..n).map(|r| m.row(r).iter().map(|z| z.re).collect()).collect(),
            im: (0..n).map(|r| m.row(r).iter().map(|z| z.im).collect()).collect(),
        }
    }

    /// Rebuilds the Choi matrix and checks that it is CPTP within 1e-8.
    pub fn to_choi(&self) -> std::result::Result<ChoiMatrix, String> {
        if self.convention != CHOI_CONVENTION {
            return Err(format!("unsupported convention {:?}", self.convention));
        }
        let n = self.dim * self.dim;
        let shaped = |m: &Vec<Vec<f64>>| m.len() == n && m.iter().all(|r| r.len() == n);
        if !shaped(&self.re) || !shaped(&self.im) {
            return Err(format!("expected {n}x{n} re and im arrays"));
        }
        let m = CMatrix::from_fn(n, n, |r, c| C64::new(self.re[r][c], self.im[r][c]));
        if m.hermitian_deviation() > HERMITIAN_TOL.max(CHANNEL_LOAD_TOL) {
            return Err("matrix is not Hermitian".to_string());
        }
        let j = ChoiMatrix::from_matrix(self.dim, m.hermitian_part()).map_err(|e| e.to_string())?;
        let report = validate_cptp(&j, CHANNEL_LOAD_TOL);
        if !report.pass {
            return Err(format!("not CPTP (cp residual {:e}, tp residual {:e})", report.cp_residual, report.tp_residual));
        }
        Ok(j)
    }
}

pub fn write_channel(path: &Path, j: &ChoiMatrix) -> Result<()> {
    write_json(path, &ChannelFile::from_choi(j))
}

pub fn read_channel(path: &Path) -> Result<ChoiMatrix> {
    let file: ChannelFile = read_json(path)?;
    file.to_choi().map_err(|message| Error::Format { path: path.to_path_buf(), message })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub cp: f64,
    pub tp: f64,
    pub gamma_blocks: Vec<f64>,
    pub kappa_block: f64,
}

/// Sidecar written next to every solved channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub alpha: f64,
    pub gamma: f64,
    pub order: String,
    pub status: String,
    pub objective: f64,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub residuals: Residuals,
}

pub fn order_name(o: Order) -> &'static str {
    match o {
        Order::Pre => "pre",
        Order::Post => "post",
    }
}

impl SolveReport {
    pub fn new(alpha: f64, gamma: f64, order: Order, r: &SolverResult) -> Self {
        Self {
            alpha,
            gamma,
            order: order_name(order).to_string(),
            status: r.status.as_str().to_string(),
            objective: r.objective_value,
            iterations: r.iterations,
            primal_residual: r.primal_residual,
            dual_residual: r.dual_residual,
            residuals: Residuals {
                cp: r.residuals.cp,
                tp: r.residuals.tp,
                gamma_blocks: r.residuals.gamma_blocks.clone(),
                kappa_block: r.residuals.kappa_block,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfigFile {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub class_weighted: bool,
}

/// Trained classifier; `params` is indexed `[layer][qubit][angle]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub n_qubits: usize,
    pub layers: usize,
    pub embedding: String,
    pub measured_qubit: usize,
    pub params: Vec<Vec<[f64; 3]>>,
    pub seed: u64,
    pub train_config: TrainConfigFile,
}

impl Checkpoint {
    pub fn new(c: &Classifier, init_seed: u64, cfg: &TrainConfig) -> Self {
        let n = c.n_qubits();
        let params = (0..c.layers())
            .map(|l| (0..n).map(|q| {
                let base = (l * n + q) * 3;
                [c.params()[base], c.params()[base + 1], c.params()[base + 2]]
            }).collect())
            .collect();
        Self {
            n_qubits: n,
            layers: c.layers(),
            embedding: c.embedding().as_str().to_string(),
            measured_qubit: c.measured_qubit(),
            params,
            seed: init_seed,
            train_config: TrainConfigFile {
                batch_size: cfg.batch_size,
                learning_rate: cfg.learning_rate,
                epochs: cfg.epochs,
                seed: cfg.seed,
                class_weighted: cfg.class_weighted,
            },
        }
    }

    pub fn classifier(&self) -> std::result::Result<Classifier, String> {
        let embedding = match self.embedding.as_str() {
            "amplitude" => Embedding::Amplitude,
            "angle" => Embedding::Angle,
            other => return Err(format!("unknown embedding {other:?}")),
        };
        if self.params.len() != self.layers || self.params.iter().any(|l| l.len() != self.n_qubits) {
            return Err(format!("params must be shaped [{}][{}][3]", self.layers, self.n_qubits));
        }
        let flat = self.params.iter().flatten().flatten().copied().collect();
        Classifier::new(self.n_qubits, self.layers, embedding, self.measured_qubit, flat).map_err(|e| e.to_string())
    }
}

pub fn read_checkpoint(path: &Path) -> Result<Classifier> {
    let ck: Checkpoint = read_json(path)?;
    ck.classifier().map_err(|message| Error::Format { path: path.to_path_buf(), message })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFile {
    pub name: String,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub log: Vec<String>,
}

impl From<&Dataset> for DatasetFile {
    fn from(d: &Dataset) -> Self {
        Self {
            name: d.name.clone(),
            features: d.features.clone(),
            labels: d.labels.clone(),
            train: d.train.clone(),
            test: d.test.clone(),
            log: d.log.clone(),
        }
    }
}
