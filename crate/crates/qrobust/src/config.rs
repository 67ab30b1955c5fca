//! Declarative experiment configuration (TOML).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qrobust_core::qml::{AttackTarget, Embedding, TrainConfig};
use qrobust_core::sdp::{Order, SolverConfig};

use crate::error::{Error, Result};

/// Budget grid of the Iris amplitude table.
pub const TABLE2_BUDGETS: [f64; 10] = [0.0, 0.03, 0.05, 0.08, 0.1, 0.13, 0.15, 0.18, 0.21, 0.23];
/// `(α, γ)` rows of the Iris amplitude table.
pub const TABLE2_PAIRS: [[f64; 2]; 7] =
    [[1.0, 0.0], [0.9, 0.05], [0.7, 0.15], [0.5, 0.25], [0.1, 0.45], [0.05, 0.48], [0.0, 0.5]];
pub const TAU_LEVELS: [f64; 3] = [0.05, 0.10, 0.15];
/// Budget range mapped onto `[0, 1]` when comparing embeddings.
pub const AMPLITUDE_BUDGET_SCALE: f64 = 0.25;
pub const ANGLE_BUDGET_SCALE: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetName {
    Iris,
    Pid,
    Bc,
}

impl DatasetName {
    pub fn as_str(&self) -> &'static str {
        match self {
            DatasetName::Iris => "iris",
            DatasetName::Pid => "pid",
            DatasetName::Bc => "bc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingKind {
    Amplitude,
    Angle,
}

impl From<EmbeddingKind> for Embedding {
    fn from(k: EmbeddingKind) -> Self {
        match k {
            EmbeddingKind::Amplitude => Embedding::Amplitude,
            EmbeddingKind::Angle => Embedding::Angle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderKind {
    Pre,
    Post,
}

impl From<OrderKind> for Order {
    fn from(o: OrderKind) -> Self {
        match o {
            OrderKind::Pre => Order::Pre,
            OrderKind::Post => Order::Post,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitPart {
    Train,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridMode {
    /// α × γ over `[0, 1] × [0, 0.5]`.
    Independent,
    /// `γ = (1 − α)/2` along the α axis.
    Paired,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetKind {
    Deployed,
    Clean,
}

impl From<TargetKind> for AttackTarget {
    fn from(t: TargetKind) -> Self {
        match t {
            TargetKind::Deployed => AttackTarget::Deployed,
            TargetKind::Clean => AttackTarget::Clean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub name: DatasetName,
    #[serde(default = "default_embedding")]
    pub embedding: EmbeddingKind,
    /// Raw CSV, relative to the config file.
    pub path: PathBuf,
}

fn default_embedding() -> EmbeddingKind {
    EmbeddingKind::Amplitude
}

/// Classifier settings; unset fields fall back to the per-dataset defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub qubits: Option<usize>,
    pub layers: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub epochs: Option<usize>,
    #[serde(default)]
    pub measured_qubit: usize,
    #[serde(default = "yes")]
    pub class_weighted: bool,
    /// Load this checkpoint instead of training.
    pub checkpoint: Option<PathBuf>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_depolarizing")]
    pub depolarizing: Vec<f64>,
    /// Defaults to the table grid for amplitude and `[0, 0.9]` for angle.
    pub budgets: Option<Vec<f64>>,
    #[serde(default = "default_taus")]
    pub tau_levels: Vec<f64>,
    /// Defaults to 0.05, or 0.01 for PID.
    pub gap_cutoff: Option<f64>,
    #[serde(default = "default_grid_size")]
    pub grid_size: usize,
    #[serde(default = "default_grid_mode")]
    pub grid_mode: GridMode,
    #[serde(default = "default_pairs")]
    pub table2_pairs: Vec<[f64; 2]>,
    /// `(α, γ)` of the optimal-channel curves.
    #[serde(default = "default_optimal")]
    pub optimal: [f64; 2],
    #[serde(default = "default_order")]
    pub order: OrderKind,
    /// Samples the channel is optimized on.
    #[serde(default = "default_optimize_on")]
    pub optimize_on: SplitPart,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            depolarizing: default_depolarizing(),
            budgets: None,
            tau_levels: default_taus(),
            gap_cutoff: None,
            grid_size: default_grid_size(),
            grid_mode: default_grid_mode(),
            table2_pairs: default_pairs(),
            optimal: default_optimal(),
            order: default_order(),
            optimize_on: default_optimize_on(),
        }
    }
}

fn default_depolarizing() -> Vec<f64> {
    vec![0.0, 0.25, 0.5, 0.75, 1.0]
}
fn default_taus() -> Vec<f64> {
    TAU_LEVELS.to_vec()
}
fn default_grid_size() -> usize {
    20
}
fn default_grid_mode() -> GridMode {
    GridMode::Independent
}
fn default_pairs() -> Vec<[f64; 2]> {
    TABLE2_PAIRS.to_vec()
}
fn default_optimal() -> [f64; 2] {
    [1.0, 0.0]
}
fn default_order() -> OrderKind {
    OrderKind::Pre
}
fn default_optimize_on() -> SplitPart {
    SplitPart::Test
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    pub max_iterations: usize,
    pub primal_tol: f64,
    pub dual_tol: f64,
    pub tp_tol: f64,
    pub psd_tol: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self { max_iterations: d.max_iterations, primal_tol: d.primal_tol, dual_tol: d.dual_tol, tp_tol: d.tp_tol, psd_tol: d.psd_tol }
    }
}

impl SolverSettings {
    pub fn to_solver(&self) -> SolverConfig {
        SolverConfig {
            max_iterations: self.max_iterations,
            primal_tol: self.primal_tol,
            dual_tol: self.dual_tol,
            tp_tol: self.tp_tol,
            psd_tol: self.psd_tol,
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AttackSettings {
    pub target: TargetKind,
    pub gradient_step: f64,
}

impl Default for AttackSettings {
    fn default() -> Self {
        Self { target: TargetKind::Deployed, gradient_step: qrobust_core::consts::FD_STEP }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    /// Member configs, relative to this file.
    pub members: Vec<PathBuf>,
    /// Budgets per member, evenly spaced over the normalized range `[0, 1]`.
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_points() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub workers: usize,
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub attack: AttackSettings,
    pub compare: Option<CompareConfig>,
    /// Directory relative paths resolve against; not serialized.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("results")
}

/// Concrete classifier hyperparameters after defaults are applied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSpec {
    pub qubits: usize,
    pub layers: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub measured_qubit: usize,
    pub class_weighted: bool,
}

/// Per-dataset defaults: `(qubits, layers, batch, learning rate, epochs)`.
pub fn table1_defaults(dataset: DatasetName, embedding: EmbeddingKind) -> (usize, usize, usize, f64, usize) {
    match (dataset, embedding) {
        (DatasetName::Iris, EmbeddingKind::Amplitude) => (2, 2, 30, 0.05, 100),
        (DatasetName::Iris, EmbeddingKind::Angle) => (3, 2, 30, 0.01, 100),
        (DatasetName::Bc, _) => (3, 40, 16, 0.0005, 10),
        (DatasetName::Pid, _) => (3, 16, 16, 0.005, 10),
    }
}

/// Deterministic 64-bit seed derived from the master seed and a label.
pub fn derive_seed(master: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(label.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, &base)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn embedding(&self) -> Embedding {
        self.dataset.embedding.into()
    }

    pub fn model_spec(&self) -> ModelSpec {
        let (q, l, b, lr, e) = table1_defaults(self.dataset.name, self.dataset.embedding);
        ModelSpec {
            qubits: self.model.qubits.unwrap_or(q),
            layers: self.model.layers.unwrap_or(l),
            batch_size: self.model.batch_size.unwrap_or(b),
            learning_rate: self.model.learning_rate.unwrap_or(lr),
            epochs: self.model.epochs.unwrap_or(e),
            measured_qubit: self.model.measured_qubit,
            class_weighted: self.model.class_weighted,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        let m = self.model_spec();
        TrainConfig {
            batch_size: m.batch_size,
            learning_rate: m.learning_rate,
            epochs: m.epochs,
            seed: self.train_seed(),
            class_weighted: m.class_weighted,
        }
    }

    pub fn budgets(&self) -> Vec<f64> {
        match (&self.sweep.budgets, self.dataset.embedding) {
            (Some(b), _) => b.clone(),
            (None, EmbeddingKind::Amplitude) => TABLE2_BUDGETS.to_vec(),
            (None, EmbeddingKind::Angle) => (0..10).map(|i| ANGLE_BUDGET_SCALE * i as f64 / 9.0).collect(),
        }
    }

    pub fn gap_cutoff(&self) -> f64 {
        self.sweep.gap_cutoff.unwrap_or(if self.dataset.name == DatasetName::Pid { 0.01 } else { 0.05 })
    }

    /// Divisor mapping this config's budgets onto `[0, 1]`.
    pub fn budget_scale(&self) -> f64 {
        match self.dataset.embedding {
            EmbeddingKind::Amplitude => AMPLITUDE_BUDGET_SCALE,
            EmbeddingKind::Angle => ANGLE_BUDGET_SCALE,
        }
    }

    pub fn split_seed(&self) -> u64 {
        derive_seed(self.seed, "split")
    }

    pub fn init_seed(&self) -> u64 {
        derive_seed(self.seed, "init")
    }

    pub fn train_seed(&self) -> u64 {
        derive_seed(self.seed, "train")
    }

    /// SHA-256 of the configuration with `out` and `workers` cleared, so the
    /// hash identifies results rather than where or how fast they were made.
    pub fn hash(&self) -> String {
        let mut canon = self.clone();
        canon.out = PathBuf::new();
        canon.workers = 0;
        let text = toml::to_string(&canon).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: &str| Err(Error::config(m));
        let budgets = self.budgets();
        if budgets.is_empty() || budgets.iter().any(|b| !(*b >= 0.0 && b.is_finite())) {
            return err("budgets must be non-negative");
        }
        if budgets.windows(2).any(|w| w[0] > w[1]) {
            return err("budgets must be ascending");
        }
        if self.sweep.depolarizing.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return err("depolarizing levels must lie in [0, 1]");
        }
        if self.sweep.tau_levels.iter().any(|t| !(*t > 0.0)) || self.sweep.tau_levels.windows(2).any(|w| w[0] >= w[1]) {
            return err("tau levels must be positive and strictly ascending");
        }
        if self.sweep.grid_size < 2 {
            return err("grid_size must be at least 2");
        }
        let in_grid = |ag: &[f64; 2]| (0.0..=1.0).contains(&ag[0]) && (0.0..=0.5).contains(&ag[1]);
        if !self.sweep.table2_pairs.iter().all(in_grid) || !in_grid(&self.sweep.optimal) {
            return err("(alpha, gamma) pairs must lie in [0, 1] x [0, 0.5]");
        }
        if !(self.gap_cutoff() >= 0.0) {
            return err("gap_cutoff must be non-negative");
        }
        let m = self.model_spec();
        if m.qubits == 0 || m.measured_qubit >= m.qubits {
            return err("measured_qubit must index a qubit of the register");
        }
        if m.batch_size == 0 || m.epochs == 0 || !(m.learning_rate >= 0.0) {
            return err("batch_size and epochs must be positive, learning_rate non-negative");
        }
        if !(self.attack.gradient_step > 0.0) {
            return err("attack.gradient_step must be positive");
        }
        if let Some(c) = &self.compare {
            if c.members.is_empty() || c.points < 2 {
                return err("compare needs at least one member and two points");
            }
        }
        self.solver.to_solver().validate().map_err(|e| Error::config(e.to_string()))?;
        Ok(())
    }
}
