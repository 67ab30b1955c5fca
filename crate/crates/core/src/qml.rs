//! Statevector simulation of strongly entangling classifiers: embeddings,
//! forward passes with optional noise channels, training and FGSM.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

// only needed when std is absent from the build
#[allow(unused_imports)]
use num_traits::Float;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::channels::{ChannelError, ChoiMatrix, DensityMatrix, PovmSet};
use crate::consts::{AMPLITUDE_NORM_TOL, FD_STEP, GRAD_ZERO_TOL, PROB_FLOOR, TIE_TOL};
use crate::gates;
use crate::qmat::{CMatrix, C64, ZERO};
use crate::sdp::{class_weights, Order};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QmlError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("expected {expected} parameters, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("amplitude input has norm {norm}, expected 1")]
    Norm { norm: f64 },
    #[error("input length {got} does not fit (expected {expected})")]
    Length { expected: usize, got: usize },
    #[error("angle input {value} outside [0, π]")]
    OutOfRange { value: f64 },
    #[error("label {0} is not binary")]
    Label(usize),
    #[error("loss diverged at epoch {epoch}")]
    Divergence { epoch: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("noise channel acts on dimension {got}, classifier on {expected}")]
    NoiseDimension { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Embedding {
    Amplitude,
    Angle,
}

impl Embedding {
    pub fn as_str(&self) -> &'static str {
        match self {
            Embedding::Amplitude => "amplitude",
            Embedding::Angle => "angle",
        }
    }
}

/// State vector of `x` under `kind`, validating the input contract.
pub fn embed_state(x: &[f64], kind: Embedding, n_qubits: usize) -> Result<Vec<C64>, QmlError> {
    let d = 1usize << n_qubits;
    match kind {
        Embedding::Amplitude => {
            if x.len() > d {
                return Err(QmlError::Length { expected: d, got: x.len() });
            }
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > AMPLITUDE_NORM_TOL {
                return Err(QmlError::Norm { norm });
            }
        }
        Embedding::Angle => {
            if x.len() != n_qubits {
                return Err(QmlError::Length { expected: n_qubits, got: x.len() });
            }
            if let Some(&value) = x.iter().find(|v| !(0.0..=PI).contains(*v)) {
                return Err(QmlError::OutOfRange { value });
            }
        }
    }
    Ok(raw_state(x, kind, n_qubits))
}

/// State vector without input validation. Amplitude inputs are rescaled to
/// unit norm, angle inputs are used as given.
fn raw_state(x: &[f64], kind: Embedding, n_qubits: usize) -> Vec<C64> {
    let d = 1usize << n_qubits;
    match kind {
        Embedding::Amplitude => {
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let mut psi = alloc::vec![ZERO; d];
            for (p, v) in psi.iter_mut().zip(x) {
                *p = C64::new(v / norm, 0.0);
            }
            psi
        }
        Embedding::Angle => {
            let mut psi = alloc::vec![C64::new(1.0, 0.0)];
            for &theta in x {
                let (s, c) = (theta / 2.0).sin_cos();
                psi = crate::qmat::kron_vec(&psi, &[C64::new(c, 0.0), C64::new(s, 0.0)]);
            }
            psi
        }
    }
}

pub fn embed(x: &[f64], kind: Embedding, n_qubits: usize) -> Result<DensityMatrix, QmlError> {
    Ok(DensityMatrix::from_pure(&embed_state(x, kind, n_qubits)?)?)
}

/// One gate of the flattened circuit. `param` is set for rotations.
#[derive(Debug, Clone)]
struct Gate {
    matrix: CMatrix,
    param: Option<usize>,
    axis: Axis,
    qubit: usize,
}

#[derive(Debug, Clone, Copy)]
enum Axis {
    Y,
    Z,
    Fixed,
}

fn rotation(axis: Axis, theta: f64) -> CMatrix {
    match axis {
        Axis::Y => gates::ry(theta),
        Axis::Z => gates::rz(theta),
        Axis::Fixed => unreachable!("fixed gates carry no parameter"),
    }
}

/// Gate list of the ansatz in application order. Each layer applies
/// `Rot(a, b, c) = Rz(c) Ry(b) Rz(a)` to every qubit, then a ring of CNOTs
/// `i → (i + 1) mod n` (omitted for one qubit).
fn circuit(params: &[f64], n: usize, layers: usize) -> Vec<Gate> {
    let mut out = Vec::with_capacity(layers * n * 4);
    for l in 0..layers {
        for q in 0..n {
            for (k, axis) in [Axis::Z, Axis::Y, Axis::Z].into_iter().enumerate() {
                let idx = (l * n + q) * 3 + k;
                out.push(Gate { matrix: gates::on_qubit(&rotation(axis, params[idx]), q, n), param: Some(idx), axis, qubit: q });
            }
        }
        if n > 1 {
            for q in 0..n {
                out.push(Gate { matrix: gates::cnot(q, (q + 1) % n, n), param: None, axis: Axis::Fixed, qubit: q });
            }
        }
    }
    out
}

/// Ansatz unitary for `params` laid out as `[layers][n_qubits][3]`.
pub fn ansatz_unitary(params: &[f64], n_qubits: usize, layers: usize) -> Result<CMatrix, QmlError> {
    let expected = layers * n_qubits * 3;
    if params.len() != expected {
        return Err(QmlError::Shape { expected, got: params.len() });
    }
    Ok(circuit(params, n_qubits, layers)
        .iter()
        .fold(CMatrix::identity(1 << n_qubits), |u, g| g.matrix.matmul(&u)))
}

/// Noise channel attached before or after the classifier unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    pub choi: ChoiMatrix,
    pub order: Order,
}

/// Effects `F_k` with `y_k = Tr[F_k ρ]` for the pipeline `U` (plus noise).
pub fn effective_effects(u: &CMatrix, povm: &PovmSet, noise: Option<&NoiseModel>) -> Vec<CMatrix> {
    let udag = u.dagger();
    povm.elements()
        .iter()
        .map(|p| match noise {
            None => p.conjugate_by(&udag),
            Some(NoiseModel { choi, order: Order::Pre }) => choi.effect_marginal(&p.conjugate_by(&udag)).transpose(),
            Some(NoiseModel { choi, order: Order::Post }) => choi.effect_marginal(p).transpose().conjugate_by(&udag),
        })
        .collect()
}

fn probabilities(effects: &[CMatrix], psi: &[C64]) -> Vec<f64> {
    effects.iter().map(|f| f.expectation(psi).re).collect()
}

/// Predicted class; near-ties go to class 0.
pub fn predict(y: &[f64]) -> usize {
    if y.len() == 2 && (y[0] - y[1]).abs() <= TIE_TOL {
        return 0;
    }
    y.iter().enumerate().fold(0, |best, (k, &v)| if v > y[best] { k } else { best })
}

pub fn is_tie(y: &[f64]) -> bool {
    y.len() == 2 && (y[0] - y[1]).abs() <= TIE_TOL
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classifier {
    n_qubits: usize,
    layers: usize,
    params: Vec<f64>,
    embedding: Embedding,
    measured_qubit: usize,
    povm: PovmSet,
}

impl Classifier {
    pub fn new(
        n_qubits: usize,
        layers: usize,
        embedding: Embedding,
        measured_qubit: usize,
        params: Vec<f64>,
    ) -> Result<Self, QmlError> {
        if n_qubits == 0 || measured_qubit >= n_qubits {
            return Err(QmlError::InvalidConfig("measured qubit outside register"));
        }
        let expected = layers * n_qubits * 3;
        if params.len() != expected {
            return Err(QmlError::Shape { expected, got: params.len() });
        }
        let povm = PovmSet::binary_qubit(n_qubits, measured_qubit);
        Ok(Self { n_qubits, layers, params, embedding, measured_qubit, povm })
    }

    /// Parameters drawn uniformly from `[0, 2π)`.
    pub fn random(n_qubits: usize, layers: usize, embedding: Embedding, measured_qubit: usize, seed: u64) -> Result<Self, QmlError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = (0..layers * n_qubits * 3).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
        Self::new(n_qubits, layers, embedding, measured_qubit, params)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn set_params(&mut self, params: Vec<f64>) -> Result<(), QmlError> {
        if params.len() != self.params.len() {
            return Err(QmlError::Shape { expected: self.params.len(), got: params.len() });
        }
        self.params = params;
        Ok(())
    }

    pub fn embedding(&self) -> Embedding {
        self.embedding
    }

    pub fn measured_qubit(&self) -> usize {
        self.measured_qubit
    }

    pub fn povm(&self) -> &PovmSet {
        &self.povm
    }

    pub fn unitary(&self) -> CMatrix {
        ansatz_unitary(&self.params, self.n_qubits, self.layers).expect("shape checked on construction")
    }

    pub fn embed(&self, x: &[f64]) -> Result<DensityMatrix, QmlError> {
        embed(x, self.embedding, self.n_qubits)
    }

    /// Effects of the deployed pipeline, reusable across inputs.
    pub fn pipeline(&self, noise: Option<&NoiseModel>) -> Result<Pipeline, QmlError> {
        if let Some(n) = noise {
            if n.choi.dim() != self.dim() {
                return Err(QmlError::NoiseDimension { expected: self.dim(), got: n.choi.dim() });
            }
        }
        Ok(Pipeline {
            effects: effective_effects(&self.unitary(), &self.povm, noise),
            embedding: self.embedding,
            n_qubits: self.n_qubits,
        })
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, QmlError> {
        self.pipeline(None)?.forward(x)
    }

    pub fn forward_noisy(&self, x: &[f64], noise: &NoiseModel) -> Result<Vec<f64>, QmlError> {
        self.pipeline(Some(noise))?.forward(x)
    }
}

/// Precomputed effects of `classifier (+ noise)`.
#[derive(Debug, Clone)]
pub struct Pipeline {
    effects: Vec<CMatrix>,
    embedding: Embedding,
    n_qubits: usize,
}

impl Pipeline {
    pub fn effects(&self) -> &[CMatrix] {
        &self.effects
    }

    /// Outcome probabilities for a valid input.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, QmlError> {
        Ok(probabilities(&self.effects, &embed_state(x, self.embedding, self.n_qubits)?))
    }

    /// Outcome probabilities for a possibly perturbed input: amplitude
    /// inputs are renormalized, angle inputs are used as given.
    pub fn forward_perturbed(&self, x: &[f64]) -> Vec<f64> {
        probabilities(&self.effects, &raw_state(x, self.embedding, self.n_qubits))
    }

    /// `−ln y_label` on a perturbed input.
    pub fn loss(&self, x: &[f64], label: usize) -> f64 {
        -self.forward_perturbed(x)[label].max(PROB_FLOOR).ln()
    }

    /// Central finite-difference gradient of [`Pipeline::loss`] in `x`.
    pub fn input_gradient(&self, x: &[f64], label: usize, step: f64) -> Vec<f64> {
        let mut probe = x.to_vec();
        (0..x.len())
            .map(|i| {
                probe[i] = x[i] + step;
                let up = self.loss(&probe, label);
                probe[i] = x[i] - step;
                let down = self.loss(&probe, label);
                probe[i] = x[i];
                (up - down) / (2.0 * step)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub class_weighted: bool,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), QmlError> {
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(QmlError::InvalidConfig("batch size and epochs must be positive"));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(QmlError::InvalidConfig("learning rate must be finite and non-negative"));
        }
        Ok(())
    }
}

/// Trained model and the mean training loss before training and after each
/// epoch.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub classifier: Classifier,
    pub loss_curve: Vec<f64>,
}

fn check_labels(ys: &[usize]) -> Result<(), QmlError> {
    match ys.iter().find(|&&y| y > 1) {
        Some(&y) => Err(QmlError::Label(y)),
        None => Ok(()),
    }
}

/// Mean (optionally class-weighted) cross-entropy `−ln y_c` over a dataset.
pub fn dataset_loss(c: &Classifier, xs: &[Vec<f64>], ys: &[usize], weights: &[f64]) -> Result<f64, QmlError> {
    let pipe = c.pipeline(None)?;
    let mut total = 0.0;
    for ((x, &y), w) in xs.iter().zip(ys).zip(weights) {
        total += w * -pipe.forward(x)?[y].max(PROB_FLOOR).ln();
    }
    Ok(total / xs.len() as f64)
}

/// Exact gradient of the batch loss by the parameter-shift rule.
///
/// Every parameter enters through one Pauli rotation, so
/// `∂y/∂θ = (y(θ + π/2) − y(θ − π/2)) / 2`.
pub fn loss_gradient(c: &Classifier, states: &[Vec<C64>], ys: &[usize], weights: &[f64]) -> Vec<f64> {
    let gates = circuit(&c.params, c.n_qubits, c.layers);
    let d = c.dim();
    let m = gates.len();
    // prefix[i] = g_{i-1} ⋯ g_0, suffix[i] = g_{m-1} ⋯ g_{i+1}
    let mut prefix = Vec::with_capacity(m + 1);
    prefix.push(CMatrix::identity(d));
    for g in &gates {
        let next = g.matrix.matmul(prefix.last().unwrap());
        prefix.push(next);
    }
    let mut suffix = alloc::vec![CMatrix::identity(d); m];
    for i in (0..m.saturating_sub(1)).rev() {
        suffix[i] = suffix[i + 1].matmul(&gates[i + 1].matrix);
    }
    let u = &prefix[m];
    let effects: Vec<CMatrix> = c.povm.elements().iter().map(|p| p.conjugate_by(&u.dagger())).collect();
    let coeffs: Vec<f64> = states
        .iter()
        .zip(ys)
        .zip(weights)
        .map(|((psi, &y), w)| {
            let p = effects[y].expectation(psi).re;
            if p > PROB_FLOOR {
                -w / p
            } else {
                0.0
            }
        })
        .collect();
    let scale = 1.0 / states.len() as f64;
    let mut grad = alloc::vec![0.0; c.params.len()];
    for (i, g) in gates.iter().enumerate() {
        let Some(idx) = g.param else { continue };
        let mut dy_total = 0.0;
        let mut shifted = [CMatrix::zeros(0, 0), CMatrix::zeros(0, 0)];
        for (slot, s) in [FRAC_PI_2, -FRAC_PI_2].into_iter().enumerate() {
            let shift = gates::on_qubit(&rotation(g.axis, s), g.qubit, c.n_qubits);
            let u_s = suffix[i].matmul(&g.matrix).matmul(&shift).matmul(&prefix[i]);
            shifted[slot] = u_s;
        }
        for ((psi, &y), coeff) in states.iter().zip(ys).zip(&coeffs) {
            if *coeff == 0.0 {
                continue;
            }
            let prob = |u_s: &CMatrix| c.povm.elements()[y].expectation(&u_s.matvec(psi)).re;
            dy_total += coeff * 0.5 * (prob(&shifted[0]) - prob(&shifted[1]));
        }
        grad[idx] = dy_total * scale;
    }
    grad
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
    lr: f64,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize, lr: f64) -> Self {
        Self { m: alloc::vec![0.0; n], v: alloc::vec![0.0; n], t: 0, lr }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        for ((p, g), (m, v)) in params.iter_mut().zip(grad).zip(self.m.iter_mut().zip(self.v.iter_mut())) {
            *m = Self::BETA1 * *m + (1.0 - Self::BETA1) * g;
            *v = Self::BETA2 * *v + (1.0 - Self::BETA2) * g * g;
            *p -= self.lr * (*m / c1) / ((*v / c2).sqrt() + Self::EPS);
        }
    }
}

/// Trains with Adam on the (optionally class-weighted) cross-entropy. Batches
/// come from a seeded shuffle each epoch.
pub fn train(c: &Classifier, xs: &[Vec<f64>], ys: &[usize], cfg: &TrainConfig) -> Result<TrainOutcome, QmlError> {
    cfg.validate()?;
    check_labels(ys)?;
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(QmlError::InvalidConfig("training data must be non-empty with one label per row"));
    }
    let states = xs
        .iter()
        .map(|x| embed_state(x, c.embedding, c.n_qubits))
        .collect::<Result<Vec<_>, _>>()?;
    let weights = if cfg.class_weighted { class_weights(ys) } else { alloc::vec![1.0; ys.len()] };
    let mut model = c.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = Adam::new(model.params.len(), cfg.learning_rate);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut curve = alloc::vec![dataset_loss(&model, xs, ys, &weights)?];
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let bs: Vec<Vec<C64>> = batch.iter().map(|&i| states[i].clone()).collect();
            let by: Vec<usize> = batch.iter().map(|&i| ys[i]).collect();
            let bw: Vec<f64> = batch.iter().map(|&i| weights[i]).collect();
            let grad = loss_gradient(&model, &bs, &by, &bw);
            adam.step(&mut model.params, &grad);
        }
        let loss = dataset_loss(&model, xs, ys, &weights)?;
        if !loss.is_finite() {
            return Err(QmlError::Divergence { epoch });
        }
        curve.push(loss);
    }
    Ok(TrainOutcome { classifier: model, loss_curve: curve })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackConfig {
    /// L∞ budget.
    pub budget: f64,
    /// Central finite-difference step for the input gradient.
    pub gradient_step: f64,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self { budget: 0.0, gradient_step: FD_STEP }
    }
}

/// Sign of the loss gradient, with components at most `GRAD_ZERO_TOL` in
/// magnitude set to zero.
pub fn attack_direction(pipe: &Pipeline, x: &[f64], label: usize, step: f64) -> Vec<f64> {
    pipe.input_gradient(x, label, step)
        .into_iter()
        .map(|g| if g.abs() <= GRAD_ZERO_TOL { 0.0 } else { g.signum() })
        .collect()
}

fn apply_step(x: &[f64], direction: &[f64], budget: f64, embedding: Embedding) -> Vec<f64> {
    x.iter()
        .zip(direction)
        .map(|(v, s)| {
            let moved = v + budget * s;
            match embedding {
                Embedding::Angle => moved.clamp(0.0, PI),
                Embedding::Amplitude => moved,
            }
        })
        .collect()
}

/// One FGSM step `x' = x + ε·sign(∇ₓ loss)` against `pipe`. Angle inputs are
/// clipped to `[0, π]`; amplitude inputs are left unnormalized and
/// renormalized by [`Pipeline::forward_perturbed`].
pub fn fgsm(pipe: &Pipeline, x: &[f64], label: usize, cfg: &AttackConfig) -> Result<Vec<f64>, QmlError> {
    if !(cfg.budget >= 0.0) {
        return Err(QmlError::InvalidConfig("attack budget must be non-negative"));
    }
    if cfg.budget == 0.0 {
        return Ok(x.to_vec());
    }
    let dir = attack_direction(pipe, x, label, cfg.gradient_step);
    Ok(apply_step(x, &dir, cfg.budget, pipe.embedding))
}

/// Which pipeline supplies the FGSM gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackTarget {
    /// The classifier with its noise channel attached.
    Deployed,
    /// The noiseless classifier.
    Clean,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyPoint {
    pub budget: f64,
    pub accuracy: f64,
    /// Fraction of samples whose two outcome probabilities tie.
    pub tie_rate: f64,
}

/// Accuracy of the (noisy) classifier on FGSM examples at each budget.
pub fn adversarial_accuracy(
    c: &Classifier,
    noise: Option<&NoiseModel>,
    xs: &[Vec<f64>],
    ys: &[usize],
    budgets: &[f64],
    target: AttackTarget,
    gradient_step: f64,
) -> Result<Vec<AccuracyPoint>, QmlError> {
    check_labels(ys)?;
    if budgets.iter().any(|b| !(*b >= 0.0)) {
        return Err(QmlError::InvalidConfig("attack budget must be non-negative"));
    }
    let deployed = c.pipeline(noise)?;
    let attacked = match target {
        AttackTarget::Deployed => deployed.clone(),
        AttackTarget::Clean => c.pipeline(None)?,
    };
    let mut correct = alloc::vec![0usize; budgets.len()];
    let mut ties = alloc::vec![0usize; budgets.len()];
    for (x, &y) in xs.iter().zip(ys) {
        embed_state(x, c.embedding, c.n_qubits)?;
        let dir = attack_direction(&attacked, x, y, gradient_step);
        for (b, &budget) in budgets.iter().enumerate() {
            let xa = apply_step(x, &dir, budget, c.embedding);
            let probs = deployed.forward_perturbed(&xa);
            if predict(&probs) == y {
                correct[b] += 1;
            }
            if is_tie(&probs) {
                ties[b] += 1;
            }
        }
    }
    let n = xs.len().max(1) as f64;
    Ok(budgets
        .iter()
        .zip(correct.iter().zip(&ties))
        .map(|(&budget, (&ok, &tie))| AccuracyPoint { budget, accuracy: ok as f64 / n, tie_rate: tie as f64 / n })
        .collect())
}
