//! Dataset preprocessing. Parsing lives in the companion crate; this module
//! takes parsed records and is pure and deterministic given a seed.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

// only needed when std is absent from the build
#[allow(unused_imports)]
use num_traits::Float;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::qmat::{eig_hermitian, CMatrix, QmatError, C64};
use crate::qml::Embedding;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DataError {
    #[error("expected {expected} rows, found {got}")]
    RowCount { expected: usize, got: usize },
    #[error("majority class has {available} rows, cannot remove {requested}")]
    InsufficientRows { available: usize, requested: usize },
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("row {row} has {got} features, expected {expected}")]
    Ragged { row: usize, expected: usize, got: usize },
    #[error("feature {0} is constant and cannot be rescaled")]
    ConstantFeature(usize),
    #[error(transparent)]
    Matrix(#[from] QmatError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    /// Preprocessing steps in the order applied.
    pub log: Vec<String>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    fn select(&self, idx: &[usize]) -> (Vec<Vec<f64>>, Vec<usize>) {
        (idx.iter().map(|&i| self.features[i].clone()).collect(), idx.iter().map(|&i| self.labels[i]).collect())
    }

    pub fn train_set(&self) -> (Vec<Vec<f64>>, Vec<usize>) {
        self.select(&self.train)
    }

    pub fn test_set(&self) -> (Vec<Vec<f64>>, Vec<usize>) {
        self.select(&self.test)
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let mut c = [0; 2];
        for &l in &self.labels {
            c[l] += 1;
        }
        c
    }
}

pub fn l2_normalize_rows(rows: &mut [Vec<f64>]) {
    for r in rows {
        let n = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 0.0 {
            for v in r.iter_mut() {
                *v /= n;
            }
        }
    }
}

/// Rescales every column linearly so its minimum maps to `lo` and its
/// maximum to `hi`.
pub fn minmax_columns(rows: &mut [Vec<f64>], lo: f64, hi: f64) -> Result<(), DataError> {
    let dim = rows.first().map_or(0, Vec::len);
    for j in 0..dim {
        let (min, max) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r[j]), b.max(r[j])));
        if max - min <= 0.0 {
            return Err(DataError::ConstantFeature(j));
        }
        for r in rows.iter_mut() {
            r[j] = lo + (hi - lo) * (r[j] - min) / (max - min);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// Principal axes, largest variance first. Each axis is oriented so its
    /// largest-magnitude loading is positive.
    pub components: Vec<Vec<f64>>,
    /// Variance along each axis (population covariance).
    pub variances: Vec<f64>,
}

impl Pca {
    pub fn fit(rows: &[Vec<f64>], k: usize) -> Result<Self, DataError> {
        let n = rows.len() as f64;
        let dim = rows.first().map_or(0, Vec::len);
        let mut mean = alloc::vec![0.0; dim];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v / n;
            }
        }
        let cov = CMatrix::from_fn(dim, dim, |a, b| {
            C64::new(rows.iter().map(|r| (r[a] - mean[a]) * (r[b] - mean[b])).sum::<f64>() / n, 0.0)
        });
        let eig = eig_hermitian(&cov)?;
        let mut components = Vec::with_capacity(k);
        let mut variances = Vec::with_capacity(k);
        for idx in (0..dim).rev().take(k) {
            let mut axis: Vec<f64> = eig.eigenvector(idx).iter().map(|z| z.re).collect();
            let lead = axis.iter().fold(0.0f64, |m, &v| if v.abs() > m.abs() { v } else { m });
            if lead < 0.0 {
                axis.iter_mut().for_each(|v| *v = -*v);
            }
            components.push(axis);
            variances.push(eig.eigenvalues[idx]);
        }
        Ok(Self { mean, components, variances })
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|axis| axis.iter().zip(row).zip(&self.mean).map(|((a, v), m)| a * (v - m)).sum())
            .collect()
    }

    pub fn reconstruct(&self, coords: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (axis, &c) in self.components.iter().zip(coords) {
            for (o, a) in out.iter_mut().zip(axis) {
                *o += c * a;
            }
        }
        out
    }
}

/// Seeded stratified split with `round(train_fraction · N)` training rows.
/// Per-class training quotas use largest remainders (ties to the lower
/// class); indices are returned sorted.
pub fn stratified_split(labels: &[usize], train_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let n = labels.len();
    let train_total = (train_fraction * n as f64).round() as usize;
    let classes: BTreeSet<usize> = labels.iter().copied().collect();
    let members: Vec<Vec<usize>> =
        classes.iter().map(|&c| (0..n).filter(|&i| labels[i] == c).collect()).collect();
    let exact: Vec<f64> = members.iter().map(|m| train_total as f64 * m.len() as f64 / n as f64).collect();
    let mut quota: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..members.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    let mut left = train_total - quota.iter().sum::<usize>();
    for &c in order.iter().cycle() {
        if left == 0 {
            break;
        }
        if quota[c] < members[c].len() {
            quota[c] += 1;
            left -= 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::with_capacity(train_total);
    let mut test = Vec::with_capacity(n - train_total);
    for (m, &q) in members.iter().zip(&quota) {
        let mut shuffled = m.clone();
        shuffled.shuffle(&mut rng);
        train.extend_from_slice(&shuffled[..q]);
        test.extend_from_slice(&shuffled[q..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

fn fmt_split(train: &[usize], test: &[usize]) -> String {
    format!("stratified split: {} train / {} test", train.len(), test.len())
}

pub const IRIS_TRAIN_FRACTION: f64 = 0.4;
pub const PID_MAJORITY_REMOVAL: usize = 232;
pub const PID_TRAIN_FRACTION: f64 = 0.7;
pub const BC_COMPONENTS: usize = 8;
pub const BC_TRAIN_FRACTION: f64 = 0.7;
/// Lower end of the BC rescaling interval, keeping every entry positive.
pub const BC_RESCALE_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct IrisRecord {
    /// sepal length, sepal width, petal length, petal width
    pub features: [f64; 4],
    pub species: String,
}

/// Setosa (label 0) against virginica (label 1) on three features (petal
/// width dropped). Rows are L2-normalized; the angle variant then maps each
/// feature to `[0, π]`.
pub fn prepare_iris(records: &[IrisRecord], seed: u64, embedding: Embedding) -> Result<Dataset, DataError> {
    if records.len() != 150 {
        return Err(DataError::RowCount { expected: 150, got: records.len() });
    }
    let mut log = alloc::vec![format!("loaded {} rows", records.len())];
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for r in records {
        let label = match r.species.trim().trim_start_matches("Iris-").to_ascii_lowercase().as_str() {
            "setosa" => 0,
            "virginica" => 1,
            "versicolor" => continue,
            _ => return Err(DataError::UnknownLabel(r.species.clone())),
        };
        features.push(r.features[..3].to_vec());
        labels.push(label);
    }
    log.push(format!("dropped versicolor and petal_width: {} rows x 3 features", features.len()));
    l2_normalize_rows(&mut features);
    log.push(String::from("L2-normalized rows"));
    if embedding == Embedding::Angle {
        minmax_columns(&mut features, 0.0, core::f64::consts::PI)?;
        log.push(String::from("min-max scaled features to [0, pi]"));
    }
    let (train, test) = stratified_split(&labels, IRIS_TRAIN_FRACTION, seed);
    log.push(fmt_split(&train, &test));
    Ok(Dataset { name: format!("iris-{}", embedding.as_str()), features, labels, train, test, log })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PidRecord {
    pub values: [Option<f64>; 8],
    pub outcome: Option<u8>,
}

/// Drops incomplete and duplicate rows, removes [`PID_MAJORITY_REMOVAL`]
/// seeded-random majority rows, L2-normalizes and splits.
pub fn prepare_pid(records: &[PidRecord], seed: u64) -> Result<Dataset, DataError> {
    let mut log = alloc::vec![format!("loaded {} rows", records.len())];
    let mut seen: BTreeSet<Vec<u64>> = BTreeSet::new();
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut incomplete = 0;
    for r in records {
        let (Some(outcome), true) = (r.outcome, r.values.iter().all(Option::is_some)) else {
            incomplete += 1;
            continue;
        };
        if outcome > 1 {
            return Err(DataError::UnknownLabel(format!("{outcome}")));
        }
        let row: Vec<f64> = r.values.iter().map(|v| v.unwrap()).collect();
        let mut key: Vec<u64> = row.iter().map(|v| v.to_bits()).collect();
        key.push(outcome as u64);
        if seen.insert(key) {
            features.push(row);
            labels.push(outcome as usize);
        }
    }
    log.push(format!(
        "dropped {incomplete} incomplete and {} duplicate rows: {} remain",
        records.len() - incomplete - features.len(),
        features.len()
    ));
    let counts = [labels.iter().filter(|&&l| l == 0).count(), labels.iter().filter(|&&l| l == 1).count()];
    let majority = if counts[0] >= counts[1] { 0 } else { 1 };
    if counts[majority] < PID_MAJORITY_REMOVAL {
        return Err(DataError::InsufficientRows { available: counts[majority], requested: PID_MAJORITY_REMOVAL });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == majority).collect();
    candidates.shuffle(&mut rng);
    let removed: BTreeSet<usize> = candidates[..PID_MAJORITY_REMOVAL].iter().copied().collect();
    let keep: Vec<usize> = (0..labels.len()).filter(|i| !removed.contains(i)).collect();
    let mut features: Vec<Vec<f64>> = keep.iter().map(|&i| features[i].clone()).collect();
    let labels: Vec<usize> = keep.iter().map(|&i| labels[i]).collect();
    log.push(format!("removed {PID_MAJORITY_REMOVAL} class-{majority} rows at random: {} remain", labels.len()));
    l2_normalize_rows(&mut features);
    log.push(String::from("L2-normalized rows"));
    let (train, test) = stratified_split(&labels, PID_TRAIN_FRACTION, seed.wrapping_add(1));
    log.push(fmt_split(&train, &test));
    Ok(Dataset { name: String::from("pid"), features, labels, train, test, log })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BcRecord {
    pub values: [Option<f64>; 9],
    /// 2 benign, 4 malignant.
    pub class: Option<u8>,
}

/// Drops incomplete rows, projects onto eight principal components,
/// rescales each component to `[BC_RESCALE_FLOOR, 1]`, L2-normalizes and
/// splits. Benign is label 0, malignant label 1.
pub fn prepare_bc(records: &[BcRecord], seed: u64) -> Result<Dataset, DataError> {
    let mut log = alloc::vec![format!("loaded {} rows", records.len())];
    let mut raw = Vec::new();
    let mut labels = Vec::new();
    for r in records {
        let (Some(class), true) = (r.class, r.values.iter().all(Option::is_some)) else { continue };
        labels.push(match class {
            2 => 0,
            4 => 1,
            other => return Err(DataError::UnknownLabel(format!("{other}"))),
        });
        raw.push(r.values.iter().map(|v| v.unwrap()).collect::<Vec<f64>>());
    }
    log.push(format!("dropped rows with missing values: {} remain", raw.len()));
    let pca = Pca::fit(&raw, BC_COMPONENTS)?;
    let mut features: Vec<Vec<f64>> = raw.iter().map(|r| pca.transform(r)).collect();
    log.push(format!("PCA to {BC_COMPONENTS} components"));
    minmax_columns(&mut features, BC_RESCALE_FLOOR, 1.0)?;
    log.push(format!("rescaled components to [{BC_RESCALE_FLOOR}, 1]"));
    l2_normalize_rows(&mut features);
    log.push(String::from("L2-normalized rows"));
    let (train, test) = stratified_split(&labels, BC_TRAIN_FRACTION, seed);
    log.push(fmt_split(&train, &test));
    Ok(Dataset { name: String::from("bc"), features, labels, train, test, log })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn split_counts_and_disjointness() {
        let labels: Vec<usize> = (0..536).map(|i| i % 2).collect();
        let (train, test) = stratified_split(&labels, PID_TRAIN_FRACTION, 3);
        assert_eq!((train.len(), test.len()), (375, 161));
        let all: BTreeSet<usize> = train.iter().chain(&test).copied().collect();
        assert_eq!(all.len(), 536);
        let ones = train.iter().filter(|&&i| labels[i] == 1).count();
        assert!(ones == 187 || ones == 188);
    }

    #[test]
    fn split_is_seeded() {
        let labels: Vec<usize> = (0..100).map(|i| usize::from(i >= 50)).collect();
        assert_eq!(stratified_split(&labels, 0.4, 1), stratified_split(&labels, 0.4, 1));
        assert_ne!(stratified_split(&labels, 0.4, 1), stratified_split(&labels, 0.4, 2));
        let (train, _) = stratified_split(&labels, 0.4, 1);
        assert_eq!(train.iter().filter(|&&i| labels[i] == 0).count(), 20);
    }

    #[test]
    fn minmax_examples() {
        let mut rows = vec![vec![1.0, 5.0], vec![3.0, 5.0]];
        assert_eq!(minmax_columns(&mut rows, 0.0, 1.0), Err(DataError::ConstantFeature(1)));
        let mut rows = vec![vec![1.0], vec![3.0], vec![2.0]];
        minmax_columns(&mut rows, 0.5, 1.0).unwrap();
        assert_eq!(rows, vec![vec![0.5], vec![1.0], vec![0.75]]);
    }

    #[test]
    fn pca_recovers_dominant_axis() {
        let rows: Vec<Vec<f64>> = (0..50).map(|i| {
            let t = i as f64 - 25.0;
            vec![2.0 * t, -t + 0.01 * (i % 3) as f64]
        }).collect();
        let pca = Pca::fit(&rows, 1).unwrap();
        let axis = &pca.components[0];
        assert!(axis[0] > 0.0);
        assert!((axis[0] - 2.0 / 5f64.sqrt()).abs() < 1e-3);
    }
}
