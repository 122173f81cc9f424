//! Cleaning, labeling, correlation-based feature selection, z-score scaling and
//! the train/test split.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::rng::Xoshiro256StarStar;

pub const DEFAULT_CORRELATION_THRESHOLD: f64 = 0.02;
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.8;

/// Feature matrix with binary labels (`1` = attack).
#[derive(Debug, Clone, PartialEq)]
pub struct FlowDataset {
    features: Matrix,
    labels: Vec<u8>,
    feature_names: Vec<String>,
    pub source: String,
}

impl FlowDataset {
    pub fn new(
        features: Matrix,
        labels: Vec<u8>,
        feature_names: Vec<String>,
        source: impl Into<String>,
    ) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::shape(
                "FlowDataset",
                format!("{} rows but {} labels", features.rows(), labels.len()),
            ));
        }
        if features.cols() != feature_names.len() {
            return Err(Error::shape(
                "FlowDataset",
                format!("{} columns but {} names", features.cols(), feature_names.len()),
            ));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = feature_names.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(Error::Schema(format!("duplicate feature name '{dup}'")));
        }
        if let Some(i) = labels.iter().position(|&l| l > 1) {
            return Err(Error::Validation(format!(
                "label {} in row {i} is not 0/1",
                labels[i]
            )));
        }
        Ok(Self {
            features,
            labels,
            feature_names,
            source: source.into(),
        })
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// `(benign, attack)` counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let attack = self.labels.iter().filter(|&&l| l == 1).count();
        (self.labels.len() - attack, attack)
    }

    pub fn subset_rows(&self, indices: &[usize]) -> FlowDataset {
        FlowDataset {
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
            source: self.source.clone(),
        }
    }

    pub fn subset_cols(&self, indices: &[usize]) -> FlowDataset {
        FlowDataset {
            features: self.features.select_cols(indices),
            labels: self.labels.clone(),
            feature_names: indices.iter().map(|&j| self.feature_names[j].clone()).collect(),
            source: self.source.clone(),
        }
    }

    /// Same rows and labels, new feature values (e.g. after scaling).
    pub fn with_features(&self, features: Matrix) -> Result<FlowDataset> {
        FlowDataset::new(
            features,
            self.labels.clone(),
            self.feature_names.clone(),
            self.source.clone(),
        )
    }
}

/// Parsed records before cleaning: any cell may be missing.
#[derive(Debug, Clone, PartialEq)]
pub struct RawFlows {
    pub feature_names: Vec<String>,
    /// Row-major, `labels.len() × feature_names.len()`.
    pub cells: Vec<Option<f64>>,
    pub labels: Vec<u8>,
    pub source: String,
}

impl RawFlows {
    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn row(&self, i: usize) -> &[Option<f64>] {
        let n = self.feature_names.len();
        &self.cells[i * n..(i + 1) * n]
    }
}

/// Drops rows with any missing or non-finite cell, then collapses exact
/// duplicates (bitwise-equal features and equal label) to their first
/// occurrence. Row order is otherwise preserved.
pub fn clean(raw: &RawFlows) -> Result<FlowDataset> {
    let n = raw.feature_names.len();
    if raw.cells.len() != raw.n_rows() * n {
        return Err(Error::shape(
            "clean",
            format!(
                "{} cells for {} rows of {} features",
                raw.cells.len(),
                raw.n_rows(),
                n
            ),
        ));
    }
    let mut seen: HashSet<(Vec<u64>, u8)> = HashSet::new();
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for i in 0..raw.n_rows() {
        let row = raw.row(i);
        let values: Option<Vec<f64>> = row.iter().map(|c| c.filter(|v| v.is_finite())).collect();
        let Some(values) = values else { continue };
        let key = (values.iter().map(|v| v.to_bits()).collect(), raw.labels[i]);
        if !seen.insert(key) {
            continue;
        }
        data.extend_from_slice(&values);
        labels.push(raw.labels[i]);
    }
    if labels.is_empty() {
        return Err(Error::EmptyDataset("cleaning"));
    }
    let features = Matrix::new(labels.len(), n, data)?;
    FlowDataset::new(features, labels, raw.feature_names.clone(), raw.source.clone())
}

/// `0` for the benign category (case-insensitive, surrounding whitespace
/// ignored), `1` for anything else.
pub fn binarize_labels<S: AsRef<str>>(categories: &[S], benign_value: &str) -> Result<Vec<u8>> {
    let benign = benign_value.trim();
    categories
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let c = c.as_ref().trim();
            if c.is_empty() {
                Err(Error::Validation(format!("empty category label in row {i}")))
            } else {
                Ok(u8::from(!c.eq_ignore_ascii_case(benign)))
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSelection {
    /// Sorted, unique.
    pub kept_indices: Vec<usize>,
    /// One Pearson coefficient per original column; `0.0` for constant columns.
    pub correlations: Vec<f64>,
    pub threshold: f64,
}

impl FeatureSelection {
    pub fn apply(&self, data: &FlowDataset) -> Result<FlowDataset> {
        self.check_width(data.n_features())?;
        Ok(data.subset_cols(&self.kept_indices))
    }

    pub fn apply_matrix(&self, features: &Matrix) -> Result<Matrix> {
        self.check_width(features.cols())?;
        Ok(features.select_cols(&self.kept_indices))
    }

    fn check_width(&self, cols: usize) -> Result<()> {
        if cols != self.correlations.len() {
            return Err(Error::shape(
                "feature selection",
                format!("fitted on {} columns, applied to {cols}", self.correlations.len()),
            ));
        }
        Ok(())
    }
}

/// Point-biserial (Pearson) correlation of one column with the labels.
fn label_correlation(column: &[f64], labels: &[f64]) -> f64 {
    let first = column[0];
    if column.iter().all(|&v| v == first) {
        return 0.0;
    }
    let n = column.len() as f64;
    let mx = column.iter().sum::<f64>() / n;
    let my = labels.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in column.iter().zip(labels) {
        let dx = x - mx;
        let dy = y - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)
}

/// Keeps every non-constant column whose |Pearson r| with the label is at
/// least `threshold`.
pub fn select_features(data: &FlowDataset, threshold: f64) -> Result<FeatureSelection> {
    if !(threshold >= 0.0 && threshold.is_finite()) {
        return Err(Error::Validation(format!(
            "correlation threshold must be finite and >= 0, got {threshold}"
        )));
    }
    if data.n_rows() < 2 {
        return Err(Error::Validation(format!(
            "feature selection needs at least 2 rows, got {}",
            data.n_rows()
        )));
    }
    let labels: Vec<f64> = data.labels().iter().map(|&l| f64::from(l)).collect();
    let features = data.features();
    let correlations: Vec<f64> = (0..data.n_features())
        .into_par_iter()
        .map(|j| label_correlation(&features.col_values(j), &labels))
        .collect();
    let kept_indices: Vec<usize> = correlations
        .iter()
        .enumerate()
        .filter(|(_, &r)| r != 0.0 && r.abs() >= threshold)
        .map(|(j, _)| j)
        .collect();
    if kept_indices.is_empty() {
        return Err(Error::EmptySelection { threshold });
    }
    Ok(FeatureSelection {
        kept_indices,
        correlations,
        threshold,
    })
}

/// Per-column mean and population standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalerState {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl ScalerState {
    pub fn new(means: Vec<f64>, stds: Vec<f64>) -> Result<Self> {
        if means.len() != stds.len() {
            return Err(Error::Integrity(format!(
                "{} means but {} standard deviations",
                means.len(),
                stds.len()
            )));
        }
        if let Some(j) = stds.iter().position(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::Integrity(format!(
                "standard deviation of column {j} is {}, must be positive",
                stds[j]
            )));
        }
        if means.iter().any(|m| !m.is_finite()) {
            return Err(Error::Integrity("scaler means contain non-finite values".into()));
        }
        Ok(Self { means, stds })
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }
}

pub fn fit_scaler(train_features: &Matrix) -> Result<ScalerState> {
    let n = train_features.rows();
    if n < 2 {
        return Err(Error::Validation(format!(
            "scaler needs at least 2 rows, got {n}"
        )));
    }
    let nf = n as f64;
    let mut means = Vec::with_capacity(train_features.cols());
    let mut stds = Vec::with_capacity(train_features.cols());
    for j in 0..train_features.cols() {
        let col = train_features.col_values(j);
        if col.iter().all(|&v| v == col[0]) {
            return Err(Error::Validation(format!(
                "column {j} has zero variance and cannot be z-scored"
            )));
        }
        let rough = col.iter().sum::<f64>() / nf;
        let mean = rough + col.iter().map(|v| v - rough).sum::<f64>() / nf;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / nf;
        let std = var.sqrt();
        if std.is_nan() || std <= 0.0 {
            return Err(Error::Validation(format!(
                "column {j} has zero variance and cannot be z-scored"
            )));
        }
        means.push(mean);
        stds.push(std);
    }
    Ok(ScalerState { means, stds })
}

/// `(x − mean) / std` column-wise.
pub fn apply_scaler(state: &ScalerState, features: &Matrix) -> Result<Matrix> {
    if features.cols() != state.len() {
        return Err(Error::shape(
            "apply_scaler",
            format!("scaler has {} columns, data has {}", state.len(), features.cols()),
        ));
    }
    let mut out = features.clone();
    for i in 0..out.rows() {
        for ((v, m), s) in out.row_mut(i).iter_mut().zip(&state.means).zip(&state.stds) {
            *v = (*v - m) / s;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitMode {
    #[default]
    Stratified,
    Plain,
}

#[derive(Debug, Clone)]
pub struct SplitResult {
    pub train: FlowDataset,
    pub test: FlowDataset,
    /// Ascending row indices into the input.
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// Number of training rows for a group of `count`: `⌊count·fraction⌉` (half
/// up), clamped to `[1, count − 1]` so both sides are non-empty.
fn train_share(count: usize, fraction: f64) -> usize {
    let k = (count as f64 * fraction + 0.5).floor() as usize;
    k.clamp(1, count - 1)
}

/// Train/test index partition of `labels`.
pub fn split_indices(
    labels: &[u8],
    train_fraction: f64,
    seed: u64,
    mode: SplitMode,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Validation(format!(
            "train fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    match mode {
        SplitMode::Stratified => {
            for class in [0u8, 1] {
                let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
                if idx.len() < 2 {
                    return Err(Error::Stratification(format!(
                        "class {class} has {} sample(s); at least 2 are needed",
                        idx.len()
                    )));
                }
                rng.shuffle(&mut idx);
                let k = train_share(idx.len(), train_fraction);
                train.extend_from_slice(&idx[..k]);
                test.extend_from_slice(&idx[k..]);
            }
        }
        SplitMode::Plain => {
            let attack = labels.iter().filter(|&&l| l == 1).count();
            if attack == 0 || attack == labels.len() {
                return Err(Error::Stratification(
                    "data contains a single class; both benign and attack rows are needed".into(),
                ));
            }
            let mut idx: Vec<usize> = (0..labels.len()).collect();
            rng.shuffle(&mut idx);
            let k = train_share(idx.len(), train_fraction);
            train.extend_from_slice(&idx[..k]);
            test.extend_from_slice(&idx[k..]);
        }
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn split(data: &FlowDataset, train_fraction: f64, seed: u64) -> Result<SplitResult> {
    split_with_mode(data, train_fraction, seed, SplitMode::Stratified)
}

pub fn split_with_mode(
    data: &FlowDataset,
    train_fraction: f64,
    seed: u64,
    mode: SplitMode,
) -> Result<SplitResult> {
    let (train_indices, test_indices) = split_indices(data.labels(), train_fraction, seed, mode)?;
    Ok(SplitResult {
        train: data.subset_rows(&train_indices),
        test: data.subset_rows(&test_indices),
        train_indices,
        test_indices,
    })
}
