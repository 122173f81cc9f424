//! Hyperparameter search over hidden width, activation and RBF width, scored
//! by stratified k-fold cross-validation.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::elm::{fit, ActivationKind, ElmModel, ElmParams, DEFAULT_RBF_GAMMA, DEFAULT_THRESHOLD};
use crate::error::{Error, Result};
use crate::metrics::{accuracy, confusion, prf1};
use crate::preprocess::{
    apply_scaler, fit_scaler, select_features, FeatureSelection, FlowDataset, ScalerState,
};
use crate::rng::{mix_seed, Xoshiro256StarStar};

pub const DEFAULT_FOLDS: usize = 5;
pub const DEFAULT_HIDDEN_GRID: [usize; 7] = [16, 32, 64, 128, 256, 512, 1024];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectionMetric {
    #[default]
    F1,
    Accuracy,
}

impl SelectionMetric {
    pub fn name(self) -> &'static str {
        match self {
            Self::F1 => "f1",
            Self::Accuracy => "accuracy",
        }
    }
}

impl fmt::Display for SelectionMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SelectionMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "f1" => Ok(Self::F1),
            "accuracy" => Ok(Self::Accuracy),
            other => Err(Error::Validation(format!(
                "unknown metric '{other}' (expected f1 or accuracy)"
            ))),
        }
    }
}

/// One `(train, validation)` index pair per fold, both ascending.
pub type Fold = (Vec<usize>, Vec<usize>);

/// Stratified folds: each class is shuffled and dealt round-robin, so fold `k`
/// receives the class members at shuffled positions `k, k + folds, ...`.
pub fn kfold_indices(labels: &[u8], folds: usize, seed: u64) -> Result<Vec<Fold>> {
    if folds < 2 {
        return Err(Error::Validation(format!("folds must be >= 2, got {folds}")));
    }
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let mut assignment = vec![0usize; labels.len()];
    for class in [0u8, 1] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.len() < folds {
            return Err(Error::Stratification(format!(
                "class {class} has {} sample(s), fewer than {folds} folds",
                idx.len()
            )));
        }
        rng.shuffle(&mut idx);
        for (pos, &i) in idx.iter().enumerate() {
            assignment[i] = pos % folds;
        }
    }
    Ok((0..folds)
        .map(|k| {
            let (valid, train): (Vec<usize>, Vec<usize>) =
                (0..labels.len()).partition(|&i| assignment[i] == k);
            (train, valid)
        })
        .collect())
}

/// Seed for the ELM trained on fold `fold` with hyperparameters `params`.
///
/// Depends only on the base seed, the fold and the hyperparameter values, so
/// results are identical however configurations are scheduled.
pub fn fold_seed(base_seed: u64, fold: usize, params: &ElmParams) -> u64 {
    let gamma_bits = if params.activation == ActivationKind::Rbf {
        params.rbf_gamma.to_bits()
    } else {
        0
    };
    mix_seed(&[
        base_seed,
        fold as u64,
        params.hidden_nodes as u64,
        params.activation.code(),
        gamma_bits,
    ])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvOptions {
    pub folds: usize,
    pub seed: u64,
    pub metric: SelectionMetric,
    /// When set, feature selection is refitted inside every fold on that
    /// fold's training rows (leak-free mode) with this threshold.
    pub per_fold_selection: Option<f64>,
}

impl CvOptions {
    pub fn new(folds: usize, seed: u64, metric: SelectionMetric) -> Self {
        Self {
            folds,
            seed,
            metric,
            per_fold_selection: None,
        }
    }
}

/// Everything fitted inside one fold, exposed so leakage can be audited.
#[derive(Debug, Clone)]
pub struct FoldFit {
    pub selection: Option<FeatureSelection>,
    pub scaler: ScalerState,
    pub model: ElmModel,
    /// Validation rows after selection and scaling.
    pub valid: FlowDataset,
}

/// Fits selection (leak-free mode only), scaler and ELM on the fold's
/// training rows; validation rows are only transformed.
pub fn fit_fold(
    data: &FlowDataset,
    fold: usize,
    (train_idx, valid_idx): &Fold,
    params: &ElmParams,
    opts: &CvOptions,
) -> Result<FoldFit> {
    let mut train = data.subset_rows(train_idx);
    let mut valid = data.subset_rows(valid_idx);
    let mut selection = None;
    if let Some(threshold) = opts.per_fold_selection {
        let sel = select_features(&train, threshold)?;
        train = sel.apply(&train)?;
        valid = sel.apply(&valid)?;
        selection = Some(sel);
    }
    let scaler = fit_scaler(train.features())?;
    let x_train = apply_scaler(&scaler, train.features())?;
    let x_valid = apply_scaler(&scaler, valid.features())?;
    let fold_params = ElmParams {
        seed: fold_seed(opts.seed, fold, params),
        ..*params
    };
    let model = fit(&x_train, train.labels(), &fold_params)?;
    Ok(FoldFit {
        selection,
        scaler,
        model,
        valid: valid.with_features(x_valid)?,
    })
}

fn fold_metric(
    data: &FlowDataset,
    fold: usize,
    indices: &Fold,
    params: &ElmParams,
    opts: &CvOptions,
) -> Result<f64> {
    let fitted = fit_fold(data, fold, indices, params, opts)?;
    let predictions = fitted.model.predict(fitted.valid.features(), DEFAULT_THRESHOLD)?;
    let cm = confusion(fitted.valid.labels(), &predictions)?;
    match opts.metric {
        SelectionMetric::F1 => Ok(prf1(&cm).f1),
        SelectionMetric::Accuracy => accuracy(&cm),
    }
}

/// Per-fold metric values for one configuration. The scaler is fitted on each
/// fold's training rows only.
pub fn cross_validate(
    data: &FlowDataset,
    params: &ElmParams,
    folds: usize,
    seed: u64,
    metric: SelectionMetric,
) -> Result<Vec<f64>> {
    cross_validate_with(data, params, &CvOptions::new(folds, seed, metric))
}

pub fn cross_validate_with(data: &FlowDataset, params: &ElmParams, opts: &CvOptions) -> Result<Vec<f64>> {
    params.validate()?;
    let folds = kfold_indices(data.labels(), opts.folds, opts.seed)?;
    folds
        .iter()
        .enumerate()
        .map(|(k, fold)| fold_metric(data, k, fold, params, opts))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub hidden_node_candidates: Vec<usize>,
    pub activation_candidates: Vec<ActivationKind>,
    /// Crossed with `Rbf` only.
    pub rbf_gamma_candidates: Vec<f64>,
    pub folds: usize,
    pub seed: u64,
    pub selection_metric: SelectionMetric,
    pub per_fold_selection: Option<f64>,
    /// Evaluate configurations on the rayon pool.
    pub parallel: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            hidden_node_candidates: DEFAULT_HIDDEN_GRID.to_vec(),
            activation_candidates: ActivationKind::ALL.to_vec(),
            rbf_gamma_candidates: vec![DEFAULT_RBF_GAMMA],
            folds: DEFAULT_FOLDS,
            seed: 42,
            selection_metric: SelectionMetric::F1,
            per_fold_selection: None,
            parallel: true,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_node_candidates.is_empty()
            || self.activation_candidates.is_empty()
            || self.rbf_gamma_candidates.is_empty()
        {
            return Err(Error::Validation("grid candidate lists must be non-empty".into()));
        }
        if self.folds < 2 {
            return Err(Error::Validation(format!(
                "folds must be >= 2, got {}",
                self.folds
            )));
        }
        if self.hidden_node_candidates.contains(&0) {
            return Err(Error::Validation("hidden node candidates must be >= 1".into()));
        }
        if let Some(g) = self
            .rbf_gamma_candidates
            .iter()
            .find(|g| !(**g > 0.0 && g.is_finite()))
        {
            return Err(Error::Validation(format!(
                "rbf gamma candidates must be positive, got {g}"
            )));
        }
        Ok(())
    }

    /// The cross product, in declaration order. Non-RBF configurations carry
    /// the default gamma.
    pub fn configurations(&self) -> Vec<ElmParams> {
        let mut out = Vec::new();
        for &hidden in &self.hidden_node_candidates {
            for &activation in &self.activation_candidates {
                if activation == ActivationKind::Rbf {
                    for &gamma in &self.rbf_gamma_candidates {
                        out.push(ElmParams::new(hidden, activation, self.seed).with_rbf_gamma(gamma));
                    }
                } else {
                    out.push(ElmParams::new(hidden, activation, self.seed));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridEntry {
    pub params: ElmParams,
    /// Empty when the configuration failed.
    pub fold_metrics: Vec<f64>,
    /// `-inf` when the configuration failed.
    pub mean: f64,
    /// Population standard deviation over folds.
    pub std: f64,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    /// Sorted best first.
    pub leaderboard: Vec<GridEntry>,
    pub best: ElmParams,
    pub metric: SelectionMetric,
    pub folds: usize,
}

/// Higher mean first; ties go to fewer hidden nodes, then Tanh < Sigmoid <
/// Rbf, then smaller gamma.
fn rank(a: &GridEntry, b: &GridEntry) -> Ordering {
    b.mean
        .total_cmp(&a.mean)
        .then(a.params.hidden_nodes.cmp(&b.params.hidden_nodes))
        .then(a.params.activation.cmp(&b.params.activation))
        .then(a.params.rbf_gamma.total_cmp(&b.params.rbf_gamma))
}

fn evaluate_config(data: &FlowDataset, params: ElmParams, opts: &CvOptions) -> GridEntry {
    match cross_validate_with(data, &params, opts) {
        Ok(fold_metrics) => {
            let n = fold_metrics.len() as f64;
            let mean = fold_metrics.iter().sum::<f64>() / n;
            let std = (fold_metrics.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / n).sqrt();
            GridEntry {
                params,
                fold_metrics,
                mean,
                std,
                failure: None,
            }
        }
        Err(e) => GridEntry {
            params,
            fold_metrics: Vec::new(),
            mean: f64::NEG_INFINITY,
            std: 0.0,
            failure: Some(e.to_string()),
        },
    }
}

pub fn grid_search(data: &FlowDataset, spec: &GridSpec) -> Result<GridResult> {
    spec.validate()?;
    let opts = CvOptions {
        folds: spec.folds,
        seed: spec.seed,
        metric: spec.selection_metric,
        per_fold_selection: spec.per_fold_selection,
    };
    // fold feasibility is a property of the data, not of a configuration
    kfold_indices(data.labels(), spec.folds, spec.seed)?;
    let configs = spec.configurations();
    let mut leaderboard: Vec<GridEntry> = if spec.parallel {
        configs
            .into_par_iter()
            .map(|p| evaluate_config(data, p, &opts))
            .collect()
    } else {
        configs
            .into_iter()
            .map(|p| evaluate_config(data, p, &opts))
            .collect()
    };
    leaderboard.sort_by(rank);
    let top = &leaderboard[0];
    if let Some(reason) = &top.failure {
        return Err(Error::Numeric(format!(
            "every grid configuration failed; first: {reason}"
        )));
    }
    Ok(GridResult {
        best: top.params,
        leaderboard,
        metric: spec.selection_metric,
        folds: spec.folds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Matrix;

    fn separable(n: usize, seed: u64) -> FlowDataset {
        let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
        let mut data = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let label = (i % 2) as u8;
            let sign = if label == 1 { 1.0 } else { -1.0 };
            data.push(sign * rng.uniform(0.5, 2.0));
            data.push(rng.uniform(-1.0, 1.0));
            labels.push(label);
        }
        FlowDataset::new(
            Matrix::new(n, 2, data).unwrap(),
            labels,
            vec!["signal".into(), "noise".into()],
            "toy",
        )
        .unwrap()
    }

    #[test]
    fn folds_are_stratified_partition() {
        let labels = [0, 0, 0, 0, 0, 1, 1, 1, 1, 1];
        let folds = kfold_indices(&labels, 5, 1).unwrap();
        assert_eq!(folds.len(), 5);
        let mut all = Vec::new();
        for (train, valid) in &folds {
            assert_eq!(valid.len(), 2);
            assert_eq!(valid.iter().filter(|&&i| labels[i] == 1).count(), 1);
            assert_eq!(train.len() + valid.len(), 10);
            all.extend_from_slice(valid);
        }
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert_eq!(folds, kfold_indices(&labels, 5, 1).unwrap());
    }

    #[test]
    fn too_few_per_class() {
        assert!(matches!(
            kfold_indices(&[0, 0, 1, 1, 1], 3, 1),
            Err(Error::Stratification(_))
        ));
        assert!(kfold_indices(&[0, 1], 1, 1).is_err());
    }

    #[test]
    fn cv_on_separable_data() {
        let d = separable(200, 3);
        let p = ElmParams::new(32, ActivationKind::Tanh, 0);
        let m = cross_validate(&d, &p, 5, 9, SelectionMetric::Accuracy).unwrap();
        assert_eq!(m.len(), 5);
        let mean = m.iter().sum::<f64>() / 5.0;
        assert!(mean >= 0.95, "mean accuracy {mean}");
        assert_eq!(
            m,
            cross_validate(&d, &p, 5, 9, SelectionMetric::Accuracy).unwrap()
        );
    }

    #[test]
    fn single_configuration_grid() {
        let d = separable(60, 4);
        let spec = GridSpec {
            hidden_node_candidates: vec![8],
            activation_candidates: vec![ActivationKind::Sigmoid],
            folds: 3,
            ..GridSpec::default()
        };
        let r = grid_search(&d, &spec).unwrap();
        assert_eq!(r.leaderboard.len(), 1);
        assert_eq!(r.best.hidden_nodes, 8);
        assert_eq!(r.best.activation, ActivationKind::Sigmoid);
        assert_eq!(r.leaderboard[0].fold_metrics.len(), 3);
    }

    #[test]
    fn tie_break_prefers_fewer_nodes() {
        let entry = |h, a, g| GridEntry {
            params: ElmParams::new(h, a, 0).with_rbf_gamma(g),
            fold_metrics: vec![0.9],
            mean: 0.9,
            std: 0.0,
            failure: None,
        };
        let mut v = [
            entry(64, ActivationKind::Tanh, 1.0),
            entry(16, ActivationKind::Rbf, 2.0),
            entry(16, ActivationKind::Rbf, 0.5),
            entry(16, ActivationKind::Sigmoid, 1.0),
        ];
        v.sort_by(rank);
        let order: Vec<(usize, ActivationKind, f64)> = v
            .iter()
            .map(|e| (e.params.hidden_nodes, e.params.activation, e.params.rbf_gamma))
            .collect();
        assert_eq!(
            order,
            vec![
                (16, ActivationKind::Sigmoid, 1.0),
                (16, ActivationKind::Rbf, 0.5),
                (16, ActivationKind::Rbf, 2.0),
                (64, ActivationKind::Tanh, 1.0),
            ]
        );
    }

    #[test]
    fn failed_configuration_is_recorded() {
        let d = separable(40, 5);
        let entry = evaluate_config(
            &d,
            ElmParams::new(4, ActivationKind::Tanh, 0),
            &CvOptions {
                per_fold_selection: Some(2.0),
                ..CvOptions::new(2, 1, SelectionMetric::F1)
            },
        );
        assert_eq!(entry.mean, f64::NEG_INFINITY);
        assert!(entry.failure.is_some());
    }

    #[test]
    fn configurations_cross_gamma_only_for_rbf() {
        let spec = GridSpec {
            hidden_node_candidates: vec![4, 8],
            activation_candidates: vec![ActivationKind::Tanh, ActivationKind::Rbf],
            rbf_gamma_candidates: vec![0.1, 1.0, 10.0],
            ..GridSpec::default()
        };
        assert_eq!(spec.configurations().len(), 2 * (1 + 3));
    }

    #[test]
    fn spec_validation() {
        let bad = GridSpec {
            folds: 1,
            ..GridSpec::default()
        };
        assert!(bad.validate().is_err());
        let bad = GridSpec {
            activation_candidates: vec![],
            ..GridSpec::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn metric_parsing() {
        assert_eq!("F1".parse::<SelectionMetric>().unwrap(), SelectionMetric::F1);
        assert!("auc".parse::<SelectionMetric>().is_err());
    }
}
