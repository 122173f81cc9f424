//! Python bindings. Matrices cross the boundary as lists of rows (any
//! sequence of float sequences is accepted, including 2-D numpy arrays).

use std::path::PathBuf;

use ddos_elm::data_io::{self, CsvSchema, ModelArtifact, SyntheticSpec};
use ddos_elm::elm::{self, ActivationKind, ElmModel, ElmParams};
use ddos_elm::metrics::{self, EvalReport};
use ddos_elm::model_select::{self, GridSpec, SelectionMetric};
use ddos_elm::numerics::{self, Matrix};
use ddos_elm::pipeline::{self, PipelineConfig, StreamEvent, StreamScorer};
use ddos_elm::preprocess::{self, FlowDataset, SplitMode};
use ddos_elm::{Error, ErrorKind};
use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(
    ddos_elm,
    DataError,
    PyValueError,
    "Bad input data, schema or model file."
);
create_exception!(
    ddos_elm,
    NumericError,
    PyArithmeticError,
    "Numerical failure in the solver."
);

fn py_err(e: Error) -> PyErr {
    match e.kind() {
        ErrorKind::Data => DataError::new_err(e.to_string()),
        ErrorKind::Numeric => NumericError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for ddos_elm::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<Matrix> {
    if rows.is_empty() {
        return Err(DataError::new_err("matrix has no rows"));
    }
    Matrix::from_rows(&rows).py()
}

fn activation(name: &str) -> PyResult<ActivationKind> {
    name.parse().py()
}

fn dataset(x: Vec<Vec<f64>>, y: Vec<u8>) -> PyResult<FlowDataset> {
    let x = matrix(x)?;
    let names = (0..x.cols()).map(|j| format!("f{j}")).collect();
    FlowDataset::new(x, y, names, "python").py()
}

fn report_dict<'py>(py: Python<'py>, r: &EvalReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("accuracy", r.accuracy)?;
    d.set_item("precision", r.precision)?;
    d.set_item("recall", r.recall)?;
    d.set_item("f1", r.f1)?;
    d.set_item("auc_roc", r.auc_roc)?;
    d.set_item("negative_precision", r.negative_precision)?;
    d.set_item("negative_recall", r.negative_recall)?;
    d.set_item("threshold", r.threshold)?;
    d.set_item("n_samples", r.n_samples)?;
    d.set_item("tp", r.confusion.tp)?;
    d.set_item("fp", r.confusion.fp)?;
    d.set_item("tn", r.confusion.tn)?;
    d.set_item("fn", r.confusion.fn_)?;
    d.set_item("zero_division", r.zero_division.clone())?;
    Ok(d)
}

/// Moore-Penrose pseudoinverse via SVD.
#[pyfunction]
#[pyo3(signature = (a, rcond=None))]
fn pinv(a: Vec<Vec<f64>>, rcond: Option<f64>) -> PyResult<Vec<Vec<f64>>> {
    Ok(numerics::pseudoinverse(&matrix(a)?, rcond).py()?.to_rows())
}

/// Minimum-norm least-squares solution of `a · x ≈ t`.
#[pyfunction]
#[pyo3(signature = (a, t, rcond=None))]
fn lstsq(a: Vec<Vec<f64>>, t: Vec<Vec<f64>>, rcond: Option<f64>) -> PyResult<Vec<Vec<f64>>> {
    Ok(numerics::lstsq(&matrix(a)?, &matrix(t)?, rcond).py()?.to_rows())
}

/// Thin SVD: returns `(u, singular_values, vt)`.
#[pyfunction]
#[allow(clippy::type_complexity)]
fn svd(a: Vec<Vec<f64>>) -> PyResult<(Vec<Vec<f64>>, Vec<f64>, Vec<Vec<f64>>)> {
    let r = numerics::svd(&matrix(a)?).py()?;
    Ok((r.u.to_rows(), r.singular_values, r.vt.to_rows()))
}

/// Single-hidden-layer ELM classifier.
#[pyclass(module = "ddos_elm")]
struct Elm {
    params: ElmParams,
    model: Option<ElmModel>,
}

impl Elm {
    fn fitted(&self) -> PyResult<&ElmModel> {
        self.model
            .as_ref()
            .ok_or_else(|| DataError::new_err("model is not fitted; call fit first"))
    }
}

#[pymethods]
impl Elm {
    #[new]
    #[pyo3(signature = (hidden_nodes=64, activation="tanh", seed=42, rbf_gamma=1.0))]
    fn new(hidden_nodes: usize, activation: &str, seed: u64, rbf_gamma: f64) -> PyResult<Self> {
        let params =
            ElmParams::new(hidden_nodes, self::activation(activation)?, seed).with_rbf_gamma(rbf_gamma);
        params.validate().py()?;
        Ok(Self { params, model: None })
    }

    /// Fits output weights on `x` (rows) and 0/1 labels `y`; returns self.
    fn fit(mut slf: PyRefMut<'_, Self>, x: Vec<Vec<f64>>, y: Vec<u8>) -> PyResult<PyRefMut<'_, Self>> {
        let x = matrix(x)?;
        let params = slf.params;
        let model = slf.py().detach(|| elm::fit(&x, &y, &params)).py()?;
        slf.model = Some(model);
        Ok(slf)
    }

    /// Raw output scores, one per row.
    fn score(&self, x: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        self.fitted()?.score(&matrix(x)?).py()
    }

    #[pyo3(signature = (x, threshold=0.5))]
    fn predict(&self, x: Vec<Vec<f64>>, threshold: f64) -> PyResult<Vec<u8>> {
        self.fitted()?.predict(&matrix(x)?, threshold).py()
    }

    #[getter]
    fn hidden_nodes(&self) -> usize {
        self.params.hidden_nodes
    }

    #[getter]
    fn activation(&self) -> &'static str {
        self.params.activation.name()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.params.seed
    }

    #[getter]
    fn output_weights(&self) -> PyResult<Vec<f64>> {
        Ok(self.fitted()?.output_weights().as_slice().to_vec())
    }

    fn __repr__(&self) -> String {
        format!(
            "Elm(hidden_nodes={}, activation='{}', seed={}, fitted={})",
            self.params.hidden_nodes,
            self.params.activation.name(),
            self.params.seed,
            if self.model.is_some() { "True" } else { "False" }
        )
    }
}

/// `{"tp", "fp", "tn", "fn"}` counts with attack (1) as the positive class.
#[pyfunction]
fn confusion<'py>(py: Python<'py>, y_true: Vec<u8>, y_pred: Vec<u8>) -> PyResult<Bound<'py, PyDict>> {
    let cm = metrics::confusion(&y_true, &y_pred).py()?;
    let d = PyDict::new(py);
    d.set_item("tp", cm.tp)?;
    d.set_item("fp", cm.fp)?;
    d.set_item("tn", cm.tn)?;
    d.set_item("fn", cm.fn_)?;
    Ok(d)
}

#[pyfunction]
fn auc_roc(y_true: Vec<u8>, scores: Vec<f64>) -> PyResult<f64> {
    metrics::auc_roc(&y_true, &scores).py()
}

/// Every report metric from labels and raw scores.
#[pyfunction]
#[pyo3(signature = (y_true, scores, threshold=0.5))]
fn evaluate<'py>(
    py: Python<'py>,
    y_true: Vec<u8>,
    scores: Vec<f64>,
    threshold: f64,
) -> PyResult<Bound<'py, PyDict>> {
    report_dict(py, &EvalReport::from_scores(&y_true, &scores, threshold).py()?)
}

/// Returns `(kept_indices, correlations)`.
#[pyfunction]
#[pyo3(signature = (x, y, threshold=0.02))]
fn select_features(x: Vec<Vec<f64>>, y: Vec<u8>, threshold: f64) -> PyResult<(Vec<usize>, Vec<f64>)> {
    let sel = preprocess::select_features(&dataset(x, y)?, threshold).py()?;
    Ok((sel.kept_indices, sel.correlations))
}

/// Z-scores `x` with its own column statistics; returns `(scaled, means, stds)`.
#[pyfunction]
#[allow(clippy::type_complexity)]
fn zscore(x: Vec<Vec<f64>>) -> PyResult<(Vec<Vec<f64>>, Vec<f64>, Vec<f64>)> {
    let x = matrix(x)?;
    let state = preprocess::fit_scaler(&x).py()?;
    let z = preprocess::apply_scaler(&state, &x).py()?;
    Ok((z.to_rows(), state.means, state.stds))
}

/// Train/test index partition; returns `(train, test)`.
#[pyfunction]
#[pyo3(signature = (y, train_fraction=0.8, seed=42, stratified=true))]
fn split_indices(
    y: Vec<u8>,
    train_fraction: f64,
    seed: u64,
    stratified: bool,
) -> PyResult<(Vec<usize>, Vec<usize>)> {
    let mode = if stratified {
        SplitMode::Stratified
    } else {
        SplitMode::Plain
    };
    preprocess::split_indices(&y, train_fraction, seed, mode).py()
}

/// Stratified folds as a list of `(train, validation)` index lists.
#[pyfunction]
#[pyo3(signature = (y, folds=5, seed=42))]
fn kfold_indices(y: Vec<u8>, folds: usize, seed: u64) -> PyResult<Vec<(Vec<usize>, Vec<usize>)>> {
    model_select::kfold_indices(&y, folds, seed).py()
}

/// Cross-validated grid search; returns the leaderboard, best first.
#[pyfunction]
#[pyo3(signature = (x, y, hidden_nodes=None, activations=None, rbf_gammas=None, folds=5, seed=42, metric="f1"))]
#[allow(clippy::too_many_arguments)]
fn grid_search<'py>(
    py: Python<'py>,
    x: Vec<Vec<f64>>,
    y: Vec<u8>,
    hidden_nodes: Option<Vec<usize>>,
    activations: Option<Vec<String>>,
    rbf_gammas: Option<Vec<f64>>,
    folds: usize,
    seed: u64,
    metric: &str,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let data = dataset(x, y)?;
    let defaults = GridSpec::default();
    let spec = GridSpec {
        hidden_node_candidates: hidden_nodes.unwrap_or(defaults.hidden_node_candidates),
        activation_candidates: match activations {
            Some(names) => names.iter().map(|a| activation(a)).collect::<PyResult<_>>()?,
            None => defaults.activation_candidates,
        },
        rbf_gamma_candidates: rbf_gammas.unwrap_or(defaults.rbf_gamma_candidates),
        folds,
        seed,
        selection_metric: metric.parse::<SelectionMetric>().py()?,
        ..defaults
    };
    let result = py.detach(|| model_select::grid_search(&data, &spec)).py()?;
    result
        .leaderboard
        .iter()
        .map(|e| {
            let d = PyDict::new(py);
            d.set_item("hidden_nodes", e.params.hidden_nodes)?;
            d.set_item("activation", e.params.activation.name())?;
            d.set_item("rbf_gamma", e.params.rbf_gamma)?;
            d.set_item("mean", e.mean)?;
            d.set_item("std", e.std)?;
            d.set_item("fold_metrics", e.fold_metrics.clone())?;
            d.set_item("failure", e.failure.clone())?;
            Ok(d)
        })
        .collect()
}

/// Synthetic labeled flows; writes a CSV when `path` is given.
/// Returns `(rows, labels, categories, feature_names)`.
#[pyfunction]
#[pyo3(signature = (n_benign=2000, n_attack=2000, seed=7, n_features=12, mix=None, path=None))]
#[allow(clippy::type_complexity)]
fn generate_synthetic(
    n_benign: usize,
    n_attack: usize,
    seed: u64,
    n_features: usize,
    mix: Option<&str>,
    path: Option<PathBuf>,
) -> PyResult<(Vec<Vec<f64>>, Vec<u8>, Vec<String>, Vec<String>)> {
    let defaults = SyntheticSpec::default();
    let spec = SyntheticSpec {
        n_benign,
        n_attack,
        attack_mix: match mix {
            Some(m) => SyntheticSpec::parse_mix(m).py()?,
            None => defaults.attack_mix,
        },
        seed,
        n_features,
    };
    let flows = data_io::generate_synthetic(&spec).py()?;
    if let Some(p) = path {
        data_io::write_csv(&p, &flows.dataset, Some(&flows.categories), &CsvSchema::default()).py()?;
    }
    Ok((
        flows.dataset.features().to_rows(),
        flows.dataset.labels().to_vec(),
        flows.categories,
        flows.dataset.feature_names().to_vec(),
    ))
}

/// A stored model: input layout, feature selection, scaler and ELM.
#[pyclass(module = "ddos_elm")]
struct Model {
    artifact: ModelArtifact,
}

#[pymethods]
impl Model {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            artifact: data_io::load_model(path).py()?,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        data_io::save_model(&self.artifact, path).py()
    }

    /// Evaluates a labeled CSV; returns `(report, predictions)` where each
    /// prediction is `(ordinal, score, label)`.
    #[pyo3(signature = (path, threshold=0.5))]
    #[allow(clippy::type_complexity)]
    fn evaluate<'py>(
        &self,
        py: Python<'py>,
        path: PathBuf,
        threshold: f64,
    ) -> PyResult<(Bound<'py, PyDict>, Vec<(u64, f64, u8)>)> {
        let a = &self.artifact;
        let records = data_io::load_csv_with_layout(path, &a.schema, &a.layout).py()?;
        let out = pipeline::evaluate_records(a, &records, threshold).py()?;
        let preds = out
            .predictions
            .iter()
            .map(|v| (v.ordinal, v.score, v.label))
            .collect();
        Ok((report_dict(py, &out.report)?, preds))
    }

    /// Scores CSV lines as the `score` command does. Each result is
    /// `(ordinal, score, label)` or `(ordinal, None, error_message)`;
    /// blank and header lines produce nothing.
    #[pyo3(signature = (lines, threshold=0.5))]
    fn score_lines<'py>(
        &self,
        py: Python<'py>,
        lines: Vec<String>,
        threshold: f64,
    ) -> PyResult<Vec<Bound<'py, PyAny>>> {
        let mut scorer = StreamScorer::new(&self.artifact, threshold);
        let mut out = Vec::new();
        for line in &lines {
            match scorer.process_line(line) {
                Some(StreamEvent::Verdict(v)) => {
                    out.push((v.ordinal, Some(v.score), v.label.into_pyobject(py)?.into_any()))
                }
                Some(StreamEvent::Error { ordinal, message }) => {
                    out.push((ordinal, None, message.into_pyobject(py)?.into_any()))
                }
                Some(StreamEvent::Header) | None => continue,
            }
        }
        out.into_iter()
            .map(|t| Ok(t.into_pyobject(py)?.into_any()))
            .collect()
    }

    #[getter]
    fn input_columns(&self) -> Vec<String> {
        self.artifact
            .layout
            .column_names()
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    #[getter]
    fn selected_features(&self) -> Vec<String> {
        let names = self.artifact.layout.feature_names();
        self.artifact
            .selection
            .kept_indices
            .iter()
            .map(|&i| names[i].clone())
            .collect()
    }

    #[getter]
    fn hidden_nodes(&self) -> usize {
        self.artifact.model.params().hidden_nodes
    }

    #[getter]
    fn activation(&self) -> &'static str {
        self.artifact.model.params().activation.name()
    }

    #[getter]
    fn dataset_fingerprint(&self) -> String {
        self.artifact.meta.dataset_fingerprint.clone()
    }

    fn __repr__(&self) -> String {
        let p = self.artifact.model.params();
        format!(
            "Model(hidden_nodes={}, activation='{}', features={})",
            p.hidden_nodes,
            p.activation.name(),
            self.artifact.selection.kept_indices.len()
        )
    }
}

/// Full pipeline on a labeled CSV: clean, split, select, scale, fit,
/// evaluate. Writes the model when `model_path` is given and returns
/// `(model, report)`.
#[pyfunction]
#[pyo3(signature = (
    input, model_path=None, hidden_nodes=64, activation="tanh", rbf_gamma=1.0, seed=42,
    train_fraction=0.8, correlation_threshold=0.02, leak_free=false, label_column="Label",
    benign_value="Benign",
))]
#[allow(clippy::too_many_arguments)]
fn train<'py>(
    py: Python<'py>,
    input: PathBuf,
    model_path: Option<PathBuf>,
    hidden_nodes: usize,
    activation: &str,
    rbf_gamma: f64,
    seed: u64,
    train_fraction: f64,
    correlation_threshold: f64,
    leak_free: bool,
    label_column: &str,
    benign_value: &str,
) -> PyResult<(Model, Bound<'py, PyDict>)> {
    let schema = CsvSchema {
        label_column: label_column.to_string(),
        benign_value: benign_value.to_string(),
        ..CsvSchema::default()
    };
    schema.validate().py()?;
    let config = PipelineConfig {
        correlation_threshold,
        train_fraction,
        seed,
        leak_free,
        ..PipelineConfig::default()
    };
    let params = ElmParams::new(hidden_nodes, self::activation(activation)?, seed).with_rbf_gamma(rbf_gamma);
    params.validate().py()?;
    let out = py
        .detach(|| {
            let loaded = data_io::load_csv(&input, &schema)?;
            pipeline::train(&loaded, &schema, &config, &params)
        })
        .py()?;
    if let Some(p) = model_path {
        data_io::save_model(&out.artifact, p).py()?;
    }
    let report = report_dict(py, &out.report)?;
    Ok((
        Model {
            artifact: out.artifact,
        },
        report,
    ))
}

#[pymodule(name = "ddos_elm")]
fn init(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("DataError", py.get_type::<DataError>())?;
    m.add("NumericError", py.get_type::<NumericError>())?;
    m.add_class::<Elm>()?;
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(pinv, m)?)?;
    m.add_function(wrap_pyfunction!(lstsq, m)?)?;
    m.add_function(wrap_pyfunction!(svd, m)?)?;
    m.add_function(wrap_pyfunction!(confusion, m)?)?;
    m.add_function(wrap_pyfunction!(auc_roc, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(select_features, m)?)?;
    m.add_function(wrap_pyfunction!(zscore, m)?)?;
    m.add_function(wrap_pyfunction!(split_indices, m)?)?;
    m.add_function(wrap_pyfunction!(kfold_indices, m)?)?;
    m.add_function(wrap_pyfunction!(grid_search, m)?)?;
    m.add_function(wrap_pyfunction!(generate_synthetic, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    Ok(())
}
