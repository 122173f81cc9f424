//! End-to-end orchestration: clean → split → select → scale → fit → evaluate,
//! plus batch evaluation and record-at-a-time scoring of stored artifacts.

use crate::data_io::csv::parse_cell;
use crate::data_io::{
    dataset_fingerprint, match_header, CsvSchema, InputLayout, LayoutRecords, LoadedCsv, ModelArtifact,
    TrainingMeta, FORMAT_VERSION,
};
use crate::elm::{fit, ElmModel, ElmParams, DEFAULT_THRESHOLD};
use crate::error::{Error, Result};
use crate::metrics::{evaluate, EvalReport};
use crate::model_select::{grid_search, GridResult, GridSpec};
use crate::numerics::Matrix;
use crate::preprocess::{
    apply_scaler, clean, fit_scaler, select_features, split_indices, FeatureSelection, FlowDataset,
    ScalerState, SplitMode, DEFAULT_CORRELATION_THRESHOLD, DEFAULT_TRAIN_FRACTION,
};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub correlation_threshold: f64,
    pub train_fraction: f64,
    pub seed: u64,
    /// Fit feature selection on training rows only (and per fold in grid
    /// search) instead of on the full cleaned dataset.
    pub leak_free: bool,
    pub split_mode: SplitMode,
    pub threshold: f64,
    /// Recorded verbatim in the artifact.
    pub trained_at: Option<String>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            correlation_threshold: DEFAULT_CORRELATION_THRESHOLD,
            train_fraction: DEFAULT_TRAIN_FRACTION,
            seed: 42,
            leak_free: false,
            split_mode: SplitMode::Stratified,
            threshold: DEFAULT_THRESHOLD,
            trained_at: None,
        }
    }
}

/// Cleaned data split into train/test with features selected but not scaled.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub cleaned: FlowDataset,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    /// Training rows with every encoded feature (for per-fold selection).
    pub train_all_features: FlowDataset,
    pub train: FlowDataset,
    pub test: FlowDataset,
    pub selection: FeatureSelection,
}

pub fn prepare(raw: &crate::preprocess::RawFlows, config: &PipelineConfig) -> Result<Prepared> {
    let cleaned = clean(raw)?;
    let (train_indices, test_indices) = split_indices(
        cleaned.labels(),
        config.train_fraction,
        config.seed,
        config.split_mode,
    )?;
    let train_all_features = cleaned.subset_rows(&train_indices);
    let selection = if config.leak_free {
        select_features(&train_all_features, config.correlation_threshold)?
    } else {
        select_features(&cleaned, config.correlation_threshold)?
    };
    let train = selection.apply(&train_all_features)?;
    let test = selection.apply(&cleaned.subset_rows(&test_indices))?;
    Ok(Prepared {
        cleaned,
        train_indices,
        test_indices,
        train_all_features,
        train,
        test,
        selection,
    })
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub artifact: ModelArtifact,
    pub report: EvalReport,
    pub prepared: Prepared,
}

fn fit_and_package(
    loaded: &LoadedCsv,
    schema: &CsvSchema,
    config: &PipelineConfig,
    params: &ElmParams,
    prepared: Prepared,
) -> Result<TrainOutcome> {
    let scaler = fit_scaler(prepared.train.features())?;
    let x_train = apply_scaler(&scaler, prepared.train.features())?;
    let x_test = apply_scaler(&scaler, prepared.test.features())?;
    let model = fit(&x_train, prepared.train.labels(), params)?;
    let report = evaluate(&model, &prepared.test.with_features(x_test)?, config.threshold)?;
    let artifact = package(loaded, schema, config, &prepared, scaler, model)?;
    Ok(TrainOutcome {
        artifact,
        report,
        prepared,
    })
}

fn package(
    loaded: &LoadedCsv,
    schema: &CsvSchema,
    config: &PipelineConfig,
    prepared: &Prepared,
    scaler: ScalerState,
    model: ElmModel,
) -> Result<ModelArtifact> {
    let artifact = ModelArtifact {
        format_version: FORMAT_VERSION,
        schema: schema.clone(),
        layout: loaded.layout.clone(),
        selection: prepared.selection.clone(),
        scaler,
        model,
        meta: TrainingMeta {
            seed: config.seed,
            trained_at: config.trained_at.clone(),
            dataset_fingerprint: dataset_fingerprint(&prepared.cleaned),
            train_rows: prepared.train.n_rows(),
        },
    };
    artifact.validate()?;
    Ok(artifact)
}

/// Trains one configuration and evaluates it on the held-out split.
pub fn train(
    loaded: &LoadedCsv,
    schema: &CsvSchema,
    config: &PipelineConfig,
    params: &ElmParams,
) -> Result<TrainOutcome> {
    let prepared = prepare(&loaded.raw, config)?;
    fit_and_package(loaded, schema, config, params, prepared)
}

#[derive(Debug, Clone)]
pub struct GridOutcome {
    pub grid: GridResult,
    pub trained: TrainOutcome,
}

/// Grid-searches on the training split, refits the winner on the whole
/// training split (with `config.seed`) and evaluates on the test split.
pub fn grid(
    loaded: &LoadedCsv,
    schema: &CsvSchema,
    config: &PipelineConfig,
    spec: &GridSpec,
) -> Result<GridOutcome> {
    let prepared = prepare(&loaded.raw, config)?;
    let grid = if config.leak_free {
        let spec = GridSpec {
            per_fold_selection: Some(config.correlation_threshold),
            ..spec.clone()
        };
        grid_search(&prepared.train_all_features, &spec)?
    } else {
        grid_search(&prepared.train, spec)?
    };
    let params = ElmParams {
        seed: config.seed,
        ..grid.best
    };
    let trained = fit_and_package(loaded, schema, config, &params, prepared)?;
    Ok(GridOutcome { grid, trained })
}

/// One scored record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub ordinal: u64,
    pub score: f64,
    pub label: u8,
}

impl Verdict {
    /// `ordinal,score,label`, with the score in shortest round-trip form.
    pub fn to_line(&self) -> String {
        format!("{},{:?},{}", self.ordinal, self.score, self.label)
    }
}

#[derive(Debug, Clone)]
pub struct EvaluationOutcome {
    pub report: EvalReport,
    /// One per scored record, ordinal = data-row index in the file.
    pub predictions: Vec<Verdict>,
    /// Records skipped because a cell was missing or non-numeric.
    pub skipped: usize,
}

/// Scores labeled records against a stored artifact.
///
/// Rows with missing cells are skipped (and counted); no deduplication
/// happens, so predictions line up one-to-one with the file's records.
pub fn evaluate_records(
    artifact: &ModelArtifact,
    records: &LayoutRecords,
    threshold: f64,
) -> Result<EvaluationOutcome> {
    let labels = records.labels.as_ref().ok_or_else(|| {
        Error::Schema(format!(
            "no '{}' column: evaluation needs labeled records (use score for unlabeled data)",
            artifact.schema.label_column
        ))
    })?;
    let width = records.feature_names.len();
    let mut data = Vec::new();
    let mut kept_labels = Vec::new();
    let mut ordinals = Vec::new();
    for (i, &label) in labels.iter().enumerate() {
        let row = &records.cells[i * width..(i + 1) * width];
        if let Some(values) = row.iter().copied().collect::<Option<Vec<f64>>>() {
            data.extend(values);
            kept_labels.push(label);
            ordinals.push(i as u64);
        }
    }
    if kept_labels.is_empty() {
        return Err(Error::EmptyDataset("dropping records with missing values"));
    }
    let encoded = Matrix::new(kept_labels.len(), width, data)?;
    let scores = artifact.score_encoded(&encoded)?;
    let report = EvalReport::from_scores(&kept_labels, &scores, threshold)?;
    let predictions = ordinals
        .iter()
        .zip(&scores)
        .map(|(&ordinal, &score)| Verdict {
            ordinal,
            score,
            label: u8::from(score >= threshold),
        })
        .collect();
    Ok(EvaluationOutcome {
        report,
        predictions,
        skipped: records.n_rows() - kept_labels.len(),
    })
}

/// Scores one line-delimited record at a time.
///
/// Records are headerless CSV lines in the artifact's input column order, or
/// follow a first-line header naming (at least) every input column. Blank
/// lines are ignored and do not consume an ordinal.
pub struct StreamScorer<'a> {
    artifact: &'a ModelArtifact,
    threshold: f64,
    header_positions: Option<Vec<usize>>,
    header_width: usize,
    seen_first: bool,
    next_ordinal: u64,
}

/// What a single input line produced.
#[derive(Debug, Clone, PartialEq)]
pub enum StreamEvent {
    Header,
    Verdict(Verdict),
    Error { ordinal: u64, message: String },
}

impl StreamEvent {
    pub fn to_line(&self) -> Option<String> {
        match self {
            StreamEvent::Header => None,
            StreamEvent::Verdict(v) => Some(v.to_line()),
            StreamEvent::Error { ordinal, message } => {
                let msg: String = message
                    .chars()
                    .map(|c| match c {
                        ',' => ';',
                        '\n' | '\r' => ' ',
                        c => c,
                    })
                    .collect();
                Some(format!("{ordinal},error,{msg}"))
            }
        }
    }
}

impl<'a> StreamScorer<'a> {
    pub fn new(artifact: &'a ModelArtifact, threshold: f64) -> Self {
        Self {
            artifact,
            threshold,
            header_positions: None,
            header_width: 0,
            seen_first: false,
            next_ordinal: 0,
        }
    }

    fn split_fields(&self, line: &str) -> std::result::Result<Vec<String>, String> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .delimiter(self.artifact.schema.delimiter)
            .from_reader(line.as_bytes());
        let mut rec = csv::StringRecord::new();
        match rdr.read_record(&mut rec) {
            Ok(true) => Ok(rec.iter().map(str::to_string).collect()),
            Ok(false) => Ok(Vec::new()),
            Err(e) => Err(format!("malformed CSV: {e}")),
        }
    }

    fn layout(&self) -> &InputLayout {
        &self.artifact.layout
    }

    /// Returns `None` for blank lines.
    pub fn process_line(&mut self, line: &str) -> Option<StreamEvent> {
        let line = line.trim_end_matches(['\n', '\r']);
        if line.trim().is_empty() {
            return None;
        }
        let fields = match self.split_fields(line) {
            Ok(f) => f,
            Err(message) => return Some(self.error(message)),
        };
        if !self.seen_first {
            self.seen_first = true;
            let numeric = fields.iter().all(|f| parse_cell(f).is_some());
            if !numeric {
                if let Ok(pos) = match_header(&fields, self.layout()) {
                    self.header_positions = Some(pos);
                    self.header_width = fields.len();
                    return Some(StreamEvent::Header);
                }
            }
        }
        Some(self.score_fields(&fields))
    }

    /// Consumes an ordinal for a line the caller could not even decode.
    pub fn reject(&mut self, message: impl Into<String>) -> StreamEvent {
        self.error(message.into())
    }

    fn error(&mut self, message: String) -> StreamEvent {
        let ordinal = self.next_ordinal;
        self.next_ordinal += 1;
        StreamEvent::Error { ordinal, message }
    }

    fn score_fields(&mut self, fields: &[String]) -> StreamEvent {
        let ordered: Vec<&str> = match &self.header_positions {
            Some(pos) => {
                if fields.len() != self.header_width {
                    return self.error(format!(
                        "expected {} fields, found {}",
                        self.header_width,
                        fields.len()
                    ));
                }
                pos.iter().map(|&p| fields[p].as_str()).collect()
            }
            None => {
                let expected = self.layout().columns.len();
                if fields.len() != expected {
                    return self.error(format!("expected {expected} fields, found {}", fields.len()));
                }
                fields.iter().map(String::as_str).collect()
            }
        };
        let mut cells = Vec::with_capacity(self.layout().n_features());
        self.layout().encode(&ordered, &mut cells);
        let Some(values) = cells.into_iter().collect::<Option<Vec<f64>>>() else {
            return self.error("missing or non-numeric value".into());
        };
        let width = values.len();
        let result = Matrix::new(1, width, values).and_then(|m| self.artifact.score_encoded(&m));
        match result {
            Ok(scores) => {
                let score = scores[0];
                let ordinal = self.next_ordinal;
                self.next_ordinal += 1;
                StreamEvent::Verdict(Verdict {
                    ordinal,
                    score,
                    label: u8::from(score >= self.threshold),
                })
            }
            Err(e) => self.error(e.to_string()),
        }
    }
}
