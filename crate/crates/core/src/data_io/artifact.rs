//! Versioned, line-oriented text format for trained pipelines.
//!
//! Every float is written as `{:.16e}` (17 significant digits), which parses
//! back to the identical `f64`. The layout of format version 1 is documented
//! field by field in `docs/model-format.md`.

use std::fmt::Write as _;
use std::path::Path;

use crate::data_io::csv::{ColumnKind, CsvSchema, InputColumn, InputLayout};
use crate::elm::{ActivationKind, ElmModel, ElmParams};
use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::preprocess::{apply_scaler, FeatureSelection, ScalerState};

use super::write_atomic;

pub const FORMAT_MAGIC: &str = "ddos-elm-model";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingMeta {
    pub seed: u64,
    /// Free-form timestamp, absent for reproducible builds.
    pub trained_at: Option<String>,
    /// SHA-256 of the cleaned training data, hex.
    pub dataset_fingerprint: String,
    pub train_rows: usize,
}

/// Everything needed to score raw records: input layout, feature selection,
/// scaler and the ELM itself.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelArtifact {
    pub format_version: u32,
    pub schema: CsvSchema,
    pub layout: InputLayout,
    pub selection: FeatureSelection,
    pub scaler: ScalerState,
    pub model: ElmModel,
    pub meta: TrainingMeta,
}

impl ModelArtifact {
    /// Checks that every stage's dimensions chain together.
    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::UnsupportedVersion {
                found: self.format_version,
                supported: FORMAT_VERSION,
            });
        }
        let n_inputs = self.layout.n_features();
        let sel = &self.selection;
        if sel.correlations.len() != n_inputs {
            return Err(Error::Integrity(format!(
                "layout encodes {n_inputs} features but {} correlations are stored",
                sel.correlations.len()
            )));
        }
        if sel.kept_indices.is_empty() {
            return Err(Error::Integrity("no selected features".into()));
        }
        if !sel.kept_indices.windows(2).all(|w| w[0] < w[1])
            || sel.kept_indices.last().is_some_and(|&k| k >= n_inputs)
        {
            return Err(Error::Integrity(
                "selected indices must be sorted, unique and in range".into(),
            ));
        }
        if self.scaler.len() != sel.kept_indices.len() {
            return Err(Error::Integrity(format!(
                "{} selected features but scaler has {} columns",
                sel.kept_indices.len(),
                self.scaler.len()
            )));
        }
        if self.model.n_features() != sel.kept_indices.len() {
            return Err(Error::Integrity(format!(
                "{} selected features but model expects {}",
                sel.kept_indices.len(),
                self.model.n_features()
            )));
        }
        Ok(())
    }

    /// Selected, scaled model inputs for encoded feature rows.
    pub fn transform(&self, encoded: &Matrix) -> Result<Matrix> {
        let selected = self.selection.apply_matrix(encoded)?;
        apply_scaler(&self.scaler, &selected)
    }

    /// Raw ELM scores for encoded feature rows (full input width).
    pub fn score_encoded(&self, encoded: &Matrix) -> Result<Vec<f64>> {
        self.model.score(&self.transform(encoded)?)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let w = &mut s;
        let f = fmt_f64;
        line(w, FORMAT_MAGIC);
        line(w, &format!("format_version {}", self.format_version));
        line(w, &format!("seed {}", self.meta.seed));
        line(
            w,
            &format!("trained_at {}", self.meta.trained_at.as_deref().unwrap_or("-")),
        );
        line(
            w,
            &format!("dataset_fingerprint {}", self.meta.dataset_fingerprint),
        );
        line(w, &format!("train_rows {}", self.meta.train_rows));
        line(w, &format!("label_column {}", self.schema.label_column));
        line(w, &format!("benign_value {}", self.schema.benign_value));
        line(w, &format!("delimiter {}", self.schema.delimiter));
        line(w, &format!("exclude {}", self.schema.exclude.len()));
        self.schema.exclude.iter().for_each(|n| line(w, n));
        line(w, &format!("categorical {}", self.schema.categorical.len()));
        self.schema.categorical.iter().for_each(|n| line(w, n));
        line(w, &format!("inputs {}", self.layout.columns.len()));
        for c in &self.layout.columns {
            match &c.kind {
                ColumnKind::Numeric => line(w, &format!("numeric {}", c.name)),
                ColumnKind::Categorical(vocab) => {
                    line(w, &format!("categorical {} {}", vocab.len(), c.name));
                    vocab.iter().for_each(|v| line(w, v));
                }
            }
        }
        let sel = &self.selection;
        line(
            w,
            &format!("selection {} {}", sel.correlations.len(), f(sel.threshold)),
        );
        line(w, &join(sel.correlations.iter().map(|&v| f(v))));
        line(w, &format!("kept {}", sel.kept_indices.len()));
        line(w, &join(sel.kept_indices.iter().map(|k| k.to_string())));
        line(w, &format!("scaler {}", self.scaler.len()));
        line(w, &join(self.scaler.means.iter().map(|&v| f(v))));
        line(w, &join(self.scaler.stds.iter().map(|&v| f(v))));
        let p = self.model.params();
        line(
            w,
            &format!(
                "elm {} {} {} {}",
                p.hidden_nodes,
                p.activation,
                f(p.rbf_gamma),
                p.seed
            ),
        );
        write_matrix(w, "input_weights", self.model.input_weights());
        line(w, &format!("biases {}", self.model.biases().len()));
        line(w, &join(self.model.biases().iter().map(|&v| f(v))));
        write_matrix(w, "output_weights", self.model.output_weights());
        line(w, "end");
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut r = Reader::new(text);
        if r.next()? != FORMAT_MAGIC {
            return Err(Error::Integrity(format!("missing '{FORMAT_MAGIC}' header line")));
        }
        let format_version: u32 = r.parse_field("format_version")?;
        if format_version != FORMAT_VERSION {
            return Err(Error::UnsupportedVersion {
                found: format_version,
                supported: FORMAT_VERSION,
            });
        }
        let seed: u64 = r.parse_field("seed")?;
        let trained_at = match r.field("trained_at")? {
            "-" => None,
            t => Some(t.to_string()),
        };
        let dataset_fingerprint = r.field("dataset_fingerprint")?.to_string();
        let train_rows: usize = r.parse_field("train_rows")?;
        let label_column = r.field("label_column")?.to_string();
        let benign_value = r.field("benign_value")?.to_string();
        let delimiter: u8 = r.parse_field("delimiter")?;
        let n_exclude: usize = r.parse_field("exclude")?;
        let exclude = r.lines(n_exclude)?;
        let n_categorical: usize = r.parse_field("categorical")?;
        let categorical = r.lines(n_categorical)?;
        let schema = CsvSchema {
            label_column,
            benign_value,
            delimiter,
            exclude,
            categorical,
        };

        let n_inputs: usize = r.parse_field("inputs")?;
        let mut columns = Vec::with_capacity(n_inputs.min(1 << 16));
        for _ in 0..n_inputs {
            let l = r.next()?;
            if let Some(name) = l.strip_prefix("numeric ") {
                columns.push(InputColumn {
                    name: name.to_string(),
                    kind: ColumnKind::Numeric,
                });
            } else if let Some(rest) = l.strip_prefix("categorical ") {
                let (count, name) = rest
                    .split_once(' ')
                    .ok_or_else(|| r.bad("categorical input needs a count and a name"))?;
                let count: usize = count.parse().map_err(|_| r.bad("bad vocabulary size"))?;
                let vocab = r.lines(count)?;
                columns.push(InputColumn {
                    name: name.to_string(),
                    kind: ColumnKind::Categorical(vocab),
                });
            } else {
                return Err(r.bad("expected 'numeric' or 'categorical' input column"));
            }
        }
        let layout = InputLayout { columns };

        let sel_head = r.field("selection")?;
        let (n_corr, threshold) = sel_head
            .split_once(' ')
            .ok_or_else(|| r.bad("selection needs a count and a threshold"))?;
        let n_corr: usize = n_corr.parse().map_err(|_| r.bad("bad correlation count"))?;
        let threshold = parse_f64(threshold).ok_or_else(|| r.bad("bad selection threshold"))?;
        let correlations = r.floats(n_corr)?;
        let n_kept: usize = r.parse_field("kept")?;
        let kept_indices = r.values::<usize>(n_kept)?;
        let selection = FeatureSelection {
            kept_indices,
            correlations,
            threshold,
        };

        let n_scaler: usize = r.parse_field("scaler")?;
        let means = r.floats(n_scaler)?;
        let stds = r.floats(n_scaler)?;
        let scaler = ScalerState::new(means, stds)?;

        let elm = r.field("elm")?;
        let parts: Vec<&str> = elm.split(' ').collect();
        if parts.len() != 4 {
            return Err(r.bad("elm line needs hidden, activation, rbf_gamma, seed"));
        }
        let hidden: usize = parts[0].parse().map_err(|_| r.bad("bad hidden width"))?;
        let activation: ActivationKind = parts[1].parse()?;
        let rbf_gamma = parse_f64(parts[2]).ok_or_else(|| r.bad("bad rbf gamma"))?;
        let model_seed: u64 = parts[3].parse().map_err(|_| r.bad("bad model seed"))?;
        let params = ElmParams {
            hidden_nodes: hidden,
            activation,
            seed: model_seed,
            rbf_gamma,
        };
        let w = r.matrix("input_weights")?;
        let n_biases: usize = r.parse_field("biases")?;
        let biases = r.floats(n_biases)?;
        let beta = r.matrix("output_weights")?;
        if r.next()? != "end" {
            return Err(r.bad("expected 'end'"));
        }
        let model = ElmModel::from_parts(w, biases, beta, params)?;

        let artifact = ModelArtifact {
            format_version,
            schema,
            layout,
            selection,
            scaler,
            model,
            meta: TrainingMeta {
                seed,
                trained_at,
                dataset_fingerprint,
                train_rows,
            },
        };
        artifact.validate()?;
        Ok(artifact)
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_f64(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn line(w: &mut String, text: &str) {
    w.push_str(text);
    w.push('\n');
}

fn join(items: impl Iterator<Item = String>) -> String {
    items.collect::<Vec<_>>().join(" ")
}

fn write_matrix(w: &mut String, name: &str, m: &Matrix) {
    let _ = writeln!(w, "{name} {} {}", m.rows(), m.cols());
    for i in 0..m.rows() {
        line(w, &join(m.row(i).iter().map(|&v| fmt_f64(v))));
    }
}

struct Reader<'a> {
    lines: std::str::Lines<'a>,
    line_no: usize,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            lines: text.lines(),
            line_no: 0,
        }
    }

    fn bad(&self, what: &str) -> Error {
        Error::Integrity(format!("line {}: {what}", self.line_no))
    }

    fn next(&mut self) -> Result<&'a str> {
        self.line_no += 1;
        self.lines
            .next()
            .ok_or_else(|| Error::Integrity(format!("file truncated at line {}", self.line_no)))
    }

    /// Value of a `key value` line.
    fn field(&mut self, key: &str) -> Result<&'a str> {
        let l = self.next()?;
        match l.strip_prefix(key).and_then(|rest| rest.strip_prefix(' ')) {
            Some(v) => Ok(v),
            None => Err(self.bad(&format!("expected '{key}'"))),
        }
    }

    fn parse_field<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let v = self.field(key)?;
        v.parse()
            .map_err(|_| self.bad(&format!("invalid value for '{key}': {v:?}")))
    }

    fn lines(&mut self, n: usize) -> Result<Vec<String>> {
        (0..n).map(|_| self.next().map(str::to_string)).collect()
    }

    fn values<T: std::str::FromStr>(&mut self, n: usize) -> Result<Vec<T>> {
        let l = self.next()?;
        let vals: Vec<T> = l
            .split_ascii_whitespace()
            .map(|t| {
                t.parse::<T>()
                    .map_err(|_| self.bad(&format!("unparseable value {t:?}")))
            })
            .collect::<Result<_>>()?;
        if vals.len() != n {
            return Err(self.bad(&format!("expected {n} values, found {}", vals.len())));
        }
        Ok(vals)
    }

    fn floats(&mut self, n: usize) -> Result<Vec<f64>> {
        let vals = self.values::<f64>(n)?;
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(self.bad("non-finite value"));
        }
        Ok(vals)
    }

    fn matrix(&mut self, name: &str) -> Result<Matrix> {
        let head = self.field(name)?;
        let (r, c) = head
            .split_once(' ')
            .ok_or_else(|| self.bad("matrix header needs rows and cols"))?;
        let rows: usize = r.parse().map_err(|_| self.bad("bad row count"))?;
        let cols: usize = c.parse().map_err(|_| self.bad("bad column count"))?;
        let mut data = Vec::with_capacity(rows.saturating_mul(cols).min(1 << 24));
        for _ in 0..rows {
            data.extend(self.floats(cols)?);
        }
        Matrix::new(rows, cols, data).map_err(|e| Error::Integrity(e.to_string()))
    }
}

pub fn save_model(artifact: &ModelArtifact, path: impl AsRef<Path>) -> Result<()> {
    artifact.validate()?;
    write_atomic(path.as_ref(), artifact.to_text().as_bytes())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelArtifact> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ModelArtifact::from_text(&text)
}
