//! Flow-record CSV ingestion and export.
//!
//! Numeric cells that are empty or do not parse as a finite float become
//! missing markers (dropped later by cleaning). Columns named in
//! [`CsvSchema::categorical`] are one-hot encoded over their sorted distinct
//! values, producing one `name=value` feature per value.

use std::collections::{BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use crate::error::{Error, Result};
use crate::preprocess::{binarize_labels, FlowDataset, RawFlows};

use super::write_atomic;

#[derive(Debug, Clone, PartialEq)]
pub struct CsvSchema {
    pub label_column: String,
    /// Matched case-insensitively.
    pub benign_value: String,
    pub delimiter: u8,
    /// Columns ignored entirely (identifiers, timestamps, ...).
    pub exclude: Vec<String>,
    pub categorical: Vec<String>,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            label_column: "Label".into(),
            benign_value: "Benign".into(),
            delimiter: b',',
            exclude: Vec::new(),
            categorical: Vec::new(),
        }
    }
}

impl CsvSchema {
    pub fn validate(&self) -> Result<()> {
        if self.label_column.trim().is_empty() {
            return Err(Error::Schema("label column name must not be empty".into()));
        }
        if !(self.delimiter.is_ascii_graphic() || self.delimiter == b'\t') {
            return Err(Error::Schema(format!(
                "delimiter must be a printable ASCII character or tab, got byte {}",
                self.delimiter
            )));
        }
        if self.delimiter == b'"' {
            return Err(Error::Schema(
                "the quote character cannot be the delimiter".into(),
            ));
        }
        let names = std::iter::once(&self.label_column)
            .chain(&self.exclude)
            .chain(&self.categorical)
            .chain(std::iter::once(&self.benign_value));
        for n in names {
            if n.contains(['\n', '\r']) {
                return Err(Error::Schema(format!(
                    "schema names cannot contain newlines: {n:?}"
                )));
            }
        }
        Ok(())
    }

    fn reader_builder(&self) -> csv::ReaderBuilder {
        let mut b = csv::ReaderBuilder::new();
        b.delimiter(self.delimiter).trim(csv::Trim::Headers);
        b
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnKind {
    Numeric,
    /// Sorted, unique vocabulary.
    Categorical(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputColumn {
    pub name: String,
    pub kind: ColumnKind,
}

/// How raw CSV columns map onto encoded feature columns.
#[derive(Debug, Clone, PartialEq)]
pub struct InputLayout {
    pub columns: Vec<InputColumn>,
}

impl InputLayout {
    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn feature_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        for c in &self.columns {
            match &c.kind {
                ColumnKind::Numeric => out.push(c.name.clone()),
                ColumnKind::Categorical(vocab) => out.extend(vocab.iter().map(|v| format!("{}={v}", c.name))),
            }
        }
        out
    }

    pub fn n_features(&self) -> usize {
        self.columns
            .iter()
            .map(|c| match &c.kind {
                ColumnKind::Numeric => 1,
                ColumnKind::Categorical(v) => v.len(),
            })
            .sum()
    }

    /// Encodes one record given its raw fields in layout column order.
    ///
    /// Unknown categorical values encode as all zeros; an empty categorical
    /// cell marks all of its one-hot columns missing.
    pub fn encode<S: AsRef<str>>(&self, fields: &[S], out: &mut Vec<Option<f64>>) {
        debug_assert_eq!(fields.len(), self.columns.len());
        for (col, field) in self.columns.iter().zip(fields) {
            let raw = field.as_ref().trim();
            match &col.kind {
                ColumnKind::Numeric => out.push(parse_cell(raw)),
                ColumnKind::Categorical(vocab) => {
                    if raw.is_empty() {
                        out.extend(std::iter::repeat_n(None, vocab.len()));
                    } else {
                        out.extend(vocab.iter().map(|v| Some(if v == raw { 1.0 } else { 0.0 })));
                    }
                }
            }
        }
    }
}

pub fn parse_cell(raw: &str) -> Option<f64> {
    raw.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Parsed CSV plus the layout that produced its feature columns.
#[derive(Debug, Clone)]
pub struct LoadedCsv {
    pub raw: RawFlows,
    pub layout: InputLayout,
}

struct Table {
    header: Vec<String>,
    records: Vec<csv::StringRecord>,
}

fn read_table<R: Read>(reader: R, schema: &CsvSchema, path: &Path) -> Result<Table> {
    let mut rdr = schema.reader_builder().from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_error(e, path))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::Parse {
            line: 1,
            detail: format!("{} has no header row", path.display()),
        });
    }
    let mut seen = HashSet::new();
    if let Some(dup) = header.iter().find(|h| !seen.insert(h.as_str())) {
        return Err(Error::Schema(format!("duplicate column '{dup}' in header")));
    }
    let mut records = Vec::new();
    for rec in rdr.records() {
        records.push(rec.map_err(|e| csv_error(e, path))?);
    }
    if records.is_empty() {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    Ok(Table { header, records })
}

fn csv_error(e: csv::Error, path: &Path) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => Error::Parse {
            line,
            detail: format!("expected {expected_len} fields, found {len}"),
        },
        csv::ErrorKind::Utf8 { err, .. } => Error::Parse {
            line,
            detail: format!("invalid UTF-8: {err}"),
        },
        other => Error::Parse {
            line,
            detail: format!("{other:?}"),
        },
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

fn label_index(header: &[String], schema: &CsvSchema) -> Option<usize> {
    header.iter().position(|h| h == &schema.label_column)
}

fn labels_from(records: &[csv::StringRecord], idx: usize, schema: &CsvSchema) -> Result<Vec<u8>> {
    let cats: Vec<&str> = records.iter().map(|r| r.get(idx).unwrap_or("")).collect();
    binarize_labels(&cats, &schema.benign_value)
}

fn encode_records(
    records: &[csv::StringRecord],
    positions: &[usize],
    layout: &InputLayout,
) -> Vec<Option<f64>> {
    let mut cells = Vec::with_capacity(records.len() * layout.n_features());
    let mut fields: Vec<&str> = Vec::with_capacity(positions.len());
    for rec in records {
        fields.clear();
        fields.extend(positions.iter().map(|&p| rec.get(p).unwrap_or("")));
        layout.encode(&fields, &mut cells);
    }
    cells
}

/// Reads a labeled flow CSV, deriving the input layout from its header.
pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<LoadedCsv> {
    let path = path.as_ref();
    schema.validate()?;
    let table = read_table(open(path)?, schema, path)?;
    let label_idx = label_index(&table.header, schema).ok_or_else(|| {
        Error::Schema(format!(
            "label column '{}' not found in {} (columns: {})",
            schema.label_column,
            path.display(),
            table.header.join(", ")
        ))
    })?;
    for c in &schema.categorical {
        if !table.header.contains(c) {
            return Err(Error::Schema(format!(
                "categorical column '{c}' not found in header"
            )));
        }
    }

    let mut positions = Vec::new();
    let mut columns = Vec::new();
    for (i, name) in table.header.iter().enumerate() {
        if i == label_idx || schema.exclude.contains(name) {
            continue;
        }
        let kind = if schema.categorical.contains(name) {
            let vocab: BTreeSet<String> = table
                .records
                .iter()
                .filter_map(|r| r.get(i))
                .map(|v| v.trim().to_string())
                .filter(|v| !v.is_empty())
                .collect();
            ColumnKind::Categorical(vocab.into_iter().collect())
        } else {
            ColumnKind::Numeric
        };
        positions.push(i);
        columns.push(InputColumn {
            name: name.clone(),
            kind,
        });
    }
    let layout = InputLayout { columns };
    if layout.n_features() == 0 {
        return Err(Error::Schema("no feature columns remain after exclusions".into()));
    }
    let feature_names = layout.feature_names();
    let mut seen = HashSet::new();
    if let Some(dup) = feature_names.iter().find(|n| !seen.insert(n.as_str())) {
        return Err(Error::Schema(format!(
            "encoded feature name '{dup}' is ambiguous"
        )));
    }
    if let Some(bad) = feature_names.iter().find(|n| n.contains(['\n', '\r'])) {
        return Err(Error::Schema(format!(
            "column names cannot contain newlines: {bad:?}"
        )));
    }

    let labels = labels_from(&table.records, label_idx, schema)?;
    let cells = encode_records(&table.records, &positions, &layout);
    Ok(LoadedCsv {
        raw: RawFlows {
            feature_names,
            cells,
            labels,
            source: path.display().to_string(),
        },
        layout,
    })
}

/// Encoded records read against an existing layout.
#[derive(Debug, Clone)]
pub struct LayoutRecords {
    pub feature_names: Vec<String>,
    /// Row-major, one row per data record.
    pub cells: Vec<Option<f64>>,
    /// Present when the file has the schema's label column.
    pub labels: Option<Vec<u8>>,
}

impl LayoutRecords {
    pub fn n_rows(&self) -> usize {
        if self.feature_names.is_empty() {
            0
        } else {
            self.cells.len() / self.feature_names.len()
        }
    }
}

/// Locates every layout column in `header`; errors list both column sets.
pub fn match_header(header: &[String], layout: &InputLayout) -> Result<Vec<usize>> {
    let positions: Option<Vec<usize>> = layout
        .columns
        .iter()
        .map(|c| header.iter().position(|h| h.trim() == c.name))
        .collect();
    positions.ok_or_else(|| {
        Error::Schema(format!(
            "feature columns do not match the model: model expects [{}], file has [{}]",
            layout.column_names().join(", "),
            header.join(", ")
        ))
    })
}

/// Reads a CSV whose columns are matched by name to `layout`.
pub fn load_csv_with_layout(
    path: impl AsRef<Path>,
    schema: &CsvSchema,
    layout: &InputLayout,
) -> Result<LayoutRecords> {
    let path = path.as_ref();
    schema.validate()?;
    let table = read_table(open(path)?, schema, path)?;
    let positions = match_header(&table.header, layout)?;
    let labels = match label_index(&table.header, schema) {
        Some(idx) => Some(labels_from(&table.records, idx, schema)?),
        None => None,
    };
    Ok(LayoutRecords {
        feature_names: layout.feature_names(),
        cells: encode_records(&table.records, &positions, layout),
        labels,
    })
}

/// Shortest decimal that parses back to the same `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:?}")
}

/// Writes `data` as CSV with a trailing label column.
///
/// `label_values` supplies one category string per row; without it labels are
/// written as the schema's benign value or `Attack`.
pub fn write_csv(
    path: impl AsRef<Path>,
    data: &FlowDataset,
    label_values: Option<&[String]>,
    schema: &CsvSchema,
) -> Result<()> {
    let path = path.as_ref();
    schema.validate()?;
    if let Some(v) = label_values {
        if v.len() != data.n_rows() {
            return Err(Error::shape(
                "write_csv",
                format!("{} label values for {} rows", v.len(), data.n_rows()),
            ));
        }
    }
    let mut wtr = csv::WriterBuilder::new()
        .delimiter(schema.delimiter)
        .from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Validation(format!("CSV encoding failed: {e}"));
    let mut header: Vec<&str> = data.feature_names().iter().map(String::as_str).collect();
    header.push(&schema.label_column);
    wtr.write_record(&header).map_err(csv_err)?;
    let mut fields: Vec<String> = Vec::with_capacity(header.len());
    for i in 0..data.n_rows() {
        fields.clear();
        fields.extend(data.features().row(i).iter().map(|&v| format_float(v)));
        fields.push(match label_values {
            Some(v) => v[i].clone(),
            None if data.labels()[i] == 0 => schema.benign_value.clone(),
            None => "Attack".into(),
        });
        wtr.write_record(&fields).map_err(csv_err)?;
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| Error::Validation(format!("CSV encoding failed: {e}")))?;
    write_atomic(path, &bytes)
}
