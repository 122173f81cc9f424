//! Optional TOML defaults and the resolution of flags into library types.

use std::path::Path;

use ddos_elm::data_io::CsvSchema;
use ddos_elm::elm::{ActivationKind, ElmParams, DEFAULT_RBF_GAMMA, DEFAULT_THRESHOLD};
use ddos_elm::model_select::{GridSpec, SelectionMetric, DEFAULT_FOLDS, DEFAULT_HIDDEN_GRID};
use ddos_elm::pipeline::PipelineConfig;
use ddos_elm::preprocess::{SplitMode, DEFAULT_CORRELATION_THRESHOLD, DEFAULT_TRAIN_FRACTION};
use serde::Deserialize;

use crate::args::{GridArgs, PipelineArgs, TrainArgs};
use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_HIDDEN: usize = 64;

/// A scalar or a list; grid keys accept both, single-model keys need one value.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub label_column: Option<String>,
    pub benign_value: Option<String>,
    pub delimiter: Option<String>,
    pub exclude: Option<Vec<String>>,
    pub categorical: Option<Vec<String>>,
    pub corr_threshold: Option<f64>,
    pub train_fraction: Option<f64>,
    pub seed: Option<u64>,
    pub threshold: Option<f64>,
    pub leak_free: Option<bool>,
    pub plain_split: Option<bool>,
    pub hidden: Option<OneOrMany<usize>>,
    pub activation: Option<OneOrMany<String>>,
    pub rbf_gamma: Option<OneOrMany<f64>>,
    pub folds: Option<usize>,
    pub metric: Option<String>,
    pub benign: Option<usize>,
    pub attack: Option<usize>,
    pub n_features: Option<usize>,
    pub mix: Option<String>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::data(format!("config: {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::usage(format!("config: {}: {e}", path.display())))
    }
}

fn pick<T>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}

fn pick_list<T: Clone>(flag: &[T], config: Option<&OneOrMany<T>>, default: &[T]) -> Vec<T> {
    if !flag.is_empty() {
        flag.to_vec()
    } else if let Some(c) = config {
        c.to_vec()
    } else {
        default.to_vec()
    }
}

fn single<T: Clone>(
    flag: Option<T>,
    config: Option<&OneOrMany<T>>,
    key: &str,
) -> Result<Option<T>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match config.map(OneOrMany::to_vec) {
        None => Ok(None),
        Some(v) if v.len() == 1 => Ok(Some(v[0].clone())),
        Some(_) => Err(CliError::usage(format!(
            "config key '{key}' must be a single value for train"
        ))),
    }
}

pub fn parse_activation(text: &str) -> Result<ActivationKind, CliError> {
    text.parse().map_err(|_| {
        CliError::usage(format!(
            "unknown activation '{text}' (expected tanh, sigmoid or rbf)"
        ))
    })
}

fn parse_delimiter(c: char) -> Result<u8, CliError> {
    u8::try_from(c)
        .ok()
        .filter(u8::is_ascii)
        .ok_or_else(|| CliError::usage(format!("delimiter must be a single ASCII character, got {c:?}")))
}

pub fn threshold(flag: Option<f64>, config: &ConfigFile) -> Result<f64, CliError> {
    let t = pick(flag, config.threshold, DEFAULT_THRESHOLD);
    if !t.is_finite() {
        return Err(CliError::usage(format!("threshold must be finite, got {t}")));
    }
    Ok(t)
}

pub fn schema(args: &PipelineArgs, config: &ConfigFile) -> Result<CsvSchema, CliError> {
    let defaults = CsvSchema::default();
    let delimiter = match (args.delimiter, config.delimiter.as_deref()) {
        (Some(c), _) => parse_delimiter(c)?,
        (None, Some(s)) => {
            let mut chars = s.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => parse_delimiter(c)?,
                _ => {
                    return Err(CliError::usage(format!(
                        "config delimiter must be one character, got {s:?}"
                    )))
                }
            }
        }
        (None, None) => defaults.delimiter,
    };
    let list = |flag: &[String], conf: &Option<Vec<String>>| {
        if flag.is_empty() {
            conf.clone().unwrap_or_default()
        } else {
            flag.to_vec()
        }
    };
    let schema = CsvSchema {
        label_column: pick(
            args.label_column.clone(),
            config.label_column.clone(),
            defaults.label_column,
        ),
        benign_value: pick(
            args.benign_value.clone(),
            config.benign_value.clone(),
            defaults.benign_value,
        ),
        delimiter,
        exclude: list(&args.exclude, &config.exclude),
        categorical: list(&args.categorical, &config.categorical),
    };
    schema.validate().map_err(|e| CliError::usage(e.to_string()))?;
    Ok(schema)
}

pub fn pipeline(args: &PipelineArgs, config: &ConfigFile) -> Result<PipelineConfig, CliError> {
    let correlation_threshold = pick(
        args.corr_threshold,
        config.corr_threshold,
        DEFAULT_CORRELATION_THRESHOLD,
    );
    if !(correlation_threshold >= 0.0 && correlation_threshold.is_finite()) {
        return Err(CliError::usage(format!(
            "--corr-threshold must be a finite value >= 0, got {correlation_threshold}"
        )));
    }
    let train_fraction = pick(args.train_fraction, config.train_fraction, DEFAULT_TRAIN_FRACTION);
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(CliError::usage(format!(
            "--train-fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let plain = args.plain_split || config.plain_split.unwrap_or(false);
    Ok(PipelineConfig {
        correlation_threshold,
        train_fraction,
        seed: pick(args.seed, config.seed, DEFAULT_SEED),
        leak_free: args.leak_free || config.leak_free.unwrap_or(false),
        split_mode: if plain {
            SplitMode::Plain
        } else {
            SplitMode::Stratified
        },
        threshold: threshold(args.threshold, config)?,
        trained_at: std::env::var("SOURCE_DATE_EPOCH").ok().filter(|s| !s.is_empty()),
    })
}

pub fn train_params(args: &TrainArgs, config: &ConfigFile, seed: u64) -> Result<ElmParams, CliError> {
    let hidden = single(args.hidden, config.hidden.as_ref(), "hidden")?.unwrap_or(DEFAULT_HIDDEN);
    let activation = match single(args.activation.clone(), config.activation.as_ref(), "activation")? {
        Some(a) => parse_activation(&a)?,
        None => ActivationKind::Tanh,
    };
    let gamma = single(args.rbf_gamma, config.rbf_gamma.as_ref(), "rbf_gamma")?.unwrap_or(DEFAULT_RBF_GAMMA);
    let params = ElmParams::new(hidden, activation, seed).with_rbf_gamma(gamma);
    params.validate().map_err(|e| CliError::usage(e.to_string()))?;
    Ok(params)
}

pub fn grid_spec(args: &GridArgs, config: &ConfigFile, seed: u64) -> Result<GridSpec, CliError> {
    let activation_names = pick_list(
        &args.activation,
        config.activation.as_ref(),
        &ActivationKind::ALL.map(|a| a.name().to_string()),
    );
    let activation_candidates = activation_names
        .iter()
        .map(|a| parse_activation(a))
        .collect::<Result<Vec<_>, _>>()?;
    let metric: SelectionMetric = match args.metric.as_deref().or(config.metric.as_deref()) {
        Some(m) => m
            .parse()
            .map_err(|_| CliError::usage(format!("unknown metric '{m}' (expected f1 or accuracy)")))?,
        None => SelectionMetric::F1,
    };
    let spec = GridSpec {
        hidden_node_candidates: pick_list(&args.hidden, config.hidden.as_ref(), &DEFAULT_HIDDEN_GRID),
        activation_candidates,
        rbf_gamma_candidates: pick_list(&args.rbf_gamma, config.rbf_gamma.as_ref(), &[DEFAULT_RBF_GAMMA]),
        folds: pick(args.folds, config.folds, DEFAULT_FOLDS),
        seed,
        selection_metric: metric,
        per_fold_selection: None,
        parallel: !args.serial,
    };
    spec.validate().map_err(|e| CliError::usage(e.to_string()))?;
    Ok(spec)
}
