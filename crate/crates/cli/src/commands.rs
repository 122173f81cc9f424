use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use ddos_elm::data_io::{
    generate_synthetic, load_csv, load_csv_with_layout, load_model, save_model, write_atomic, write_csv,
    CsvSchema, SyntheticSpec,
};
use ddos_elm::elm::ElmParams;
use ddos_elm::pipeline::{self, StreamEvent, StreamScorer, TrainOutcome};

use crate::args::{EvaluateArgs, GridArgs, ScoreArgs, SynthArgs, TrainArgs};
use crate::config::{self, ConfigFile};
use crate::error::CliError;
use crate::report::{leaderboard_csv, leaderboard_table, report_text, summary_table};

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error worth
/// reporting once the real work is done.
fn emit(text: &str) {
    let mut stdout = io::stdout().lock();
    let _ = stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush());
}

fn training_context(
    command: &str,
    out: &TrainOutcome,
    params: &ElmParams,
    leak_free: bool,
) -> Vec<(&'static str, String)> {
    let meta = &out.artifact.meta;
    let sel = &out.prepared.selection;
    let mut ctx = vec![
        ("command", command.to_string()),
        ("dataset_fingerprint", meta.dataset_fingerprint.clone()),
        ("rows_after_cleaning", out.prepared.cleaned.n_rows().to_string()),
        ("train_rows", out.prepared.train.n_rows().to_string()),
        ("test_rows", out.prepared.test.n_rows().to_string()),
        ("features_total", sel.correlations.len().to_string()),
        ("features_selected", sel.kept_indices.len().to_string()),
        ("leak_free", leak_free.to_string()),
        ("seed", meta.seed.to_string()),
        ("hidden_nodes", params.hidden_nodes.to_string()),
        ("activation", params.activation.to_string()),
    ];
    if params.activation == ddos_elm::elm::ActivationKind::Rbf {
        ctx.push(("rbf_gamma", format!("{:?}", params.rbf_gamma)));
    }
    ctx
}

fn write_report(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    if let Some(p) = path {
        write_atomic(p, text.as_bytes())?;
    }
    Ok(())
}

fn training_summary(out: &TrainOutcome, params: &ElmParams, model: &Path) -> String {
    let sel = &out.prepared.selection;
    let gamma = if params.activation == ddos_elm::elm::ActivationKind::Rbf {
        format!(", gamma {}", params.rbf_gamma)
    } else {
        String::new()
    };
    format!(
        "{} rows after cleaning ({} train, {} test), {}/{} features kept\n\
         model: {} hidden nodes, {}{gamma}\n\n{}\nmodel written to {}\n",
        out.prepared.cleaned.n_rows(),
        out.prepared.train.n_rows(),
        out.prepared.test.n_rows(),
        sel.kept_indices.len(),
        sel.correlations.len(),
        params.hidden_nodes,
        params.activation,
        summary_table(&out.report),
        model.display()
    )
}

pub fn train(args: TrainArgs) -> Result<(), CliError> {
    let p = &args.pipeline;
    let conf = ConfigFile::load(p.config.as_deref())?;
    let schema = config::schema(p, &conf)?;
    let pc = config::pipeline(p, &conf)?;
    let params = config::train_params(&args, &conf, pc.seed)?;
    let loaded = load_csv(&p.input, &schema)?;
    let out = pipeline::train(&loaded, &schema, &pc, &params)?;
    save_model(&out.artifact, &p.model)?;
    let ctx = training_context("train", &out, &params, pc.leak_free);
    write_report(p.report.as_deref(), &report_text(&out.report, &ctx))?;
    emit(&training_summary(&out, &params, &p.model));
    Ok(())
}

pub fn grid(args: GridArgs) -> Result<(), CliError> {
    let p = &args.pipeline;
    let conf = ConfigFile::load(p.config.as_deref())?;
    let schema = config::schema(p, &conf)?;
    let pc = config::pipeline(p, &conf)?;
    let spec = config::grid_spec(&args, &conf, pc.seed)?;
    let loaded = load_csv(&p.input, &schema)?;
    let out = pipeline::grid(&loaded, &schema, &pc, &spec)?;
    let trained = &out.trained;
    save_model(&trained.artifact, &p.model)?;
    if let Some(path) = &args.leaderboard {
        write_atomic(path, leaderboard_csv(&out.grid).as_bytes())?;
    }
    let params = *trained.artifact.model.params();
    let mut ctx = training_context("grid", trained, &params, pc.leak_free);
    ctx.push(("folds", spec.folds.to_string()));
    ctx.push(("selection_metric", spec.selection_metric.to_string()));
    ctx.push(("configurations", out.grid.leaderboard.len().to_string()));
    write_report(p.report.as_deref(), &report_text(&trained.report, &ctx))?;
    emit(&format!(
        "{}-fold cross-validation on the training split:\n{}\n{}",
        spec.folds,
        leaderboard_table(&out.grid),
        training_summary(trained, &params, &p.model)
    ));
    Ok(())
}

pub fn evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    let conf = ConfigFile::load(args.config.as_deref())?;
    let threshold = config::threshold(args.threshold, &conf)?;
    let artifact = load_model(&args.model)?;
    let records = load_csv_with_layout(&args.input, &artifact.schema, &artifact.layout)?;
    let out = pipeline::evaluate_records(&artifact, &records, threshold)?;
    if let Some(path) = &args.predictions {
        let mut text = String::new();
        for v in &out.predictions {
            text.push_str(&v.to_line());
            text.push('\n');
        }
        write_atomic(path, text.as_bytes())?;
    }
    let ctx = vec![
        ("command", "evaluate".to_string()),
        (
            "model_dataset_fingerprint",
            artifact.meta.dataset_fingerprint.clone(),
        ),
        ("records", records.n_rows().to_string()),
        ("skipped_records", out.skipped.to_string()),
    ];
    write_report(args.report.as_deref(), &report_text(&out.report, &ctx))?;
    if out.skipped > 0 {
        eprintln!(
            "warning: {} record(s) with missing or non-numeric values skipped",
            out.skipped
        );
    }
    emit(&format!(
        "{} records scored\n\n{}",
        out.predictions.len(),
        summary_table(&out.report)
    ));
    Ok(())
}

fn is_std(path: &Option<PathBuf>) -> bool {
    path.as_deref().is_none_or(|p| p == Path::new("-"))
}

pub fn score(args: ScoreArgs) -> Result<(), CliError> {
    let conf = ConfigFile::load(args.config.as_deref())?;
    let threshold = config::threshold(args.threshold, &conf)?;
    // the model is validated before any input is consumed
    let artifact = load_model(&args.model)?;
    let input: Box<dyn BufRead> = if is_std(&args.input) {
        Box::new(io::stdin().lock())
    } else {
        let path = args.input.as_ref().unwrap();
        let f = File::open(path).map_err(|e| CliError::data(format!("load: {}: {e}", path.display())))?;
        Box::new(BufReader::new(f))
    };
    let mut output: Box<dyn Write> = if is_std(&args.output) {
        Box::new(io::stdout().lock())
    } else {
        let path = args.output.as_ref().unwrap();
        let f = File::create(path).map_err(|e| CliError::data(format!("output: {}: {e}", path.display())))?;
        Box::new(io::BufWriter::new(f))
    };
    let (verdicts, errors) = stream(input, &mut output, &mut StreamScorer::new(&artifact, threshold))?;
    eprintln!("{verdicts} verdict(s), {errors} malformed line(s)");
    Ok(())
}

/// Emits each verdict as soon as its line is read.
fn stream(
    mut input: impl BufRead,
    output: &mut dyn Write,
    scorer: &mut StreamScorer,
) -> Result<(usize, usize), CliError> {
    let write_err = |e: io::Error| CliError::data(format!("output: {e}"));
    let (mut verdicts, mut errors) = (0, 0);
    let mut buf = Vec::new();
    loop {
        buf.clear();
        let n = input
            .read_until(b'\n', &mut buf)
            .map_err(|e| CliError::data(format!("input: {e}")))?;
        if n == 0 {
            break;
        }
        let event = match std::str::from_utf8(&buf) {
            Ok(line) => scorer.process_line(line),
            Err(_) => Some(scorer.reject("line is not valid UTF-8")),
        };
        let Some(event) = event else { continue };
        match event {
            StreamEvent::Verdict(_) => verdicts += 1,
            StreamEvent::Error { .. } => errors += 1,
            StreamEvent::Header => {}
        }
        if let Some(text) = event.to_line() {
            writeln!(output, "{text}").map_err(write_err)?;
            output.flush().map_err(write_err)?;
        }
    }
    Ok((verdicts, errors))
}

pub fn synth(args: SynthArgs) -> Result<(), CliError> {
    let conf = ConfigFile::load(args.config.as_deref())?;
    let defaults = SyntheticSpec::default();
    let attack_mix = match args.mix.as_deref().or(conf.mix.as_deref()) {
        Some(text) => SyntheticSpec::parse_mix(text).map_err(|e| CliError::usage(e.to_string()))?,
        None => defaults.attack_mix,
    };
    let spec = SyntheticSpec {
        n_benign: args.benign.or(conf.benign).unwrap_or(defaults.n_benign),
        n_attack: args.attack.or(conf.attack).unwrap_or(defaults.n_attack),
        attack_mix,
        seed: args.seed.or(conf.seed).unwrap_or(defaults.seed),
        n_features: args.n_features.or(conf.n_features).unwrap_or(defaults.n_features),
    };
    spec.validate().map_err(|e| CliError::usage(e.to_string()))?;
    let flows = generate_synthetic(&spec)?;
    write_csv(
        &args.output,
        &flows.dataset,
        Some(&flows.categories),
        &CsvSchema::default(),
    )?;
    emit(&format!(
        "wrote {} rows ({} benign, {} attack) with {} features to {}\n",
        flows.dataset.n_rows(),
        spec.n_benign,
        spec.n_attack,
        spec.n_features,
        args.output.display()
    ));
    Ok(())
}
