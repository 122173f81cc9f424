//! Text renderings: the machine-readable report, the two-decimal summary and
//! the grid leaderboard.

use std::fmt::Write;

use ddos_elm::elm::{ActivationKind, ElmParams};
use ddos_elm::metrics::EvalReport;
use ddos_elm::model_select::GridResult;

/// `key=value` lines (full precision) followed by the confusion block.
///
/// `context` lines come first, in the given order.
pub fn report_text(report: &EvalReport, context: &[(&str, String)]) -> String {
    let mut s = String::new();
    for (k, v) in context {
        writeln!(s, "{k}={v}").unwrap();
    }
    let cm = &report.confusion;
    let zero = if report.zero_division.is_empty() {
        "none".to_string()
    } else {
        report.zero_division.join(",")
    };
    let rows: [(&str, String); 16] = [
        ("n_samples", report.n_samples.to_string()),
        ("threshold", format!("{:?}", report.threshold)),
        ("accuracy", format!("{:?}", report.accuracy)),
        ("precision", format!("{:?}", report.precision)),
        ("recall", format!("{:?}", report.recall)),
        ("f1", format!("{:?}", report.f1)),
        ("auc_roc", format!("{:?}", report.auc_roc)),
        ("negative_precision", format!("{:?}", report.negative_precision)),
        ("negative_recall", format!("{:?}", report.negative_recall)),
        ("tp", cm.tp.to_string()),
        ("fp", cm.fp.to_string()),
        ("tn", cm.tn.to_string()),
        ("fn", cm.fn_.to_string()),
        ("zero_division", zero),
        ("positive_class", "attack".to_string()),
        ("negative_class", "benign".to_string()),
    ];
    for (k, v) in rows {
        writeln!(s, "{k}={v}").unwrap();
    }
    s.push('\n');
    s.push_str(&confusion_block(report));
    s
}

/// Rows are actual classes, columns predicted classes.
pub fn confusion_block(report: &EvalReport) -> String {
    let cm = &report.confusion;
    let w = [cm.tp, cm.fp, cm.tn, cm.fn_]
        .iter()
        .map(|v| v.to_string().len())
        .max()
        .unwrap_or(1)
        .max("attack".len());
    let mut s = String::new();
    writeln!(s, "confusion (rows: actual, columns: predicted)").unwrap();
    writeln!(s, "{:<8} {:>w$} {:>w$}", "", "benign", "attack").unwrap();
    writeln!(s, "{:<8} {:>w$} {:>w$}", "benign", cm.tn, cm.fp).unwrap();
    writeln!(s, "{:<8} {:>w$} {:>w$}", "attack", cm.fn_, cm.tp).unwrap();
    s
}

/// Two-decimal metric table for the terminal.
pub fn summary_table(report: &EvalReport) -> String {
    let mut s = String::new();
    writeln!(s, "{:<10} {:>6}", "metric", "value").unwrap();
    for (name, v) in [
        ("accuracy", report.accuracy),
        ("precision", report.precision),
        ("recall", report.recall),
        ("f1", report.f1),
        ("auc_roc", report.auc_roc),
    ] {
        writeln!(s, "{name:<10} {v:>6.2}").unwrap();
    }
    if !report.zero_division.is_empty() {
        writeln!(
            s,
            "(zero denominators, reported as 0: {})",
            report.zero_division.join(", ")
        )
        .unwrap();
    }
    s.push('\n');
    s.push_str(&confusion_block(report));
    s
}

fn gamma_text(p: &ElmParams) -> String {
    if p.activation == ActivationKind::Rbf {
        format!("{:?}", p.rbf_gamma)
    } else {
        "-".to_string()
    }
}

/// One line per configuration, best first.
pub fn leaderboard_table(grid: &GridResult) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "{:>4} {:>7} {:<8} {:>6} {:>17}",
        "rank",
        "hidden",
        "act",
        "gamma",
        format!("{} mean±std", grid.metric)
    )
    .unwrap();
    for (i, e) in grid.leaderboard.iter().enumerate() {
        let score = match &e.failure {
            None => format!("{:.4}±{:.4}", e.mean, e.std),
            Some(msg) => format!("failed: {msg}"),
        };
        writeln!(
            s,
            "{:>4} {:>7} {:<8} {:>6} {:>17}",
            i + 1,
            e.params.hidden_nodes,
            e.params.activation.name(),
            gamma_text(&e.params),
            score
        )
        .unwrap();
    }
    s
}

/// Full-precision leaderboard, one CSV row per configuration.
pub fn leaderboard_csv(grid: &GridResult) -> String {
    let mut s = String::new();
    let fold_cols: Vec<String> = (0..grid.folds).map(|k| format!("fold{k}")).collect();
    writeln!(
        s,
        "rank,hidden_nodes,activation,rbf_gamma,mean,std,{},failure",
        fold_cols.join(",")
    )
    .unwrap();
    for (i, e) in grid.leaderboard.iter().enumerate() {
        let folds: Vec<String> = if e.fold_metrics.is_empty() {
            vec![String::new(); grid.folds]
        } else {
            e.fold_metrics.iter().map(|v| format!("{v:?}")).collect()
        };
        let failure = e.failure.as_deref().unwrap_or("").replace([',', '\n', '\r'], " ");
        writeln!(
            s,
            "{},{},{},{},{:?},{:?},{},{}",
            i + 1,
            e.params.hidden_nodes,
            e.params.activation,
            gamma_text(&e.params),
            e.mean,
            e.std,
            folds.join(","),
            failure
        )
        .unwrap();
    }
    s
}
