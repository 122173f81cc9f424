//! Binary classification metrics. The positive class is `1` (attack).

use crate::elm::{threshold_scores, ElmModel};
use crate::error::{Error, Result};
use crate::preprocess::FlowDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::shape(
            "confusion",
            format!("{} true labels vs {} predictions", y_true.len(), y_pred.len()),
        ));
    }
    if y_true.is_empty() {
        return Err(Error::Validation("confusion matrix of zero samples".into()));
    }
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (1, 1) => cm.tp += 1,
            (0, 1) => cm.fp += 1,
            (0, 0) => cm.tn += 1,
            (1, 0) => cm.fn_ += 1,
            _ => {
                return Err(Error::Validation(format!(
                    "labels must be 0/1, found true={t} pred={p}"
                )))
            }
        }
    }
    Ok(cm)
}

/// `num / den`, or `0.0` (flagged) when the denominator is zero.
fn ratio(num: u64, den: u64) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionRecallF1 {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when any of the three hit a zero denominator.
    pub zero_division: bool,
}

pub fn prf1(cm: &ConfusionMatrix) -> PrecisionRecallF1 {
    let (precision, zp) = ratio(cm.tp, cm.tp + cm.fp);
    let (recall, zr) = ratio(cm.tp, cm.tp + cm.fn_);
    let (f1, zf) = if precision + recall == 0.0 {
        (0.0, true)
    } else {
        (2.0 * precision * recall / (precision + recall), false)
    };
    PrecisionRecallF1 {
        precision,
        recall,
        f1,
        zero_division: zp || zr || zf,
    }
}

pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::Validation("accuracy of an empty confusion matrix".into()));
    }
    Ok((cm.tp + cm.tn) as f64 / total as f64)
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half (Mann–Whitney U with average ranks).
pub fn auc_roc(y_true: &[u8], scores: &[f64]) -> Result<f64> {
    if y_true.len() != scores.len() {
        return Err(Error::shape(
            "auc_roc",
            format!("{} labels vs {} scores", y_true.len(), scores.len()),
        ));
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::Validation(format!("non-finite score at index {i}")));
    }
    let positives = y_true.iter().filter(|&&y| y == 1).count();
    let negatives = y_true.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::Validation(
            "AUC-ROC needs both positive and negative samples".into(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Ranks are 1-based; tied groups share their mean rank. Sums of ranks are
    // kept doubled so they stay integral.
    let mut positive_rank_sum_x2: u128 = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let rank_x2 = (start + 1 + end) as u128; // 2 × mean of ranks start+1..=end
        let group_pos = order[start..end].iter().filter(|&&i| y_true[i] == 1).count() as u128;
        positive_rank_sum_x2 += rank_x2 * group_pos;
        start = end;
    }
    let p = positives as u128;
    let u_x2 = positive_rank_sum_x2 - p * (p + 1);
    Ok(u_x2 as f64 / (2.0 * positives as f64 * negatives as f64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc_roc: f64,
    /// Benign-class precision `tn / (tn + fn)`.
    pub negative_precision: f64,
    /// Benign-class recall `tn / (tn + fp)`.
    pub negative_recall: f64,
    pub threshold: f64,
    pub n_samples: usize,
    /// Names of metrics that fell back to 0.0 on a zero denominator.
    pub zero_division: Vec<&'static str>,
}

impl EvalReport {
    /// Builds every field from labels and raw scores.
    pub fn from_scores(y_true: &[u8], scores: &[f64], threshold: f64) -> Result<Self> {
        let y_pred = threshold_scores(scores, threshold);
        let cm = confusion(y_true, &y_pred)?;
        let auc = auc_roc(y_true, scores)?;
        Ok(Self::from_confusion(cm, auc, threshold))
    }

    pub fn from_confusion(cm: ConfusionMatrix, auc_roc: f64, threshold: f64) -> Self {
        let pr = prf1(&cm);
        let (negative_precision, znp) = ratio(cm.tn, cm.tn + cm.fn_);
        let (negative_recall, znr) = ratio(cm.tn, cm.tn + cm.fp);
        let mut zero_division = Vec::new();
        if cm.tp + cm.fp == 0 {
            zero_division.push("precision");
        }
        if cm.tp + cm.fn_ == 0 {
            zero_division.push("recall");
        }
        if pr.precision + pr.recall == 0.0 {
            zero_division.push("f1");
        }
        if znp {
            zero_division.push("negative_precision");
        }
        if znr {
            zero_division.push("negative_recall");
        }
        Self {
            confusion: cm,
            accuracy: (cm.tp + cm.tn) as f64 / cm.total() as f64,
            precision: pr.precision,
            recall: pr.recall,
            f1: pr.f1,
            auc_roc,
            negative_precision,
            negative_recall,
            threshold,
            n_samples: cm.total() as usize,
            zero_division,
        }
    }
}

/// Scores `test` once and derives every report field at `threshold`.
pub fn evaluate(model: &ElmModel, test: &FlowDataset, threshold: f64) -> Result<EvalReport> {
    if test.n_rows() == 0 {
        return Err(Error::EmptyDataset("selecting the evaluation set"));
    }
    let scores = model.score(test.features())?;
    EvalReport::from_scores(test.labels(), &scores, threshold)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cm(tp: u64, fp: u64, tn: u64, fn_: u64) -> ConfusionMatrix {
        ConfusionMatrix { tp, fp, tn, fn_ }
    }

    #[test]
    fn confusion_cases() {
        assert_eq!(confusion(&[1, 1, 1], &[1, 1, 1]).unwrap(), cm(3, 0, 0, 0));
        assert_eq!(confusion(&[1, 0, 1, 0], &[1, 1, 0, 0]).unwrap(), cm(1, 1, 1, 1));
        assert!(confusion(&[1, 0], &[1]).is_err());
        assert!(confusion(&[], &[]).is_err());
    }

    #[test]
    fn prf1_arithmetic() {
        let r = prf1(&cm(1, 1, 0, 1));
        assert_eq!((r.precision, r.recall, r.f1), (0.5, 0.5, 0.5));
        let r = prf1(&cm(0, 0, 4, 0));
        assert_eq!((r.precision, r.recall, r.f1), (0.0, 0.0, 0.0));
        assert!(r.zero_division);
        let r = prf1(&cm(9, 1, 0, 3));
        assert!((r.precision - 0.9).abs() < 1e-15);
        assert!((r.recall - 0.75).abs() < 1e-15);
        assert!((r.f1 - 2.0 * 0.9 * 0.75 / 1.65).abs() < 1e-15);
        assert!((r.f1 - 0.8182).abs() < 1e-4);
    }

    #[test]
    fn accuracy_arithmetic() {
        assert_eq!(accuracy(&cm(5, 0, 5, 0)).unwrap(), 1.0);
        assert_eq!(accuracy(&cm(0, 5, 0, 5)).unwrap(), 0.0);
        assert!((accuracy(&cm(40, 3, 55, 2)).unwrap() - 0.95).abs() < 1e-15);
        assert!(accuracy(&cm(0, 0, 0, 0)).is_err());
    }

    #[test]
    fn auc_extremes() {
        assert_eq!(auc_roc(&[1, 1, 0, 0], &[1.0, 1.0, 0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(auc_roc(&[1, 0, 1, 0], &[0.3; 4]).unwrap(), 0.5);
        assert_eq!(auc_roc(&[1, 1, 0, 0], &[0.0, 0.0, 1.0, 1.0]).unwrap(), 0.0);
        assert!(auc_roc(&[1, 1], &[0.1, 0.2]).is_err());
        assert!(auc_roc(&[1, 0], &[0.1]).is_err());
    }

    #[test]
    fn auc_partial_ties() {
        // positives {0.5, 0.8}, negatives {0.5, 0.1}: pairs (0.5,0.5)=.5, (0.5,0.1)=1, (0.8,*)=2 → 3.5/4
        assert_eq!(auc_roc(&[1, 1, 0, 0], &[0.5, 0.8, 0.5, 0.1]).unwrap(), 0.875);
    }

    #[test]
    fn report_is_self_consistent() {
        let y = [1, 0, 1, 1, 0, 0, 1];
        let s = [0.9, 0.2, 0.4, 0.7, 0.6, 0.1, 0.55];
        let r = EvalReport::from_scores(&y, &s, 0.5).unwrap();
        let c = r.confusion;
        assert_eq!(c, cm(3, 1, 2, 1));
        assert_eq!(r.accuracy, accuracy(&c).unwrap());
        let p = prf1(&c);
        assert_eq!((r.precision, r.recall, r.f1), (p.precision, p.recall, p.f1));
        assert_eq!(r.negative_precision, 2.0 / 3.0);
        assert_eq!(r.negative_recall, 2.0 / 3.0);
        assert!(r.zero_division.is_empty());
    }

    #[test]
    fn unreachable_threshold_flags_precision() {
        let r = EvalReport::from_scores(&[1, 0], &[0.9, 0.1], 1e18).unwrap();
        assert_eq!(r.recall, 0.0);
        assert!(r.zero_division.contains(&"precision"));
    }
}
