//! Regression and classification metrics, plus k-fold cross-validation.

mod cv;

pub use cv::{cross_validate, k_fold_split, CvResult, FoldAssignment, Metric};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionMetrics {
    pub mae: f64,
    pub n: usize,
}

pub fn mae(y_true: &[f64], y_pred: &[f64]) -> Result<RegressionMetrics> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = y_true.len();
    let total: f64 = y_true.iter().zip(y_pred).map(|(a, b)| (a - b).abs()).sum();
    Ok(RegressionMetrics {
        mae: total / n as f64,
        n,
    })
}

/// Binary confusion counts relative to a positive label (Deep by convention).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn new(tp: usize, fp: usize, tn: usize, fn_: usize) -> Self {
        ConfusionCounts { tp, fp, tn, fn_ }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Anything not equal to `positive` counts as the negative class.
pub fn confusion<L: PartialEq + Copy>(
    y_true: &[L],
    y_pred: &[L],
    positive: L,
) -> Result<ConfusionCounts> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    let mut c = ConfusionCounts::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t == positive, p == positive) {
            (true, true) => c.tp += 1,
            (false, true) => c.fp += 1,
            (false, false) => c.tn += 1,
            (true, false) => c.fn_ += 1,
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    /// Positive class first, then negative.
    pub per_class: Vec<ClassScores>,
    pub counts: ConfusionCounts,
    /// Notes on any 0/0 ratio that was set to 0.
    pub warnings: Vec<String>,
}

fn ratio(num: usize, den: usize, what: &str, warnings: &mut Vec<String>) -> f64 {
    if den == 0 {
        warnings.push(format!("{what} undefined (0/0); reported as 0"));
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

/// Per-class precision/recall/F1 and their unweighted (macro) means.
pub fn classification_metrics_labelled(
    c: ConfusionCounts,
    positive: &str,
    negative: &str,
) -> Result<ClassificationMetrics> {
    let total = c.total();
    if total == 0 {
        return Err(Error::EmptyInput);
    }
    let mut warnings = Vec::new();
    let pos_p = ratio(
        c.tp,
        c.tp + c.fp,
        &format!("precision of {positive}"),
        &mut warnings,
    );
    let pos_r = ratio(
        c.tp,
        c.tp + c.fn_,
        &format!("recall of {positive}"),
        &mut warnings,
    );
    let neg_p = ratio(
        c.tn,
        c.tn + c.fn_,
        &format!("precision of {negative}"),
        &mut warnings,
    );
    let neg_r = ratio(
        c.tn,
        c.tn + c.fp,
        &format!("recall of {negative}"),
        &mut warnings,
    );
    let per_class = vec![
        ClassScores {
            label: positive.to_string(),
            precision: pos_p,
            recall: pos_r,
            f1: harmonic(pos_p, pos_r),
        },
        ClassScores {
            label: negative.to_string(),
            precision: neg_p,
            recall: neg_r,
            f1: harmonic(neg_p, neg_r),
        },
    ];
    let mean = |f: fn(&ClassScores) -> f64| per_class.iter().map(f).sum::<f64>() / 2.0;
    Ok(ClassificationMetrics {
        accuracy: (c.tp + c.tn) as f64 / total as f64,
        macro_precision: mean(|s| s.precision),
        macro_recall: mean(|s| s.recall),
        macro_f1: mean(|s| s.f1),
        per_class,
        counts: c,
        warnings,
    })
}

pub fn classification_metrics(c: ConfusionCounts) -> Result<ClassificationMetrics> {
    classification_metrics_labelled(c, "Deep", "Surface")
}
