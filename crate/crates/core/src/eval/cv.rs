use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{classification_metrics, confusion, mae};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{Estimator, Predictor};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    /// Sample indices per fold, ascending within each fold.
    pub folds: Vec<Vec<usize>>,
}

impl FoldAssignment {
    /// Fold index of every sample.
    pub fn fold_of(&self, n: usize) -> Vec<usize> {
        let mut out = vec![0; n];
        for (f, idx) in self.folds.iter().enumerate() {
            for &i in idx {
                out[i] = f;
            }
        }
        out
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|(f, _)| *f != fold)
            .flat_map(|(_, idx)| idx.iter().copied())
            .collect();
        v.sort_unstable();
        v
    }
}

/// Seeded shuffle, then contiguous chunks; the first `n % k` folds get one
/// extra sample.
pub fn k_fold_split(n: usize, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut seed::rng(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        let mut fold = perm[start..start + size].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        start += size;
    }
    Ok(FoldAssignment { folds })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Mae,
    Accuracy,
    MacroF1,
}

impl Metric {
    /// Scores predictions; classification targets are class indices with 1 = Deep.
    pub fn score(self, y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
        match self {
            Metric::Mae => Ok(mae(y_true, y_pred)?.mae),
            Metric::Accuracy | Metric::MacroF1 => {
                let m = classification_metrics(confusion(y_true, y_pred, 1.0)?)?;
                Ok(if self == Metric::Accuracy {
                    m.accuracy
                } else {
                    m.macro_f1
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub metric: Metric,
    pub per_fold: Vec<f64>,
    pub mean: f64,
    /// Sample sd across folds.
    pub sd: f64,
    pub fold_of: Vec<usize>,
    pub warnings: Vec<String>,
}

/// Fold `f` trains with seed `split_mix(seed, f)`, so folds are independent
/// and run in parallel without affecting results.
pub fn cross_validate<E: Estimator>(
    estimator: &E,
    x: &Matrix,
    y: &[f64],
    k: usize,
    seed: u64,
    metric: Metric,
) -> Result<CvResult> {
    let n = x.rows();
    if y.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: y.len(),
        });
    }
    let assignment = k_fold_split(n, k, seed)?;
    let outcomes: Vec<(f64, Vec<String>)> = (0..k)
        .into_par_iter()
        .map(|f| {
            let train = assignment.train_indices(f);
            let valid = &assignment.folds[f];
            let ytr: Vec<f64> = train.iter().map(|&i| y[i]).collect();
            let yva: Vec<f64> = valid.iter().map(|&i| y[i]).collect();
            let model = estimator.fit(
                &x.select_rows(&train),
                &ytr,
                seed::split_mix(seed, f as u64),
            )?;
            let pred = model.predict(&x.select_rows(valid))?;
            let score = metric.score(&yva, &pred)?;
            let warnings = model
                .warnings()
                .into_iter()
                .map(|w| format!("fold {}: {w}", f + 1))
                .collect();
            Ok((score, warnings))
        })
        .collect::<Result<_>>()?;

    let per_fold: Vec<f64> = outcomes.iter().map(|(s, _)| *s).collect();
    let warnings = outcomes.into_iter().flat_map(|(_, w)| w).collect();
    let kf = k as f64;
    let mean = per_fold.iter().sum::<f64>() / kf;
    let sd = (per_fold.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (kf - 1.0)).sqrt();
    Ok(CvResult {
        metric,
        per_fold,
        mean,
        sd,
        fold_of: assignment.fold_of(n),
        warnings,
    })
}
