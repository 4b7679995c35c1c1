//! Algorithm selection and the fitted-model wrapper used by the pipeline.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::knn::{knn_fit, KnnModel};
use crate::linear::{logistic_fit, ols_fit, LinearModel, LogisticModel, LogisticParams};
use crate::matrix::{Matrix, Standardizer};
use crate::svm::{svc_fit, svr_fit, SvmModel, SvmParams};
use crate::tree::{
    cart_fit, mdi_importance, rf_fit, CartParams, DecisionTree, Forest, ForestParams, Task,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "RF")]
    RandomForest,
    /// Least squares for regression, logistic regression for classification.
    #[serde(rename = "LR")]
    Linear,
    #[serde(rename = "SVM")]
    Svm,
    #[serde(rename = "DT")]
    DecisionTree,
    #[serde(rename = "KNN")]
    Knn,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::RandomForest,
        Algorithm::Linear,
        Algorithm::Svm,
        Algorithm::DecisionTree,
        Algorithm::Knn,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Algorithm::RandomForest => "RF",
            Algorithm::Linear => "LR",
            Algorithm::Svm => "SVM",
            Algorithm::DecisionTree => "DT",
            Algorithm::Knn => "KNN",
        }
    }

    /// Stable per-algorithm stream index for seed derivation.
    pub(crate) fn stream(self) -> u64 {
        match self {
            Algorithm::RandomForest => 0,
            Algorithm::Linear => 1,
            Algorithm::Svm => 2,
            Algorithm::DecisionTree => 3,
            Algorithm::Knn => 4,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "RF" => Ok(Algorithm::RandomForest),
            "LR" => Ok(Algorithm::Linear),
            "SVM" => Ok(Algorithm::Svm),
            "DT" => Ok(Algorithm::DecisionTree),
            "KNN" => Ok(Algorithm::Knn),
            other => Err(Error::Config(format!("unknown model `{other}`"))),
        }
    }
}

/// Logistic settings in inverse-strength form: the fitted penalty is
/// `lambda = 1 / (c * n_train)`, so `c = 1` matches the usual default of
/// penalizing `|w|^2 / 2` against the summed log-loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    pub c: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        let d = LogisticParams::default();
        LogisticConfig {
            c: 1.0,
            max_iters: d.max_iters,
            tol: d.tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub rf: ForestParams,
    pub dt: CartParams,
    pub knn_k: usize,
    pub logistic: LogisticConfig,
    pub svm: SvmParams,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            rf: ForestParams::default(),
            dt: CartParams::default(),
            knn_k: 5,
            logistic: LogisticConfig::default(),
            svm: SvmParams::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub algorithm: Algorithm,
    pub task: Task,
    pub hyper: Hyperparameters,
    /// z-score inputs (fitted on training rows) for LR, SVM and KNN.
    pub standardize: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Artifact {
    Forest(Forest),
    Tree(DecisionTree),
    Linear(LinearModel),
    Logistic(LogisticModel),
    Svm(SvmModel),
    Knn(KnnModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub algorithm: Algorithm,
    pub task: Task,
    pub standardizer: Option<Standardizer>,
    pub artifact: Artifact,
    pub warnings: Vec<String>,
}

/// Something that can be trained on a design matrix.
pub trait Estimator: Sync {
    type Model: Predictor + Send;
    fn fit(&self, x: &Matrix, y: &[f64], seed: u64) -> Result<Self::Model>;
}

pub trait Predictor {
    fn predict(&self, x: &Matrix) -> Result<Vec<f64>>;
    fn warnings(&self) -> Vec<String> {
        Vec::new()
    }
}

impl Estimator for ModelSpec {
    type Model = TrainedModel;

    fn fit(&self, x: &Matrix, y: &[f64], seed: u64) -> Result<TrainedModel> {
        let scaled =
            matches!(self.algorithm, Algorithm::Linear | Algorithm::Svm) && self.standardize;
        let standardizer = scaled.then(|| Standardizer::fit(x));
        let xs = match &standardizer {
            Some(s) => s.transform(x)?,
            None => x.clone(),
        };
        let h = &self.hyper;
        let classify = self.task.is_classification();
        let mut warnings = Vec::new();
        let artifact = match self.algorithm {
            Algorithm::RandomForest => Artifact::Forest(rf_fit(&xs, y, self.task, h.rf, seed)?),
            Algorithm::DecisionTree => Artifact::Tree(cart_fit(&xs, y, self.task, h.dt, seed)?),
            Algorithm::Knn => Artifact::Knn(knn_fit(&xs, y, h.knn_k, self.standardize)?),
            Algorithm::Linear if classify => {
                if !(h.logistic.c > 0.0) {
                    return Err(Error::InvalidParameter(
                        "logistic C must be positive".into(),
                    ));
                }
                let params = LogisticParams {
                    l2_lambda: 1.0 / (h.logistic.c * xs.rows() as f64),
                    max_iters: h.logistic.max_iters,
                    tol: h.logistic.tol,
                };
                let m = logistic_fit(&xs, y, params)?;
                if !m.converged {
                    warnings.push(format!(
                        "LR: gradient descent stopped after {} iterations without reaching tol {:e}",
                        m.iterations, params.tol
                    ));
                }
                Artifact::Logistic(m)
            }
            Algorithm::Linear => Artifact::Linear(ols_fit(&xs, y)?),
            Algorithm::Svm if classify => {
                let signed: Vec<f64> = y
                    .iter()
                    .map(|&v| if v == 1.0 { 1.0 } else { -1.0 })
                    .collect();
                let m = svc_fit(&xs, &signed, h.svm, seed)?;
                warnings.extend(m.warning("SVM"));
                Artifact::Svm(m)
            }
            Algorithm::Svm => {
                let m = svr_fit(&xs, y, h.svm, seed)?;
                warnings.extend(m.warning("SVM"));
                Artifact::Svm(m)
            }
        };
        Ok(TrainedModel {
            algorithm: self.algorithm,
            task: self.task,
            standardizer,
            artifact,
            warnings,
        })
    }
}

impl TrainedModel {
    /// Regression: predicted grades. Classification: class indices as f64.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        let xs = match &self.standardizer {
            Some(s) => s.transform(x)?,
            None => x.clone(),
        };
        match &self.artifact {
            Artifact::Forest(f) => f.predict(&xs),
            Artifact::Tree(t) => t.predict(&xs),
            Artifact::Linear(m) => m.predict(&xs),
            Artifact::Logistic(m) => Ok(m.predict(&xs, 0.5)?.into_iter().map(f64::from).collect()),
            Artifact::Svm(m) if self.task.is_classification() => Ok(m
                .predict_labels(&xs)?
                .into_iter()
                .map(|v| if v > 0.0 { 1.0 } else { 0.0 })
                .collect()),
            Artifact::Svm(m) => m.predict(&xs),
            Artifact::Knn(m) => m.predict(&xs, self.task),
        }
    }

    /// Impurity-decrease importance for tree models.
    pub fn importance(&self) -> Option<Result<Vec<f64>>> {
        match &self.artifact {
            Artifact::Forest(f) => Some(mdi_importance(f)),
            Artifact::Tree(t) => Some(t.importance()),
            _ => None,
        }
    }
}

impl Predictor for TrainedModel {
    fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        TrainedModel::predict(self, x)
    }

    fn warnings(&self) -> Vec<String> {
        self.warnings.clone()
    }
}
