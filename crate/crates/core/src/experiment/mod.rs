//! End-to-end regression and classification experiments, feature importance
//! and at-risk flagging.

mod config;
mod report;

pub use config::{
    parse_models, parse_pairs, DataSource, ExperimentConfig, TaskKind, DEFAULT_SEED, SEED_ENV,
};
pub use report::{
    emit_report, importance_csv, render_csv_tables, render_json, AtRiskSection, DataSummary,
    ExperimentReport, ImportanceEntry, ImportanceReport, ModelReport, OutputFormat, TestMetrics,
};

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::{
    class_counts, derive_strategy_labels, load_csv, random_oversample, synthesize_dataset,
    train_test_split, Balancing, ClassCounts, DataSplit, Dataset, Feature, Validation,
};
use crate::error::{Error, Result};
use crate::eval::{classification_metrics, confusion, cross_validate, mae, Metric};
use crate::matrix::Matrix;
use crate::model::{Algorithm, Estimator, ModelSpec, Predictor, TrainedModel};
use crate::seed::split_mix;

// Seed streams derived from the experiment seed.
const STREAM_SPLIT: u64 = 0;
const STREAM_OVERSAMPLE: u64 = 1;
const STREAM_CV: u64 = 2;
const STREAM_MODEL: u64 = 16;
const STREAM_SYNTH: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtRiskFlag {
    /// Row position in the data the predictions were made for.
    pub index: usize,
    pub predicted_grade: f64,
    pub threshold: f64,
}

/// Rows whose predicted grade is strictly below `threshold`, lowest first.
pub fn flag_predictions(predictions: &[f64], threshold: f64) -> Vec<AtRiskFlag> {
    let mut flags: Vec<AtRiskFlag> = predictions
        .iter()
        .enumerate()
        .filter(|(_, &p)| p < threshold)
        .map(|(index, &predicted_grade)| AtRiskFlag {
            index,
            predicted_grade,
            threshold,
        })
        .collect();
    flags.sort_by(|a, b| {
        a.predicted_grade
            .total_cmp(&b.predicted_grade)
            .then(a.index.cmp(&b.index))
    });
    flags
}

pub fn flag_at_risk<P: Predictor + ?Sized>(
    model: &P,
    x: &Matrix,
    threshold: f64,
) -> Result<Vec<AtRiskFlag>> {
    Ok(flag_predictions(&model.predict(x)?, threshold))
}

pub fn load_data(cfg: &ExperimentConfig) -> Result<Dataset> {
    match &cfg.data {
        DataSource::Csv { path, strict } => {
            let v = if *strict {
                Validation::Strict
            } else {
                Validation::Relaxed
            };
            load_csv(path, v)
        }
        DataSource::Synthetic { n, seed } => Ok(synthesize_dataset(
            *n,
            seed.unwrap_or_else(|| split_mix(cfg.seed, STREAM_SYNTH)),
        )),
    }
}

/// Train/test matrices for a configured task, after labelling and balancing.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub features: Vec<Feature>,
    pub x_train: Matrix,
    pub y_train: Vec<f64>,
    pub x_test: Matrix,
    pub y_test: Vec<f64>,
    pub split: DataSplit,
    pub summary: DataSummary,
}

pub fn prepare(cfg: &ExperimentConfig, data: &Dataset) -> Result<Prepared> {
    let features = cfg.features.features();
    let split_seed = split_mix(cfg.seed, STREAM_SPLIT);
    let os_seed = split_mix(cfg.seed, STREAM_OVERSAMPLE);
    let mut counts_before = None;
    let mut balanced_pool = None;
    let mut split = match cfg.task {
        TaskKind::Regression => train_test_split(data, cfg.test_fraction, split_seed)?,
        TaskKind::Classification => {
            let labelled = derive_strategy_labels(data);
            counts_before = Some(class_counts(&labelled)?);
            match cfg.balancing {
                Balancing::PaperFaithful => {
                    let pool = random_oversample(&labelled, os_seed)?;
                    balanced_pool = Some(pool.len());
                    train_test_split(&pool, cfg.test_fraction, split_seed)?
                }
                Balancing::LeakageSafe => {
                    let mut s = train_test_split(&labelled, cfg.test_fraction, split_seed)?;
                    s.train = random_oversample(&s.train, os_seed)?;
                    s
                }
                Balancing::None => train_test_split(&labelled, cfg.test_fraction, split_seed)?,
            }
        }
    };
    split.balancing = cfg.balancing;

    let targets = |d: &Dataset| match cfg.task {
        TaskKind::Regression => Ok(d.performance()),
        TaskKind::Classification => d.class_targets(),
    };
    let train_counts: Option<ClassCounts> = match cfg.task {
        TaskKind::Classification => Some(class_counts(&split.train)?),
        TaskKind::Regression => None,
    };
    let test_counts: Option<ClassCounts> = match cfg.task {
        TaskKind::Classification => Some(class_counts(&split.test)?),
        TaskKind::Regression => None,
    };
    let summary = DataSummary {
        source: describe_source(&cfg.data),
        n_records: data.len(),
        balanced_pool,
        n_train: split.train.len(),
        n_test: split.test.len(),
        class_counts: counts_before,
        train_class_counts: train_counts,
        test_class_counts: test_counts,
        features: features.iter().map(|f| f.name().to_string()).collect(),
    };
    Ok(Prepared {
        x_train: split.train.design_matrix(&features),
        y_train: targets(&split.train)?,
        x_test: split.test.design_matrix(&features),
        y_test: targets(&split.test)?,
        features,
        split,
        summary,
    })
}

fn describe_source(src: &DataSource) -> String {
    match src {
        DataSource::Csv { path, .. } => format!("csv:{}", path.display()),
        DataSource::Synthetic { n, seed } => match seed {
            Some(s) => format!("synthetic:n={n},seed={s}"),
            None => format!("synthetic:n={n}"),
        },
    }
}

fn spec_for(cfg: &ExperimentConfig, algorithm: Algorithm) -> ModelSpec {
    ModelSpec {
        algorithm,
        task: cfg.task.task(),
        hyper: cfg.hyper,
        standardize: cfg.standardize,
    }
}

fn model_seed(cfg: &ExperimentConfig, a: Algorithm) -> u64 {
    split_mix(cfg.seed, STREAM_MODEL + a.stream())
}

fn importance_entries(features: &[Feature], values: &[f64]) -> Vec<ImportanceEntry> {
    let mut out: Vec<ImportanceEntry> = features
        .iter()
        .zip(values)
        .map(|(f, &value)| ImportanceEntry {
            feature: f.name().to_string(),
            value,
        })
        .collect();
    // stable sort keeps column order among ties
    out.sort_by(|a, b| b.value.total_cmp(&a.value));
    out
}

struct Fitted {
    report: ModelReport,
    model: TrainedModel,
    test_predictions: Vec<f64>,
}

fn fit_and_score(
    cfg: &ExperimentConfig,
    p: &Prepared,
    a: Algorithm,
    warnings: &mut Vec<String>,
) -> Result<Fitted> {
    let spec = spec_for(cfg, a);
    let metric = match cfg.task {
        TaskKind::Regression => Metric::Mae,
        TaskKind::Classification => Metric::Accuracy,
    };
    let cv = cross_validate(
        &spec,
        &p.x_train,
        &p.y_train,
        cfg.cv_folds,
        split_mix(cfg.seed, STREAM_CV),
        metric,
    )?;
    warnings.extend(cv.warnings.iter().cloned());
    let model = spec.fit(&p.x_train, &p.y_train, model_seed(cfg, a))?;
    warnings.extend(model.warnings.iter().cloned());
    let pred = model.predict(&p.x_test)?;
    let test = match cfg.task {
        TaskKind::Regression => TestMetrics::Regression(mae(&p.y_test, &pred)?),
        TaskKind::Classification => {
            let m = classification_metrics(confusion(&p.y_test, &pred, 1.0)?)?;
            warnings.extend(m.warnings.iter().map(|w| format!("{a} test: {w}")));
            TestMetrics::Classification(m)
        }
    };
    Ok(Fitted {
        report: ModelReport { model: a, cv, test },
        model,
        test_predictions: pred,
    })
}

fn run(cfg: &ExperimentConfig, data: &Dataset) -> Result<ExperimentReport> {
    let start = Instant::now();
    cfg.validate()?;
    let p = prepare(cfg, data)?;
    let mut warnings = Vec::new();
    let mut fitted = Vec::with_capacity(cfg.models.len());
    for &a in &cfg.models {
        fitted.push(fit_and_score(cfg, &p, a, &mut warnings)?);
    }

    let importance = match fitted
        .iter()
        .find(|f| f.report.model == Algorithm::RandomForest)
    {
        Some(f) => match f.model.importance() {
            Some(Ok(v)) => Some(importance_entries(&p.features, &v)),
            Some(Err(Error::DegenerateForest)) => {
                warnings.push("RF: no split reduced impurity; importance omitted".into());
                None
            }
            Some(Err(e)) => return Err(e),
            None => None,
        },
        None => None,
    };

    let at_risk = if cfg.task == TaskKind::Regression {
        let (model, preds) = match fitted.iter().find(|f| f.report.model == cfg.at_risk_model) {
            Some(f) => (f.model.clone(), f.test_predictions.clone()),
            None => {
                let spec = spec_for(cfg, cfg.at_risk_model);
                let m = spec.fit(&p.x_train, &p.y_train, model_seed(cfg, cfg.at_risk_model))?;
                warnings.extend(m.warnings.iter().cloned());
                let preds = m.predict(&p.x_test)?;
                (m, preds)
            }
        };
        let flags = flag_predictions(&preds, cfg.at_risk_threshold)
            .into_iter()
            .map(|f| AtRiskFlag {
                index: p.split.test_indices[f.index],
                ..f
            })
            .collect();
        Some(AtRiskSection {
            model: cfg.at_risk_model,
            threshold: cfg.at_risk_threshold,
            test_indices: p.split.test_indices.clone(),
            test_predictions: preds,
            flags,
            trained_model: model,
        })
    } else {
        None
    };

    let mut models: Vec<ModelReport> = fitted.into_iter().map(|f| f.report).collect();
    if cfg.task == TaskKind::Regression {
        models.sort_by(|a, b| a.test.headline().total_cmp(&b.test.headline()));
    }

    Ok(ExperimentReport {
        toolkit: format!("motivscore {}", env!("CARGO_PKG_VERSION")),
        config: cfg.clone(),
        data: p.summary,
        models,
        importance,
        at_risk,
        warnings,
        wall_clock_seconds: cfg.record_timing.then(|| start.elapsed().as_secs_f64()),
    })
}

/// 70/30 split, k-fold CV on the training part, test MAE per model sorted
/// ascending, RF importance and at-risk flags on the test rows.
pub fn run_regression_experiment(
    cfg: &ExperimentConfig,
    data: &Dataset,
) -> Result<ExperimentReport> {
    if cfg.task != TaskKind::Regression {
        return Err(Error::Config(
            "run_regression_experiment needs task = regression".into(),
        ));
    }
    run(cfg, data)
}

/// Strategy-label prediction under the configured balancing mode.
pub fn run_classification_experiment(
    cfg: &ExperimentConfig,
    data: &Dataset,
) -> Result<ExperimentReport> {
    if cfg.task != TaskKind::Classification {
        return Err(Error::Config(
            "run_classification_experiment needs task = classification".into(),
        ));
    }
    run(cfg, data)
}

pub fn run_experiment(cfg: &ExperimentConfig, data: &Dataset) -> Result<ExperimentReport> {
    run(cfg, data)
}

/// Trains only the random forest on the task's training rows and returns its
/// normalized importance, largest first.
pub fn run_importance(cfg: &ExperimentConfig, data: &Dataset) -> Result<ImportanceReport> {
    cfg.validate()?;
    let p = prepare(cfg, data)?;
    let spec = spec_for(cfg, Algorithm::RandomForest);
    let model = spec.fit(
        &p.x_train,
        &p.y_train,
        model_seed(cfg, Algorithm::RandomForest),
    )?;
    let values = model
        .importance()
        .expect("forest artifacts always carry importance")?;
    Ok(ImportanceReport {
        task: cfg.task,
        seed: cfg.seed,
        n_train: p.x_train.rows(),
        importance: importance_entries(&p.features, &values),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Fixed(Vec<f64>);

    impl Predictor for Fixed {
        fn predict(&self, _: &Matrix) -> Result<Vec<f64>> {
            Ok(self.0.clone())
        }
    }

    #[test]
    fn at_risk_examples() {
        let x = Matrix::zeros(2, 1);
        let f = flag_at_risk(&Fixed(vec![3.9, 4.1]), &x, 4.0).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!((f[0].index, f[0].predicted_grade), (0, 3.9));

        assert!(flag_predictions(&[4.72; 5], 4.0).is_empty());
        assert_eq!(flag_predictions(&[4.0, 6.9, 1.0], 7.0).len(), 3);
        // boundary is not flagged
        assert!(flag_predictions(&[4.0], 4.0).is_empty());
    }

    #[test]
    fn flags_sorted_ascending() {
        let f = flag_predictions(&[3.0, 1.5, 2.0, 5.0], 4.0);
        let idx: Vec<usize> = f.iter().map(|a| a.index).collect();
        assert_eq!(idx, vec![1, 2, 0]);
    }

    #[test]
    fn oversample_first_test_size_follows_majority() {
        let mut cfg = ExperimentConfig::defaults(TaskKind::Classification);
        cfg.data = DataSource::Synthetic {
            n: 200,
            seed: Some(3),
        };
        let d = load_data(&cfg).unwrap();
        let p = prepare(&cfg, &d).unwrap();
        let c = p.summary.class_counts.unwrap();
        let major = c.deep.max(c.surface);
        assert_eq!(p.summary.balanced_pool, Some(2 * major));
        assert_eq!(p.summary.n_test, crate::data::test_size(2 * major, 0.2));
    }
}
