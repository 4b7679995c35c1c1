use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{Balancing, FeatureSet};
use crate::error::{Error, Result};
use crate::model::{Algorithm, Hyperparameters};
use crate::svm::KernelChoice;
use crate::tree::Task;

pub const DEFAULT_SEED: u64 = 42;
pub const SEED_ENV: &str = "MOTIVSCORE_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Regression,
    Classification,
}

impl TaskKind {
    pub fn task(self) -> Task {
        match self {
            TaskKind::Regression => Task::Regress,
            TaskKind::Classification => Task::binary(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Regression => "regression",
            TaskKind::Classification => "classification",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "regression" => Ok(TaskKind::Regression),
            "classification" => Ok(TaskKind::Classification),
            other => Err(Error::Config(format!("unknown task `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSource {
    Csv {
        path: PathBuf,
        strict: bool,
    },
    /// `seed: None` reuses the experiment seed.
    Synthetic {
        n: usize,
        seed: Option<u64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub task: TaskKind,
    pub models: Vec<Algorithm>,
    pub seed: u64,
    pub test_fraction: f64,
    pub cv_folds: usize,
    pub balancing: Balancing,
    pub features: FeatureSet,
    pub standardize: bool,
    pub hyper: Hyperparameters,
    pub data: DataSource,
    pub at_risk_threshold: f64,
    pub at_risk_model: Algorithm,
    /// Adds wall-clock time to the report, which then stops being
    /// byte-reproducible.
    pub record_timing: bool,
}

impl ExperimentConfig {
    pub fn defaults(task: TaskKind) -> Self {
        let regression = task == TaskKind::Regression;
        ExperimentConfig {
            task,
            models: Algorithm::ALL.to_vec(),
            seed: DEFAULT_SEED,
            test_fraction: if regression { 0.3 } else { 0.2 },
            cv_folds: if regression { 10 } else { 5 },
            balancing: if regression {
                Balancing::None
            } else {
                Balancing::PaperFaithful
            },
            features: FeatureSet {
                include_gender: false,
                include_strategy_scores: regression,
            },
            standardize: true,
            hyper: Hyperparameters::default(),
            data: DataSource::Synthetic { n: 924, seed: None },
            at_risk_threshold: 4.0,
            at_risk_model: Algorithm::DecisionTree,
            record_timing: false,
        }
    }

    /// Layers settings in increasing precedence: task defaults, the seed
    /// environment variable, the config file, then command-line pairs.
    /// The task itself comes from `task_override`, else the file, else
    /// regression.
    pub fn build(
        task_override: Option<TaskKind>,
        file_text: Option<&str>,
        overrides: &[(String, String)],
        env_seed: Option<&str>,
    ) -> Result<Self> {
        let file_pairs = match file_text {
            Some(t) => parse_pairs(t)?,
            None => Vec::new(),
        };
        let file_task = file_pairs
            .iter()
            .rev()
            .find(|(k, _)| k == "task")
            .map(|(_, v)| v.parse())
            .transpose()?;
        let task = task_override.or(file_task).unwrap_or(TaskKind::Regression);

        let mut cfg = ExperimentConfig::defaults(task);
        if let Some(s) = env_seed.filter(|s| !s.trim().is_empty()) {
            cfg.seed = parse_num(SEED_ENV, s)?;
        }
        for (k, v) in file_pairs.iter().chain(overrides) {
            if k == "task" {
                continue;
            }
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let h = &mut self.hyper;
        match key.trim() {
            "task" => {
                let t: TaskKind = v.parse()?;
                if t != self.task {
                    return Err(Error::Config(
                        "task cannot change after defaults are chosen".into(),
                    ));
                }
            }
            "models" => self.models = parse_models(v)?,
            "seed" => self.seed = parse_num(key, v)?,
            "test_fraction" => self.test_fraction = parse_num(key, v)?,
            "cv_folds" => self.cv_folds = parse_num(key, v)?,
            "balancing" | "balance" => self.balancing = v.parse()?,
            "include_gender" => self.features.include_gender = parse_bool(key, v)?,
            "include_strategy_scores" => {
                self.features.include_strategy_scores = parse_bool(key, v)?
            }
            "standardize" => self.standardize = parse_bool(key, v)?,
            "record_timing" => self.record_timing = parse_bool(key, v)?,
            "data" | "data.csv" => {
                let strict = matches!(self.data, DataSource::Csv { strict: true, .. });
                self.data = DataSource::Csv {
                    path: PathBuf::from(v),
                    strict,
                };
            }
            "data.strict" => match &mut self.data {
                DataSource::Csv { strict, .. } => *strict = parse_bool(key, v)?,
                DataSource::Synthetic { .. } => {
                    return Err(Error::Config("data.strict needs a csv data source".into()))
                }
            },
            "synthetic.n" => {
                let n = parse_num(key, v)?;
                match &mut self.data {
                    DataSource::Synthetic { n: cur, .. } => *cur = n,
                    DataSource::Csv { .. } => self.data = DataSource::Synthetic { n, seed: None },
                }
            }
            "synthetic.seed" => {
                let s = parse_num(key, v)?;
                match &mut self.data {
                    DataSource::Synthetic { seed, .. } => *seed = Some(s),
                    DataSource::Csv { .. } => {
                        self.data = DataSource::Synthetic {
                            n: 924,
                            seed: Some(s),
                        }
                    }
                }
            }
            "at_risk.threshold" => self.at_risk_threshold = parse_num(key, v)?,
            "at_risk.model" => self.at_risk_model = v.parse()?,
            "rf.n_trees" => h.rf.n_trees = parse_num(key, v)?,
            "rf.max_depth" => h.rf.max_depth = parse_opt(key, v)?,
            "rf.min_split" => h.rf.min_split = parse_num(key, v)?,
            "rf.min_leaf" => h.rf.min_leaf = parse_num(key, v)?,
            "rf.max_features" => h.rf.n_features_per_split = parse_opt(key, v)?,
            "rf.bootstrap" => h.rf.bootstrap = parse_bool(key, v)?,
            "dt.max_depth" => h.dt.max_depth = parse_opt(key, v)?,
            "dt.min_split" => h.dt.min_split = parse_num(key, v)?,
            "dt.min_leaf" => h.dt.min_leaf = parse_num(key, v)?,
            "knn.k" => h.knn_k = parse_num(key, v)?,
            "lr.c" => h.logistic.c = parse_num(key, v)?,
            "lr.max_iters" => h.logistic.max_iters = parse_num(key, v)?,
            "lr.tol" => h.logistic.tol = parse_num(key, v)?,
            "svm.c" => h.svm.c = parse_num(key, v)?,
            "svm.kernel" => {
                h.svm.kernel = match v.to_ascii_lowercase().as_str() {
                    "linear" => KernelChoice::Linear,
                    "rbf" => KernelChoice::Rbf { gamma: None },
                    other => return Err(Error::Config(format!("unknown kernel `{other}`"))),
                }
            }
            "svm.gamma" => {
                let g = parse_opt(key, v)?;
                match &mut h.svm.kernel {
                    KernelChoice::Rbf { gamma } => *gamma = g,
                    KernelChoice::Linear => {
                        return Err(Error::Config("svm.gamma needs svm.kernel = rbf".into()))
                    }
                }
            }
            "svm.epsilon" => h.svm.epsilon = parse_num(key, v)?,
            "svm.tol" => h.svm.tol = parse_num(key, v)?,
            "svm.max_passes" => h.svm.max_passes = parse_num(key, v)?,
            other => return Err(Error::Config(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.models.is_empty() {
            return bad("at least one model is required");
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return bad("test_fraction must lie in (0, 1)");
        }
        if self.cv_folds < 2 {
            return bad("cv_folds must be at least 2");
        }
        if !(1.0..=7.0).contains(&self.at_risk_threshold) {
            return bad("at_risk.threshold must lie in [1, 7]");
        }
        if self.task == TaskKind::Regression && self.balancing != Balancing::None {
            return bad("balancing applies to classification only");
        }
        let h = &self.hyper;
        if h.knn_k == 0 {
            return bad("knn.k must be positive");
        }
        if h.rf.n_trees == 0 {
            return bad("rf.n_trees must be positive");
        }
        if !(h.logistic.c > 0.0) || !(h.svm.c > 0.0) {
            return bad("regularization constants must be positive");
        }
        if let DataSource::Synthetic { n, .. } = self.data {
            if n < 10 {
                return bad("synthetic.n must be at least 10");
            }
        }
        Ok(())
    }
}

/// `key = value` lines; `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Comma-separated model codes, duplicates dropped in first-seen order.
pub fn parse_models(s: &str) -> Result<Vec<Algorithm>> {
    let mut out: Vec<Algorithm> = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let a: Algorithm = part.parse()?;
        if !out.contains(&a) {
            out.push(a);
        }
    }
    Ok(out)
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid value `{v}` for `{key}`")))
}

fn parse_opt<T: FromStr>(key: &str, v: &str) -> Result<Option<T>> {
    match v.trim().to_ascii_lowercase().as_str() {
        "none" | "auto" | "" => Ok(None),
        _ => parse_num(key, v).map(Some),
    }
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!("invalid boolean `{v}` for `{key}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(p: &[(&str, &str)]) -> Vec<(String, String)> {
        p.iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn task_defaults() {
        let r = ExperimentConfig::defaults(TaskKind::Regression);
        assert_eq!(
            (r.test_fraction, r.cv_folds, r.balancing),
            (0.3, 10, Balancing::None)
        );
        assert!(r.features.include_strategy_scores);
        let c = ExperimentConfig::defaults(TaskKind::Classification);
        assert_eq!(
            (c.test_fraction, c.cv_folds, c.balancing),
            (0.2, 5, Balancing::PaperFaithful)
        );
        assert!(!c.features.include_strategy_scores);
        assert!(!c.features.include_gender);
    }

    #[test]
    fn seed_precedence() {
        let file = "seed = 7\n";
        let cli = pairs(&[("seed", "9")]);
        let b = |f: Option<&str>, o: &[(String, String)], e: Option<&str>| {
            ExperimentConfig::build(None, f, o, e).unwrap().seed
        };
        assert_eq!(b(None, &[], None), DEFAULT_SEED);
        assert_eq!(b(None, &[], Some("5")), 5);
        assert_eq!(b(Some(file), &[], Some("5")), 7);
        assert_eq!(b(Some(file), &cli, Some("5")), 9);
    }

    #[test]
    fn file_parsing() {
        let text = "# comment\ntask = classification\nmodels = rf, dt, RF\nknn.k = 3  # trailing\nsvm.gamma = 0.5\n";
        let cfg = ExperimentConfig::build(None, Some(text), &[], None).unwrap();
        assert_eq!(cfg.task, TaskKind::Classification);
        assert_eq!(
            cfg.models,
            vec![Algorithm::RandomForest, Algorithm::DecisionTree]
        );
        assert_eq!(cfg.hyper.knn_k, 3);
        assert_eq!(cfg.hyper.svm.kernel, KernelChoice::Rbf { gamma: Some(0.5) });
    }

    #[test]
    fn bad_inputs_are_config_errors() {
        for text in [
            "nonsense",
            "foo = 1",
            "seed = -1",
            "cv_folds = 1",
            "models = XGB",
            "test_fraction = 1.5",
        ] {
            let e = ExperimentConfig::build(None, Some(text), &[], None).unwrap_err();
            assert!(matches!(e, Error::Config(_)), "{text}: {e}");
        }
        let e = ExperimentConfig::build(
            Some(TaskKind::Regression),
            Some("balancing = leakage-safe"),
            &[],
            None,
        );
        assert!(e.is_err());
    }
}
