use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{AtRiskFlag, ExperimentConfig, TaskKind};
use crate::data::ClassCounts;
use crate::error::{Error, Result};
use crate::eval::{ClassificationMetrics, CvResult, RegressionMetrics};
use crate::model::{Algorithm, TrainedModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSummary {
    pub source: String,
    pub n_records: usize,
    /// Size of the oversampled pool when balancing happened before the split.
    pub balanced_pool: Option<usize>,
    pub n_train: usize,
    pub n_test: usize,
    pub class_counts: Option<ClassCounts>,
    pub train_class_counts: Option<ClassCounts>,
    pub test_class_counts: Option<ClassCounts>,
    pub features: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestMetrics {
    Regression(RegressionMetrics),
    Classification(ClassificationMetrics),
}

impl TestMetrics {
    /// MAE for regression, accuracy for classification.
    pub fn headline(&self) -> f64 {
        match self {
            TestMetrics::Regression(m) => m.mae,
            TestMetrics::Classification(m) => m.accuracy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub model: Algorithm,
    pub cv: CvResult,
    pub test: TestMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceEntry {
    pub feature: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub task: TaskKind,
    pub seed: u64,
    pub n_train: usize,
    pub importance: Vec<ImportanceEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtRiskSection {
    pub model: Algorithm,
    pub threshold: f64,
    /// Dataset rows of the test set, parallel to `test_predictions`.
    pub test_indices: Vec<usize>,
    pub test_predictions: Vec<f64>,
    /// Indices refer to dataset rows.
    pub flags: Vec<AtRiskFlag>,
    pub trained_model: TrainedModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub toolkit: String,
    pub config: ExperimentConfig,
    pub data: DataSummary,
    pub models: Vec<ModelReport>,
    pub importance: Option<Vec<ImportanceEntry>>,
    pub at_risk: Option<AtRiskSection>,
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

impl ExperimentReport {
    pub fn model(&self, a: Algorithm) -> Option<&ModelReport> {
        self.models.iter().find(|m| m.model == a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::Config(format!("unknown format `{other}`"))),
        }
    }
}

pub fn render_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

const METRIC_ROWS: [&str; 8] = [
    "accuracy",
    "precision",
    "recall",
    "f1",
    "tp",
    "fp",
    "tn",
    "fn",
];

/// Plot-ready tables as `(file name, contents)` pairs.
pub fn render_csv_tables(r: &ExperimentReport) -> Vec<(String, String)> {
    let mut out = Vec::new();
    match r.config.task {
        TaskKind::Regression => {
            let mut t = String::from("model,mae\n");
            for m in &r.models {
                let _ = writeln!(t, "{},{}", m.model, m.test.headline());
            }
            out.push(("table3.csv".to_string(), t));
        }
        TaskKind::Classification => {
            let mut t = String::from("metric");
            for m in &r.models {
                let _ = write!(t, ",{}", m.model);
            }
            t.push('\n');
            for row in METRIC_ROWS {
                t.push_str(row);
                for m in &r.models {
                    let cell = match &m.test {
                        TestMetrics::Classification(c) => match row {
                            "accuracy" => c.accuracy.to_string(),
                            "precision" => c.macro_precision.to_string(),
                            "recall" => c.macro_recall.to_string(),
                            "f1" => c.macro_f1.to_string(),
                            "tp" => c.counts.tp.to_string(),
                            "fp" => c.counts.fp.to_string(),
                            "tn" => c.counts.tn.to_string(),
                            _ => c.counts.fn_.to_string(),
                        },
                        TestMetrics::Regression(_) => String::new(),
                    };
                    let _ = write!(t, ",{cell}");
                }
                t.push('\n');
            }
            out.push(("table4.csv".to_string(), t));
        }
    }
    if let Some(imp) = &r.importance {
        out.push(("importance.csv".to_string(), importance_csv(imp)));
    }
    if let Some(a) = &r.at_risk {
        let mut t = String::from("index,predicted_grade,threshold\n");
        for f in &a.flags {
            let _ = writeln!(t, "{},{},{}", f.index, f.predicted_grade, f.threshold);
        }
        out.push(("at_risk.csv".to_string(), t));
    }
    out
}

pub fn importance_csv(entries: &[ImportanceEntry]) -> String {
    let mut t = String::from("feature,value\n");
    for e in entries {
        let _ = writeln!(t, "{},{}", e.feature, e.value);
    }
    t
}

/// Writes `report.json` or the CSV tables into `dir`, returning the paths.
pub fn emit_report(r: &ExperimentReport, format: OutputFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let files = match format {
        OutputFormat::Json => vec![("report.json".to_string(), render_json(r)?)],
        OutputFormat::Csv => render_csv_tables(r),
    };
    let mut written = Vec::with_capacity(files.len());
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}
