//! Student records and the dataset-level operations: labelling, splitting,
//! class balancing and design-matrix extraction.

mod io;
mod stats;
mod synth;

pub use io::{load_csv, read_csv, write_csv, write_csv_to, Validation, CSV_COLUMNS};
pub use stats::{summary_statistics, FeatureSummary};
pub use synth::{synthesize_dataset, synthesize_with, MarginalSpec, SynthConfig};

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::seed;

pub const SCHEMA_VERSION: &str = "motivscore-students/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gender {
    #[serde(rename = "F")]
    Female,
    #[serde(rename = "M")]
    Male,
}

impl Gender {
    /// Single 0/1 indicator: female = 0, male = 1.
    pub fn indicator(self) -> f64 {
        match self {
            Gender::Female => 0.0,
            Gender::Male => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudentRecord {
    pub intrinsic: f64,
    pub extrinsic: f64,
    pub autonomy: f64,
    pub relatedness: f64,
    pub competence: f64,
    pub self_esteem: f64,
    pub deep_strategy: f64,
    pub surface_strategy: f64,
    pub study_year: u8,
    pub age: u8,
    pub gender: Gender,
    /// Concurrent grade on the 1 to 7 scale.
    pub performance: f64,
}

impl StudentRecord {
    /// Deep when the deep score is at least the surface score.
    pub fn strategy_label(&self) -> StrategyLabel {
        if self.deep_strategy >= self.surface_strategy {
            StrategyLabel::Deep
        } else {
            StrategyLabel::Surface
        }
    }

    pub fn feature(&self, f: Feature) -> f64 {
        match f {
            Feature::Intrinsic => self.intrinsic,
            Feature::Extrinsic => self.extrinsic,
            Feature::Autonomy => self.autonomy,
            Feature::Relatedness => self.relatedness,
            Feature::Competence => self.competence,
            Feature::SelfEsteem => self.self_esteem,
            Feature::DeepStrategy => self.deep_strategy,
            Feature::SurfaceStrategy => self.surface_strategy,
            Feature::StudyYear => f64::from(self.study_year),
            Feature::Age => f64::from(self.age),
            Feature::Gender => self.gender.indicator(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StrategyLabel {
    Deep,
    Surface,
}

impl StrategyLabel {
    /// Class index used by the learners: Surface = 0, Deep = 1 (the positive class).
    pub fn class_index(self) -> usize {
        match self {
            StrategyLabel::Surface => 0,
            StrategyLabel::Deep => 1,
        }
    }

    pub fn from_class_index(i: usize) -> Self {
        if i == 1 {
            StrategyLabel::Deep
        } else {
            StrategyLabel::Surface
        }
    }
}

impl fmt::Display for StrategyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyLabel::Deep => write!(f, "Deep"),
            StrategyLabel::Surface => write!(f, "Surface"),
        }
    }
}

/// Model input columns, in the canonical order used to build design matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Feature {
    Intrinsic,
    Extrinsic,
    Autonomy,
    Relatedness,
    Competence,
    SelfEsteem,
    DeepStrategy,
    SurfaceStrategy,
    StudyYear,
    Age,
    Gender,
}

impl Feature {
    pub fn name(self) -> &'static str {
        match self {
            Feature::Intrinsic => "intrinsic",
            Feature::Extrinsic => "extrinsic",
            Feature::Autonomy => "autonomy",
            Feature::Relatedness => "relatedness",
            Feature::Competence => "competence",
            Feature::SelfEsteem => "self_esteem",
            Feature::DeepStrategy => "deep_strategy",
            Feature::SurfaceStrategy => "surface_strategy",
            Feature::StudyYear => "study_year",
            Feature::Age => "age",
            Feature::Gender => "gender",
        }
    }
}

/// Which optional columns enter the design matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSet {
    pub include_gender: bool,
    pub include_strategy_scores: bool,
}

impl FeatureSet {
    pub fn features(&self) -> Vec<Feature> {
        let mut out = vec![
            Feature::Intrinsic,
            Feature::Extrinsic,
            Feature::Autonomy,
            Feature::Relatedness,
            Feature::Competence,
            Feature::SelfEsteem,
        ];
        if self.include_strategy_scores {
            out.push(Feature::DeepStrategy);
            out.push(Feature::SurfaceStrategy);
        }
        out.push(Feature::StudyYear);
        out.push(Feature::Age);
        if self.include_gender {
            out.push(Feature::Gender);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub records: Vec<StudentRecord>,
    pub labels: Option<Vec<StrategyLabel>>,
    pub schema_version: String,
}

impl Dataset {
    pub fn new(records: Vec<StudentRecord>) -> Self {
        Dataset {
            records,
            labels: None,
            schema_version: SCHEMA_VERSION.to_string(),
        }
    }

    pub fn with_labels(records: Vec<StudentRecord>, labels: Vec<StrategyLabel>) -> Result<Self> {
        if labels.len() != records.len() {
            return Err(Error::LengthMismatch {
                left: records.len(),
                right: labels.len(),
            });
        }
        Ok(Dataset {
            records,
            labels: Some(labels),
            schema_version: SCHEMA_VERSION.to_string(),
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn labels(&self) -> Result<&[StrategyLabel]> {
        self.labels.as_deref().ok_or(Error::MissingLabels)
    }

    /// Rows at `idx`, with labels carried along when present.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            records: idx.iter().map(|&i| self.records[i]).collect(),
            labels: self
                .labels
                .as_ref()
                .map(|l| idx.iter().map(|&i| l[i]).collect()),
            schema_version: self.schema_version.clone(),
        }
    }

    pub fn design_matrix(&self, features: &[Feature]) -> Matrix {
        let mut m = Matrix::zeros(self.len(), features.len());
        for (i, r) in self.records.iter().enumerate() {
            for (j, &f) in features.iter().enumerate() {
                m.set(i, j, r.feature(f));
            }
        }
        m
    }

    pub fn performance(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.performance).collect()
    }

    /// Labels as class indices (Surface = 0, Deep = 1) in f64 form.
    pub fn class_targets(&self) -> Result<Vec<f64>> {
        Ok(self
            .labels()?
            .iter()
            .map(|l| l.class_index() as f64)
            .collect())
    }
}

pub fn derive_strategy_labels(d: &Dataset) -> Dataset {
    let labels = d
        .records
        .iter()
        .map(StudentRecord::strategy_label)
        .collect();
    Dataset {
        records: d.records.clone(),
        labels: Some(labels),
        schema_version: d.schema_version.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClassCounts {
    pub deep: usize,
    pub surface: usize,
}

impl ClassCounts {
    pub fn total(&self) -> usize {
        self.deep + self.surface
    }

    pub fn get(&self, l: StrategyLabel) -> usize {
        match l {
            StrategyLabel::Deep => self.deep,
            StrategyLabel::Surface => self.surface,
        }
    }
}

pub fn class_counts(d: &Dataset) -> Result<ClassCounts> {
    let mut c = ClassCounts::default();
    if d.is_empty() {
        return Ok(c);
    }
    for l in d.labels()? {
        match l {
            StrategyLabel::Deep => c.deep += 1,
            StrategyLabel::Surface => c.surface += 1,
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Balancing {
    #[default]
    None,
    PaperFaithful,
    LeakageSafe,
}

impl Balancing {
    pub fn as_str(self) -> &'static str {
        match self {
            Balancing::None => "none",
            Balancing::PaperFaithful => "paper-faithful",
            Balancing::LeakageSafe => "leakage-safe",
        }
    }
}

impl std::str::FromStr for Balancing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "none" => Ok(Balancing::None),
            "paper-faithful" | "paperfaithful" => Ok(Balancing::PaperFaithful),
            "leakage-safe" | "leakagesafe" => Ok(Balancing::LeakageSafe),
            other => Err(Error::Config(format!("unknown balancing mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataSplit {
    pub train: Dataset,
    pub test: Dataset,
    /// Positions of the train/test rows in the input dataset, ascending.
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub seed: u64,
    pub test_fraction: f64,
    pub balancing: Balancing,
}

/// `ceil(n * fraction)`, robust to products that land a hair above an integer.
pub fn test_size(n: usize, fraction: f64) -> usize {
    let x = n as f64 * fraction;
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r as usize
    } else {
        x.ceil() as usize
    }
}

pub fn train_test_split(d: &Dataset, test_fraction: f64, seed: u64) -> Result<DataSplit> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidFraction(test_fraction));
    }
    let n = d.len();
    let n_test = test_size(n, test_fraction);
    if n < 2 || n_test == 0 || n_test >= n {
        return Err(Error::DegenerateSplit { n, test_fraction });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut seed::rng(seed));
    let mut test_indices = perm[..n_test].to_vec();
    let mut train_indices = perm[n_test..].to_vec();
    test_indices.sort_unstable();
    train_indices.sort_unstable();
    Ok(DataSplit {
        train: d.subset(&train_indices),
        test: d.subset(&test_indices),
        train_indices,
        test_indices,
        seed,
        test_fraction,
        balancing: Balancing::None,
    })
}

/// Duplicates uniformly drawn minority rows until both classes have the
/// majority count. Input rows keep their order; copies are appended.
pub fn random_oversample(d: &Dataset, seed: u64) -> Result<Dataset> {
    let labels = d.labels()?;
    let counts = class_counts(d)?;
    if counts.deep == 0 || counts.surface == 0 {
        return Err(Error::SingleClass);
    }
    let minority = if counts.surface < counts.deep {
        StrategyLabel::Surface
    } else {
        StrategyLabel::Deep
    };
    let deficit = counts.deep.abs_diff(counts.surface);
    let pool: Vec<usize> = labels
        .iter()
        .enumerate()
        .filter(|(_, &l)| l == minority)
        .map(|(i, _)| i)
        .collect();

    let mut out = d.clone();
    let mut rng = seed::rng(seed);
    let out_labels = out.labels.as_mut().expect("labels checked above");
    for _ in 0..deficit {
        let i = pool[rng.random_range(0..pool.len())];
        out.records.push(d.records[i]);
        out_labels.push(minority);
    }
    Ok(out)
}
