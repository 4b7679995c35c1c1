use serde::{Deserialize, Serialize};

use super::{Dataset, Feature};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSummary {
    pub feature: String,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

const NUMERIC: [Feature; 10] = [
    Feature::Intrinsic,
    Feature::Extrinsic,
    Feature::Autonomy,
    Feature::Relatedness,
    Feature::Competence,
    Feature::SelfEsteem,
    Feature::DeepStrategy,
    Feature::SurfaceStrategy,
    Feature::StudyYear,
    Feature::Age,
];

/// Mean, sd, min and max for every numeric column, performance last.
pub fn summary_statistics(d: &Dataset) -> Result<Vec<FeatureSummary>> {
    let n = d.len();
    if n < 2 {
        return Err(Error::InsufficientData { n, needed: 2 });
    }
    let mut out: Vec<FeatureSummary> = NUMERIC
        .iter()
        .map(|&f| {
            let col: Vec<f64> = d.records.iter().map(|r| r.feature(f)).collect();
            summarize(f.name(), &col)
        })
        .collect();
    out.push(summarize("performance", &d.performance()));
    Ok(out)
}

fn summarize(name: &str, col: &[f64]) -> FeatureSummary {
    let n = col.len() as f64;
    let mean = col.iter().sum::<f64>() / n;
    let ss: f64 = col.iter().map(|v| (v - mean).powi(2)).sum();
    FeatureSummary {
        feature: name.to_string(),
        mean,
        sd: (ss / (n - 1.0)).sqrt(),
        min: col.iter().copied().fold(f64::INFINITY, f64::min),
        max: col.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::test_support::record;

    #[test]
    fn two_ages() {
        let mut a = record(4.0, 3.0);
        let mut b = a;
        a.age = 20;
        b.age = 30;
        let s = summary_statistics(&Dataset::new(vec![a, b])).unwrap();
        let age = s.iter().find(|s| s.feature == "age").unwrap();
        assert_eq!(age.mean, 25.0);
        assert!((age.sd - 50f64.sqrt()).abs() < 1e-12);
        assert!((age.sd - 7.0711).abs() < 1e-4);
        assert_eq!((age.min, age.max), (20.0, 30.0));
    }

    #[test]
    fn identical_rows_have_zero_sd() {
        let r = record(4.0, 3.0);
        let s = summary_statistics(&Dataset::new(vec![r; 5])).unwrap();
        for f in &s {
            assert_eq!(f.sd, 0.0);
            assert_eq!(f.min, f.max);
            assert!((f.mean - f.min).abs() < 1e-12);
        }
        assert_eq!(s.len(), 11);
    }

    #[test]
    fn needs_two_rows() {
        let d = Dataset::new(vec![record(4.0, 3.0)]);
        assert!(matches!(
            summary_statistics(&d),
            Err(Error::InsufficientData { n: 1, needed: 2 })
        ));
    }
}
