//! Synthetic cohort generator used when the published dataset is not at hand.
//!
//! Each scale score and demographic column is drawn independently from a
//! Gaussian truncated to the published [min, max] envelope. The parent
//! Gaussian's location and scale are solved for so that the *truncated*
//! distribution reproduces the published mean and sd; naive truncation of a
//! Gaussian with the published moments shifts the mean of columns whose
//! ceiling sits close to the mean (autonomy: about 1.4 sd).
//!
//! Draws are stratified: each column takes one uniform from each of the `n`
//! equal-width strata of (0, 1), shuffles them independently of the other
//! columns and maps them through the inverse CDF. Columns stay independent,
//! while sample moments sit far closer to their targets than plain Monte
//! Carlo draws at cohort sizes in the hundreds.
//!
//! The grade is a clipped linear function of the standardized columns plus
//! Gaussian noise, with the coefficient vector fixed in [`SynthConfig`].
//! The correlation structure is otherwise independent and does not mirror the
//! real cohort's covariance.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use super::{Dataset, Feature, Gender, StudentRecord};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginalSpec {
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

impl MarginalSpec {
    const fn new(mean: f64, sd: f64, min: f64, max: f64) -> Self {
        MarginalSpec { mean, sd, min, max }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub intrinsic: MarginalSpec,
    pub extrinsic: MarginalSpec,
    pub autonomy: MarginalSpec,
    pub relatedness: MarginalSpec,
    pub competence: MarginalSpec,
    /// Published sd is 0.17, which cannot be reconciled with its 1.75..7.00
    /// range; `self_esteem_sd_override` replaces it when set.
    pub self_esteem: MarginalSpec,
    pub self_esteem_sd_override: Option<f64>,
    pub deep_strategy: MarginalSpec,
    pub surface_strategy: MarginalSpec,
    pub study_year: MarginalSpec,
    pub age: MarginalSpec,
    pub performance: MarginalSpec,
    pub female_fraction: f64,
    /// Grade coefficients on standardized columns.
    pub performance_coefficients: Vec<(Feature, f64)>,
    /// Decimal places kept for scale scores and grades.
    pub decimals: i32,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            intrinsic: MarginalSpec::new(4.98, 0.61, 2.17, 6.58),
            extrinsic: MarginalSpec::new(5.25, 0.75, 2.42, 7.00),
            autonomy: MarginalSpec::new(5.01, 0.89, 2.00, 6.25),
            relatedness: MarginalSpec::new(4.46, 0.90, 1.50, 6.25),
            competence: MarginalSpec::new(4.77, 0.84, 2.25, 6.25),
            self_esteem: MarginalSpec::new(4.17, 0.17, 1.75, 7.00),
            self_esteem_sd_override: Some(0.85),
            deep_strategy: MarginalSpec::new(4.11, 0.72, 2.00, 6.25),
            surface_strategy: MarginalSpec::new(3.32, 0.79, 1.50, 6.25),
            study_year: MarginalSpec::new(3.24, 1.48, 1.0, 6.0),
            age: MarginalSpec::new(22.83, 3.36, 18.0, 44.0),
            performance: MarginalSpec::new(4.72, 0.54, 2.92, 6.40),
            female_fraction: 0.6,
            performance_coefficients: vec![
                (Feature::StudyYear, 0.25),
                (Feature::Intrinsic, 0.20),
                (Feature::Extrinsic, 0.15),
                (Feature::DeepStrategy, 0.06),
                (Feature::Competence, 0.05),
                (Feature::Autonomy, 0.04),
                (Feature::Relatedness, 0.04),
                (Feature::SelfEsteem, 0.03),
                (Feature::Age, 0.03),
                (Feature::SurfaceStrategy, 0.02),
            ],
            decimals: 2,
        }
    }
}

impl SynthConfig {
    pub fn effective_self_esteem(&self) -> MarginalSpec {
        let mut m = self.self_esteem;
        if let Some(sd) = self.self_esteem_sd_override {
            m.sd = sd;
        }
        m
    }

    fn marginal(&self, f: Feature) -> Option<MarginalSpec> {
        Some(match f {
            Feature::Intrinsic => self.intrinsic,
            Feature::Extrinsic => self.extrinsic,
            Feature::Autonomy => self.autonomy,
            Feature::Relatedness => self.relatedness,
            Feature::Competence => self.competence,
            Feature::SelfEsteem => self.effective_self_esteem(),
            Feature::DeepStrategy => self.deep_strategy,
            Feature::SurfaceStrategy => self.surface_strategy,
            Feature::StudyYear => self.study_year,
            Feature::Age => self.age,
            Feature::Gender => return None,
        })
    }
}

pub fn synthesize_dataset(n: usize, seed: u64) -> Dataset {
    synthesize_with(n, seed, &SynthConfig::default())
}

pub fn synthesize_with(n: usize, seed: u64, cfg: &SynthConfig) -> Dataset {
    let scores = [
        cfg.intrinsic,
        cfg.extrinsic,
        cfg.autonomy,
        cfg.relatedness,
        cfg.competence,
        cfg.effective_self_esteem(),
        cfg.deep_strategy,
        cfg.surface_strategy,
    ]
    .map(ContinuousSampler::new);
    let year = DiscreteSampler::new(cfg.study_year);
    let age = DiscreteSampler::new(cfg.age);

    let signal_var: f64 = cfg
        .performance_coefficients
        .iter()
        .map(|(_, b)| b * b)
        .sum();
    let noise_sd = (cfg.performance.sd.powi(2) - signal_var).max(0.01).sqrt();
    let scale = 10f64.powi(cfg.decimals);
    let round = |v: f64| (v * scale).round() / scale;

    let mut rng = seed::rng(seed);
    let score_cols: Vec<Vec<f64>> = scores
        .iter()
        .map(|c| {
            stratified_uniforms(n, &mut rng)
                .into_iter()
                .map(|u| round(c.quantile(u)).clamp(c.spec.min, c.spec.max))
                .collect()
        })
        .collect();
    let years: Vec<i64> = stratified_uniforms(n, &mut rng)
        .into_iter()
        .map(|u| year.quantile(u))
        .collect();
    let ages: Vec<i64> = stratified_uniforms(n, &mut rng)
        .into_iter()
        .map(|u| age.quantile(u))
        .collect();
    let mut records = Vec::with_capacity(n);
    for row in 0..n {
        let s: [f64; 8] = std::array::from_fn(|i| score_cols[i][row]);
        let study_year = years[row] as u8;
        let age = ages[row] as u8;
        let gender = if rng.random::<f64>() < cfg.female_fraction {
            Gender::Female
        } else {
            Gender::Male
        };
        let mut r = StudentRecord {
            intrinsic: s[0],
            extrinsic: s[1],
            autonomy: s[2],
            relatedness: s[3],
            competence: s[4],
            self_esteem: s[5],
            deep_strategy: s[6],
            surface_strategy: s[7],
            study_year,
            age,
            gender,
            performance: 0.0,
        };
        let signal: f64 = cfg
            .performance_coefficients
            .iter()
            .filter_map(|&(f, b)| {
                let m = cfg.marginal(f)?;
                Some(b * (r.feature(f) - m.mean) / m.sd)
            })
            .sum();
        let noise: f64 = StandardNormal.sample(&mut rng);
        let p = cfg.performance;
        r.performance = round(p.mean + signal + noise_sd * noise).clamp(p.min, p.max);
        records.push(r);
    }
    Dataset::new(records)
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn std_normal_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

/// One uniform from each of the `n` strata of (0, 1), in random order.
fn stratified_uniforms<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut u: Vec<f64> = (0..n)
        .map(|k| (k as f64 + rng.random::<f64>()) / n as f64)
        .collect();
    u.shuffle(rng);
    u
}

fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Mean and sd of N(mu, sigma) truncated to [lo, hi].
fn truncated_moments(mu: f64, sigma: f64, lo: f64, hi: f64) -> (f64, f64) {
    let a = (lo - mu) / sigma;
    let b = (hi - mu) / sigma;
    let z = std_normal_cdf(b) - std_normal_cdf(a);
    if z < 1e-300 {
        return (mu.clamp(lo, hi), 0.0);
    }
    let (pa, pb) = (std_normal_pdf(a), std_normal_pdf(b));
    let r = (pa - pb) / z;
    let mean = mu + sigma * r;
    let var = sigma * sigma * (1.0 + (a * pa - b * pb) / z - r * r);
    (mean, var.max(0.0).sqrt())
}

/// Probabilities of the integers lo..=hi when N(mu, sigma) is rounded.
fn rounded_probabilities(mu: f64, sigma: f64, lo: i64, hi: i64) -> Vec<f64> {
    let mut p: Vec<f64> = (lo..=hi)
        .map(|k| {
            std_normal_cdf((k as f64 + 0.5 - mu) / sigma)
                - std_normal_cdf((k as f64 - 0.5 - mu) / sigma)
        })
        .collect();
    let total: f64 = p.iter().sum();
    if total > 0.0 {
        p.iter_mut().for_each(|v| *v /= total);
    }
    p
}

/// Fixed-point moment matching: shift the parent location by the mean error
/// and rescale the parent sd by the sd ratio until both agree.
fn fit_parent(target: MarginalSpec, moments: impl Fn(f64, f64) -> (f64, f64)) -> (f64, f64) {
    let (mut mu, mut sigma) = (target.mean, target.sd.max(1e-6));
    for _ in 0..500 {
        let (m, s) = moments(mu, sigma);
        if s <= 0.0 {
            break;
        }
        let dm = target.mean - m;
        let ratio = target.sd / s;
        mu += dm;
        sigma = (sigma * ratio).clamp(1e-6, 1e3);
        if dm.abs() < 1e-10 && (ratio - 1.0).abs() < 1e-10 {
            break;
        }
    }
    (mu, sigma)
}

struct ContinuousSampler {
    spec: MarginalSpec,
    mu: f64,
    sigma: f64,
}

impl ContinuousSampler {
    fn new(spec: MarginalSpec) -> Self {
        let (mu, sigma) = fit_parent(spec, |m, s| truncated_moments(m, s, spec.min, spec.max));
        ContinuousSampler { spec, mu, sigma }
    }

    /// Inverse CDF of the truncated parent at `u` in (0, 1).
    fn quantile(&self, u: f64) -> f64 {
        let lo = std_normal_cdf((self.spec.min - self.mu) / self.sigma);
        let hi = std_normal_cdf((self.spec.max - self.mu) / self.sigma);
        let p = (lo + u * (hi - lo)).clamp(1e-300, 1.0 - 1e-16);
        let v = self.mu + self.sigma * std_normal_quantile(p);
        v.clamp(self.spec.min, self.spec.max)
    }
}

struct DiscreteSampler {
    lo: i64,
    cumulative: Vec<f64>,
}

impl DiscreteSampler {
    fn new(spec: MarginalSpec) -> Self {
        let (lo, hi) = (spec.min.round() as i64, spec.max.round() as i64);
        let (mu, sigma) = fit_parent(spec, |m, s| {
            let p = rounded_probabilities(m, s, lo, hi);
            let mean: f64 = p.iter().zip(lo..).map(|(p, k)| p * k as f64).sum();
            let var: f64 = p
                .iter()
                .zip(lo..)
                .map(|(p, k)| p * (k as f64 - mean).powi(2))
                .sum();
            (mean, var.sqrt())
        });
        let mut acc = 0.0;
        let cumulative = rounded_probabilities(mu, sigma, lo, hi)
            .into_iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        DiscreteSampler { lo, cumulative }
    }

    fn quantile(&self, u: f64) -> i64 {
        let k = self
            .cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.cumulative.len() - 1);
        self.lo + k as i64
    }
}
