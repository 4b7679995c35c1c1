//! CART decision trees: Gini impurity for classification, variance for
//! regression, thresholds at midpoints between consecutive distinct values.

mod forest;

pub use forest::{mdi_importance, rf_fit, Forest, ForestParams};

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Splits must reduce impurity by more than this to be taken.
pub const MIN_GAIN: f64 = 1e-12;

/// Gains closer than this count as tied, so round-off cannot override the
/// lowest-feature, lowest-threshold preference.
const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Task {
    /// Targets are class indices `0..n_classes` stored as f64.
    Classify {
        n_classes: usize,
    },
    Regress,
}

impl Task {
    pub fn binary() -> Self {
        Task::Classify { n_classes: 2 }
    }

    pub fn is_classification(self) -> bool {
        matches!(self, Task::Classify { .. })
    }

    pub(crate) fn check_targets(self, y: &[f64]) -> Result<()> {
        if let Task::Classify { n_classes } = self {
            let bad = y
                .iter()
                .any(|&v| v < 0.0 || v.fract() != 0.0 || v as usize >= n_classes);
            if bad {
                return Err(Error::InvalidParameter(format!(
                    "class targets must be integers in 0..{n_classes}"
                )));
            }
        } else if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "non-finite regression target".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    /// Parent impurity minus the size-weighted child impurities.
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafValue {
    /// Per-class sample counts.
    Distribution(Vec<usize>),
    Mean(f64),
}

impl LeafValue {
    pub fn prediction(&self) -> f64 {
        match self {
            LeafValue::Distribution(counts) => argmax_lowest(counts) as f64,
            LeafValue::Mean(m) => *m,
        }
    }
}

/// Index of the largest count; ties go to the lowest index.
pub(crate) fn argmax_lowest(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Internal {
        feature_index: usize,
        threshold: f64,
        n_samples: usize,
        impurity: f64,
        gain: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        value: LeafValue,
        n_samples: usize,
        impurity: f64,
    },
}

impl TreeNode {
    /// Routes left iff `row[feature_index] <= threshold`.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { value, .. } => return value.prediction(),
                TreeNode::Internal {
                    feature_index,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    node = if row[*feature_index] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn n_samples(&self) -> usize {
        match self {
            TreeNode::Internal { n_samples, .. } | TreeNode::Leaf { n_samples, .. } => *n_samples,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Internal { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }

    /// Adds `(n_node / n_root) * gain` of every internal node to `acc[feature]`.
    pub(crate) fn accumulate_importance(&self, n_root: f64, acc: &mut [f64]) {
        if let TreeNode::Internal {
            feature_index,
            n_samples,
            gain,
            left,
            right,
            ..
        } = self
        {
            acc[*feature_index] += (*n_samples as f64 / n_root) * gain;
            left.accumulate_importance(n_root, acc);
            right.accumulate_importance(n_root, acc);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartParams {
    /// `None` grows until purity or the size limits stop it.
    pub max_depth: Option<usize>,
    pub min_split: usize,
    pub min_leaf: usize,
    /// Features drawn per split; `None` scans all of them.
    pub n_features_per_split: Option<usize>,
}

impl Default for CartParams {
    fn default() -> Self {
        CartParams {
            max_depth: None,
            min_split: 2,
            min_leaf: 1,
            n_features_per_split: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub root: TreeNode,
    pub task: Task,
    pub n_features: usize,
}

impl DecisionTree {
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        x.check_cols(self.n_features)?;
        Ok(x.iter_rows().map(|r| self.root.predict_row(r)).collect())
    }

    /// Normalized impurity-decrease importance of this single tree.
    pub fn importance(&self) -> Result<Vec<f64>> {
        let mut acc = vec![0.0; self.n_features];
        self.root
            .accumulate_importance(self.root.n_samples().max(1) as f64, &mut acc);
        normalize_importance(acc)
    }
}

pub(crate) fn normalize_importance(mut acc: Vec<f64>) -> Result<Vec<f64>> {
    let total: f64 = acc.iter().sum();
    if !(total > 0.0) {
        return Err(Error::DegenerateForest);
    }
    acc.iter_mut().for_each(|v| *v /= total);
    Ok(acc)
}

/// Impurity summary of a set of rows.
#[derive(Debug, Clone)]
enum NodeStats {
    Counts(Vec<usize>),
    /// Sum and sum of squares of targets shifted by `shift`.
    Moments {
        n: usize,
        sum: f64,
        sum_sq: f64,
    },
}

impl NodeStats {
    fn impurity(&self) -> f64 {
        match self {
            NodeStats::Counts(c) => gini(c),
            NodeStats::Moments { n, sum, sum_sq } => {
                if *n == 0 {
                    return 0.0;
                }
                let nf = *n as f64;
                let m = sum / nf;
                (sum_sq / nf - m * m).max(0.0)
            }
        }
    }
}

pub fn gini(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    1.0 - counts
        .iter()
        .map(|&c| {
            let p = c as f64 / nf;
            p * p
        })
        .sum::<f64>()
}

/// Population variance.
pub fn variance(y: &[f64]) -> f64 {
    if y.is_empty() {
        return 0.0;
    }
    let n = y.len() as f64;
    let m = y.iter().sum::<f64>() / n;
    y.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n
}

fn node_stats(y: &[f64], rows: &[usize], task: Task, shift: f64) -> NodeStats {
    match task {
        Task::Classify { n_classes } => {
            let mut c = vec![0; n_classes];
            for &i in rows {
                c[y[i] as usize] += 1;
            }
            NodeStats::Counts(c)
        }
        Task::Regress => {
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for &i in rows {
                let v = y[i] - shift;
                sum += v;
                sum_sq += v * v;
            }
            NodeStats::Moments {
                n: rows.len(),
                sum,
                sum_sq,
            }
        }
    }
}

/// Exhaustive best split over `candidate_features` using every row of `x`.
pub fn best_split(
    x: &Matrix,
    y: &[f64],
    candidate_features: &[usize],
    task: Task,
    min_leaf: usize,
) -> Option<Split> {
    let rows: Vec<usize> = (0..x.rows()).collect();
    best_split_rows(x, y, &rows, candidate_features, task, min_leaf)
}

/// Scans midpoints between consecutive distinct sorted values of each
/// candidate feature. Ties in gain resolve to the lowest feature index, then
/// the lowest threshold.
pub(crate) fn best_split_rows(
    x: &Matrix,
    y: &[f64],
    rows: &[usize],
    candidate_features: &[usize],
    task: Task,
    min_leaf: usize,
) -> Option<Split> {
    let n = rows.len();
    let min_leaf = min_leaf.max(1);
    if n < 2 * min_leaf {
        return None;
    }
    let shift = match task {
        Task::Regress => rows.iter().map(|&i| y[i]).sum::<f64>() / n as f64,
        Task::Classify { .. } => 0.0,
    };
    let parent = node_stats(y, rows, task, shift);
    let parent_imp = parent.impurity();
    let nf = n as f64;

    let mut features = candidate_features.to_vec();
    features.sort_unstable();
    features.dedup();

    let mut best: Option<Split> = None;
    let mut order = rows.to_vec();
    for &f in &features {
        order.sort_by(|&a, &b| x.get(a, f).total_cmp(&x.get(b, f)));
        let mut left = match &parent {
            NodeStats::Counts(c) => NodeStats::Counts(vec![0; c.len()]),
            NodeStats::Moments { .. } => NodeStats::Moments {
                n: 0,
                sum: 0.0,
                sum_sq: 0.0,
            },
        };
        for k in 0..n - 1 {
            let i = order[k];
            match (&mut left, &parent) {
                (NodeStats::Counts(c), _) => c[y[i] as usize] += 1,
                (NodeStats::Moments { n, sum, sum_sq }, _) => {
                    let v = y[i] - shift;
                    *n += 1;
                    *sum += v;
                    *sum_sq += v * v;
                }
            }
            let n_left = k + 1;
            let n_right = n - n_left;
            if n_left < min_leaf || n_right < min_leaf {
                continue;
            }
            let lo = x.get(i, f);
            let hi = x.get(order[k + 1], f);
            if !(lo < hi) {
                continue;
            }
            let right = match (&left, &parent) {
                (NodeStats::Counts(l), NodeStats::Counts(p)) => {
                    NodeStats::Counts(p.iter().zip(l).map(|(a, b)| a - b).collect())
                }
                (
                    NodeStats::Moments {
                        n: ln,
                        sum: ls,
                        sum_sq: lq,
                    },
                    NodeStats::Moments {
                        n: pn,
                        sum: ps,
                        sum_sq: pq,
                    },
                ) => NodeStats::Moments {
                    n: pn - ln,
                    sum: ps - ls,
                    sum_sq: pq - lq,
                },
                _ => unreachable!(),
            };
            let gain = parent_imp
                - (n_left as f64 / nf) * left.impurity()
                - (n_right as f64 / nf) * right.impurity();
            if gain > MIN_GAIN && best.is_none_or(|b| gain > b.gain + TIE_EPS) {
                let mut threshold = 0.5 * (lo + hi);
                if !(threshold < hi) {
                    threshold = lo;
                }
                best = Some(Split {
                    feature: f,
                    threshold,
                    gain,
                });
            }
        }
    }
    best
}

pub fn cart_fit(
    x: &Matrix,
    y: &[f64],
    task: Task,
    params: CartParams,
    seed: u64,
) -> Result<DecisionTree> {
    let mut rng = crate::seed::rng(seed);
    let rows: Vec<usize> = (0..x.rows()).collect();
    cart_fit_rows(x, y, rows, task, params, &mut rng)
}

pub(crate) fn cart_fit_rows<R: Rng>(
    x: &Matrix,
    y: &[f64],
    rows: Vec<usize>,
    task: Task,
    params: CartParams,
    rng: &mut R,
) -> Result<DecisionTree> {
    if y.len() != x.rows() {
        return Err(Error::LengthMismatch {
            left: x.rows(),
            right: y.len(),
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    task.check_targets(y)?;
    let mut grower = Grower {
        x,
        y,
        task,
        params,
        rng,
    };
    let root = grower.grow(rows, 0);
    Ok(DecisionTree {
        root,
        task,
        n_features: x.cols(),
    })
}

struct Grower<'a, R> {
    x: &'a Matrix,
    y: &'a [f64],
    task: Task,
    params: CartParams,
    rng: &'a mut R,
}

impl<R: Rng> Grower<'_, R> {
    fn leaf(&self, rows: &[usize], impurity: f64) -> TreeNode {
        let value = match node_stats(self.y, rows, self.task, 0.0) {
            NodeStats::Counts(c) => LeafValue::Distribution(c),
            NodeStats::Moments { n, sum, .. } => LeafValue::Mean(sum / n as f64),
        };
        TreeNode::Leaf {
            value,
            n_samples: rows.len(),
            impurity,
        }
    }

    fn candidates(&mut self) -> Vec<usize> {
        let p = self.x.cols();
        match self.params.n_features_per_split {
            Some(m) if m < p => {
                let mut v = sample(self.rng, p, m.max(1)).into_vec();
                v.sort_unstable();
                v
            }
            _ => (0..p).collect(),
        }
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> TreeNode {
        let n = rows.len();
        let shift = match self.task {
            Task::Regress => rows.iter().map(|&i| self.y[i]).sum::<f64>() / n as f64,
            Task::Classify { .. } => 0.0,
        };
        let impurity = node_stats(self.y, &rows, self.task, shift).impurity();
        let min_leaf = self.params.min_leaf.max(1);
        let stop = impurity <= 0.0
            || n < self.params.min_split.max(2)
            || n < 2 * min_leaf
            || self.params.max_depth.is_some_and(|d| depth >= d);
        if stop {
            return self.leaf(&rows, impurity);
        }
        let features = self.candidates();
        let Some(split) = best_split_rows(self.x, self.y, &rows, &features, self.task, min_leaf)
        else {
            return self.leaf(&rows, impurity);
        };
        let (left, right): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&i| self.x.get(i, split.feature) <= split.threshold);
        let left = self.grow(left, depth + 1);
        let right = self.grow(right, depth + 1);
        TreeNode::Internal {
            feature_index: split.feature,
            threshold: split.threshold,
            n_samples: n,
            impurity,
            gain: split.gain,
            left: Box::new(left),
            right: Box::new(right),
        }
    }
}
