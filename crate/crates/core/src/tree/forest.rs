use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{argmax_lowest, cart_fit_rows, normalize_importance, CartParams, Task, TreeNode};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_split: usize,
    pub min_leaf: usize,
    /// `None` means ceil(sqrt(p)) for classification and p for regression.
    pub n_features_per_split: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: None,
            min_split: 2,
            min_leaf: 1,
            n_features_per_split: None,
            bootstrap: true,
        }
    }
}

impl ForestParams {
    pub fn features_per_split(&self, task: Task, p: usize) -> usize {
        let m = self.n_features_per_split.unwrap_or(match task {
            Task::Classify { .. } => (p as f64).sqrt().ceil() as usize,
            Task::Regress => p,
        });
        m.clamp(1, p.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<TreeNode>,
    pub per_tree_seeds: Vec<u64>,
    pub n_features_per_split: usize,
    /// Rows left out of each tree's bootstrap sample, when bootstrapping.
    pub oob_indices: Option<Vec<Vec<usize>>>,
    pub task: Task,
    pub n_features: usize,
}

/// Trains trees in parallel. Tree `i` draws everything from
/// `split_mix(seed, i)`, so the forest is identical to a sequential build.
pub fn rf_fit(
    x: &Matrix,
    y: &[f64],
    task: Task,
    params: ForestParams,
    seed: u64,
) -> Result<Forest> {
    let n = x.rows();
    if n < 2 {
        return Err(Error::InsufficientData { n, needed: 2 });
    }
    if y.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: y.len(),
        });
    }
    if params.n_trees == 0 {
        return Err(Error::InvalidParameter("n_trees must be at least 1".into()));
    }
    task.check_targets(y)?;
    let m = params.features_per_split(task, x.cols());
    let cart = CartParams {
        max_depth: params.max_depth,
        min_split: params.min_split,
        min_leaf: params.min_leaf,
        n_features_per_split: Some(m),
    };
    let per_tree_seeds: Vec<u64> = (0..params.n_trees as u64)
        .map(|i| seed::split_mix(seed, i))
        .collect();

    let built: Vec<(TreeNode, Option<Vec<usize>>)> = per_tree_seeds
        .par_iter()
        .map(|&s| {
            let mut rng = seed::rng(s);
            let (rows, oob) = if params.bootstrap {
                let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                let mut seen = vec![false; n];
                rows.iter().for_each(|&i| seen[i] = true);
                let oob = (0..n).filter(|&i| !seen[i]).collect();
                (rows, Some(oob))
            } else {
                ((0..n).collect(), None)
            };
            cart_fit_rows(x, y, rows, task, cart, &mut rng).map(|t| (t.root, oob))
        })
        .collect::<Result<_>>()?;

    let (trees, oob): (Vec<_>, Vec<_>) = built.into_iter().unzip();
    Ok(Forest {
        trees,
        per_tree_seeds,
        n_features_per_split: m,
        oob_indices: params
            .bootstrap
            .then(|| oob.into_iter().flatten().collect()),
        task,
        n_features: x.cols(),
    })
}

impl Forest {
    /// Majority vote (ties to the lower class) or the mean of tree outputs.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        x.check_cols(self.n_features)?;
        Ok(x.iter_rows().map(|r| self.predict_row(r)).collect())
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        match self.task {
            Task::Classify { n_classes } => {
                let mut votes = vec![0usize; n_classes];
                for t in &self.trees {
                    votes[t.predict_row(row) as usize] += 1;
                }
                argmax_lowest(&votes) as f64
            }
            Task::Regress => {
                self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>() / self.trees.len() as f64
            }
        }
    }
}

/// Mean decrease in impurity: per tree, sum `(n_node / n_root) * gain` by
/// split feature; average across trees; normalize to sum to one.
pub fn mdi_importance(f: &Forest) -> Result<Vec<f64>> {
    let mut acc = vec![0.0; f.n_features];
    for t in &f.trees {
        let mut per_tree = vec![0.0; f.n_features];
        t.accumulate_importance(t.n_samples().max(1) as f64, &mut per_tree);
        for (a, v) in acc.iter_mut().zip(per_tree) {
            *a += v;
        }
    }
    let k = f.trees.len().max(1) as f64;
    acc.iter_mut().for_each(|v| *v /= k);
    normalize_importance(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{cart_fit, LeafValue};

    fn leaf(v: f64) -> TreeNode {
        TreeNode::Leaf {
            value: LeafValue::Mean(v),
            n_samples: 1,
            impurity: 0.0,
        }
    }

    fn class_leaf(c: usize) -> TreeNode {
        let mut d = vec![0; 2];
        d[c] = 1;
        TreeNode::Leaf {
            value: LeafValue::Distribution(d),
            n_samples: 1,
            impurity: 0.0,
        }
    }

    fn forest(trees: Vec<TreeNode>, task: Task) -> Forest {
        Forest {
            per_tree_seeds: vec![0; trees.len()],
            trees,
            n_features_per_split: 1,
            oob_indices: None,
            task,
            n_features: 1,
        }
    }

    #[test]
    fn votes_and_means() {
        let x = Matrix::from_rows(&[[0.0]]).unwrap();
        let f = forest(
            vec![class_leaf(1), class_leaf(1), class_leaf(0)],
            Task::binary(),
        );
        assert_eq!(f.predict(&x).unwrap(), vec![1.0]);
        let tie = forest(vec![class_leaf(0), class_leaf(1)], Task::binary());
        assert_eq!(tie.predict(&x).unwrap(), vec![0.0]);
        let reg = forest(vec![leaf(3.0), leaf(5.0)], Task::Regress);
        assert_eq!(reg.predict(&x).unwrap(), vec![4.0]);
    }

    #[test]
    fn single_unbootstrapped_tree_equals_cart() {
        let x = Matrix::from_rows(&[
            [1.0, 5.0, 2.0],
            [2.0, 3.0, 1.0],
            [3.0, 8.0, 0.0],
            [4.0, 1.0, 7.0],
            [5.0, 2.0, 3.0],
            [6.0, 9.0, 4.0],
        ])
        .unwrap();
        let y = [0.5, 1.5, 0.2, 3.3, 2.2, 0.9];
        let p = ForestParams {
            n_trees: 1,
            bootstrap: false,
            n_features_per_split: Some(3),
            ..Default::default()
        };
        let f = rf_fit(&x, &y, Task::Regress, p, 77).unwrap();
        let t = cart_fit(&x, &y, Task::Regress, CartParams::default(), 1).unwrap();
        assert_eq!(f.trees[0], t.root);
        assert_eq!(f.predict(&x).unwrap(), t.predict(&x).unwrap());
    }

    #[test]
    fn degenerate_forest_importance() {
        let f = forest(vec![leaf(1.0)], Task::Regress);
        assert!(matches!(mdi_importance(&f), Err(Error::DegenerateForest)));
    }

    #[test]
    fn oob_rows_are_absent_from_sample() {
        let x = Matrix::from_rows(&(0..20).map(|i| [f64::from(i)]).collect::<Vec<_>>()).unwrap();
        let y: Vec<f64> = (0..20).map(f64::from).collect();
        let f = rf_fit(
            &x,
            &y,
            Task::Regress,
            ForestParams {
                n_trees: 3,
                ..Default::default()
            },
            5,
        )
        .unwrap();
        let oob = f.oob_indices.as_ref().unwrap();
        assert_eq!(oob.len(), 3);
        assert!(oob.iter().all(|o| !o.is_empty() && o.len() < 20));
    }
}
