//! Brute-force k-nearest-neighbour classifier and regressor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{sq_dist, Matrix, Standardizer};
use crate::tree::{argmax_lowest, Task};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub stored_x: Matrix,
    pub stored_y: Vec<f64>,
    pub k: usize,
    pub standardizer: Option<Standardizer>,
}

pub fn knn_fit(x: &Matrix, y: &[f64], k: usize, standardize: bool) -> Result<KnnModel> {
    let n = x.rows();
    if y.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: y.len(),
        });
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if k > n {
        return Err(Error::KTooLarge { k, n });
    }
    let (stored_x, standardizer) = if standardize {
        let s = Standardizer::fit(x);
        (s.transform(x)?, Some(s))
    } else {
        (x.clone(), None)
    };
    Ok(KnnModel {
        stored_x,
        stored_y: y.to_vec(),
        k,
        standardizer,
    })
}

impl KnnModel {
    /// Indices of the k nearest stored rows; equal distances go to the lower index.
    pub fn neighbours(&self, query: &[f64]) -> Vec<usize> {
        let mut d: Vec<(f64, usize)> = self
            .stored_x
            .iter_rows()
            .enumerate()
            .map(|(i, r)| (sq_dist(r, query), i))
            .collect();
        let by = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < d.len() {
            d.select_nth_unstable_by(self.k - 1, by);
            d.truncate(self.k);
        }
        d.sort_unstable_by(by);
        d.into_iter().map(|(_, i)| i).collect()
    }

    pub fn predict(&self, x: &Matrix, task: Task) -> Result<Vec<f64>> {
        x.check_cols(self.stored_x.cols())?;
        let q = match &self.standardizer {
            Some(s) => s.transform(x)?,
            None => x.clone(),
        };
        Ok(q.iter_rows()
            .map(|row| {
                let nb = self.neighbours(row);
                match task {
                    Task::Classify { n_classes } => {
                        let mut votes = vec![0usize; n_classes];
                        for &i in &nb {
                            votes[self.stored_y[i] as usize] += 1;
                        }
                        argmax_lowest(&votes) as f64
                    }
                    Task::Regress => {
                        nb.iter().map(|&i| self.stored_y[i]).sum::<f64>() / nb.len() as f64
                    }
                }
            })
            .collect())
    }
}
