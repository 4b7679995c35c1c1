//! Ordinary least squares and L2-regularized logistic regression.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl LinearModel {
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        x.check_cols(self.weights.len())?;
        Ok(x.iter_rows()
            .map(|r| dot(r, &self.weights) + self.intercept)
            .collect())
    }
}

/// Least squares via centred normal equations. The intercept absorbs the
/// means, so only the p x p centred Gram matrix is factored. A rank-deficient
/// Gram matrix is retried with a diagonal jitter of 1e-10 * trace / p.
pub fn ols_fit(x: &Matrix, y: &[f64]) -> Result<LinearModel> {
    let (n, p) = (x.rows(), x.cols());
    if y.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: y.len(),
        });
    }
    if n < p + 1 {
        return Err(Error::InsufficientData { n, needed: p + 1 });
    }
    if y.iter().any(|v| !v.is_finite()) || x.iter_rows().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "non-finite value in design or targets".into(),
        ));
    }

    let nf = n as f64;
    let x_mean: Vec<f64> = (0..p)
        .map(|j| x.column(j).iter().sum::<f64>() / nf)
        .collect();
    let y_mean = y.iter().sum::<f64>() / nf;

    let mut gram = vec![0.0; p * p];
    let mut rhs = vec![0.0; p];
    let mut centred = vec![0.0; p];
    for (row, &yi) in x.iter_rows().zip(y) {
        for j in 0..p {
            centred[j] = row[j] - x_mean[j];
        }
        let yc = yi - y_mean;
        for j in 0..p {
            rhs[j] += centred[j] * yc;
            for k in 0..=j {
                gram[j * p + k] += centred[j] * centred[k];
            }
        }
    }
    for j in 0..p {
        for k in 0..j {
            gram[k * p + j] = gram[j * p + k];
        }
    }

    let weights = if p == 0 {
        vec![]
    } else {
        let trace: f64 = (0..p).map(|j| gram[j * p + j]).sum();
        if trace == 0.0 {
            // every column constant: nothing to explain beyond the mean
            vec![0.0; p]
        } else {
            let max_diag = (0..p).map(|j| gram[j * p + j]).fold(0.0, f64::max);
            match cholesky_solve(&gram, &rhs, p, 1e-12 * max_diag) {
                Some(w) => w,
                None => {
                    let jitter = 1e-10 * trace / p as f64;
                    let mut g = gram.clone();
                    for j in 0..p {
                        g[j * p + j] += jitter;
                    }
                    cholesky_solve(&g, &rhs, p, 0.0).ok_or(Error::SingularDesign)?
                }
            }
        }
    };
    let intercept = y_mean - dot(&x_mean, &weights);
    if !intercept.is_finite() || weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::SingularDesign);
    }
    Ok(LinearModel { weights, intercept })
}

/// Solves `a x = b` for symmetric positive-definite `a`; `None` when a pivot
/// falls to `min_pivot` or below.
fn cholesky_solve(a: &[f64], b: &[f64], p: usize, min_pivot: f64) -> Option<Vec<f64>> {
    let mut l = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i * p + k] * l[j * p + k]).sum();
            if i == j {
                let d = a[i * p + i] - s;
                if !(d > min_pivot) || !d.is_finite() {
                    return None;
                }
                l[i * p + i] = d.sqrt();
            } else {
                l[i * p + j] = (a[i * p + j] - s) / l[j * p + j];
            }
        }
    }
    let mut z = vec![0.0; p];
    for i in 0..p {
        let s: f64 = (0..i).map(|k| l[i * p + k] * z[k]).sum();
        z[i] = (b[i] - s) / l[i * p + i];
    }
    let mut x = vec![0.0; p];
    for i in (0..p).rev() {
        let s: f64 = (i + 1..p).map(|k| l[k * p + i] * x[k]).sum();
        x[i] = (z[i] - s) / l[i * p + i];
    }
    Some(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub l2_lambda: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            l2_lambda: 1.0,
            max_iters: 2000,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub l2_lambda: f64,
    /// Objective value at the start and after every accepted step.
    pub training_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl LogisticModel {
    /// Unfitted model with the given parameters, handy for evaluating the
    /// objective at arbitrary points.
    pub fn with_params(weights: Vec<f64>, intercept: f64, l2_lambda: f64) -> Self {
        LogisticModel {
            weights,
            intercept,
            l2_lambda,
            training_trace: vec![],
            iterations: 0,
            converged: false,
        }
    }

    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<f64>> {
        x.check_cols(self.weights.len())?;
        Ok(x.iter_rows()
            .map(|r| sigmoid(dot(r, &self.weights) + self.intercept))
            .collect())
    }

    /// Label 1 iff probability >= threshold.
    pub fn predict(&self, x: &Matrix, threshold: f64) -> Result<Vec<u8>> {
        Ok(self
            .predict_proba(x)?
            .into_iter()
            .map(|p| u8::from(p >= threshold))
            .collect())
    }

    /// Mean cross-entropy plus (lambda / 2) * |w|^2, and its gradient laid out
    /// as `[d/dw_0, .., d/dw_{p-1}, d/db]`. The intercept is not penalized.
    pub fn loss_and_gradient(&self, x: &Matrix, y: &[f64]) -> Result<(f64, Vec<f64>)> {
        x.check_cols(self.weights.len())?;
        if y.len() != x.rows() {
            return Err(Error::LengthMismatch {
                left: x.rows(),
                right: y.len(),
            });
        }
        Ok(objective(
            &self.weights,
            self.intercept,
            self.l2_lambda,
            x,
            y,
            true,
        ))
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// log(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn objective(
    w: &[f64],
    b: f64,
    lambda: f64,
    x: &Matrix,
    y: &[f64],
    with_grad: bool,
) -> (f64, Vec<f64>) {
    let n = x.rows() as f64;
    let p = w.len();
    let mut loss = 0.0;
    let mut grad = if with_grad { vec![0.0; p + 1] } else { vec![] };
    for (row, &yi) in x.iter_rows().zip(y) {
        let z = dot(row, w) + b;
        loss += softplus(z) - yi * z;
        if with_grad {
            let r = sigmoid(z) - yi;
            for j in 0..p {
                grad[j] += r * row[j];
            }
            grad[p] += r;
        }
    }
    loss /= n;
    loss += 0.5 * lambda * dot(w, w);
    if with_grad {
        for g in grad.iter_mut() {
            *g /= n;
        }
        for j in 0..p {
            grad[j] += lambda * w[j];
        }
    }
    (loss, grad)
}

/// Full-batch gradient descent with Armijo backtracking (step halving).
/// Stops once the gradient's max-norm drops below `tol` or after `max_iters`.
///
/// Columns are centred internally, which leaves the objective unchanged
/// because the intercept is unpenalized, and each coordinate's step is scaled
/// by a bound on its curvature. Without both, raw age columns and large
/// `l2_lambda` values stall plain descent.
pub fn logistic_fit(x: &Matrix, y: &[f64], params: LogisticParams) -> Result<LogisticModel> {
    let (n, p) = (x.rows(), x.cols());
    if y.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: y.len(),
        });
    }
    if n < 2 {
        return Err(Error::InsufficientData { n, needed: 2 });
    }
    if y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::InvalidParameter(
            "logistic targets must be 0 or 1".into(),
        ));
    }
    let positives = y.iter().filter(|&&v| v == 1.0).count();
    if positives == 0 || positives == n {
        return Err(Error::SingleClass);
    }
    if !(params.l2_lambda >= 0.0) {
        return Err(Error::InvalidParameter(
            "l2_lambda must be non-negative".into(),
        ));
    }

    let nf = n as f64;
    let means: Vec<f64> = (0..p)
        .map(|j| x.column(j).iter().sum::<f64>() / nf)
        .collect();
    let xc = x.map_rows(|src, dst| {
        for j in 0..p {
            dst[j] = src[j] - means[j];
        }
    });
    let mut scale: Vec<f64> = (0..p)
        .map(|j| {
            let ss: f64 = xc.iter_rows().map(|r| r[j] * r[j]).sum();
            0.25 * ss / nf + params.l2_lambda
        })
        .collect();
    scale.push(0.25);
    for s in scale.iter_mut() {
        if !(*s > 1e-12) {
            *s = 1.0;
        }
    }

    let lambda = params.l2_lambda;
    let mut w = vec![0.0; p];
    let mut b = 0.0;
    let (mut loss, mut grad) = objective(&w, b, lambda, &xc, y, true);
    let mut trace = vec![loss];
    let mut step = 1.0;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < params.max_iters {
        let gmax = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gmax < params.tol {
            converged = true;
            break;
        }
        let dir: Vec<f64> = grad.iter().zip(&scale).map(|(g, s)| g / s).collect();
        let decrease = dot(&grad, &dir);
        let mut accepted = false;
        while step > 1e-16 {
            let w_new: Vec<f64> = w.iter().zip(&dir).map(|(wi, di)| wi - step * di).collect();
            let b_new = b - step * dir[p];
            let (l_new, _) = objective(&w_new, b_new, lambda, &xc, y, false);
            if l_new <= loss - 1e-4 * step * decrease {
                w = w_new;
                b = b_new;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        iterations += 1;
        let (l, g) = objective(&w, b, lambda, &xc, y, true);
        loss = l;
        grad = g;
        trace.push(loss);
        step = (step * 2.0).min(1.0);
    }
    if !converged {
        let gmax = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        converged = gmax < params.tol;
    }

    let intercept = b - dot(&means, &w);
    Ok(LogisticModel {
        weights: w,
        intercept,
        l2_lambda: lambda,
        training_trace: trace,
        iterations,
        converged,
    })
}
