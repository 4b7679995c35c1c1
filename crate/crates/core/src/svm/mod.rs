//! Soft-margin kernel SVMs: binary C-SVC and epsilon-insensitive SVR.

mod smo;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, sq_dist, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    #[inline]
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => dot(a, b),
            Kernel::Rbf { gamma } => (-gamma * sq_dist(a, b)).exp(),
        }
    }
}

pub fn kernel_eval(k: &Kernel, a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(k.eval(a, b))
}

/// `1 / (p * mean per-feature variance)`; 1.0 when the data has no spread.
pub fn default_gamma(x: &Matrix) -> f64 {
    let (n, p) = (x.rows() as f64, x.cols());
    if p == 0 || x.rows() == 0 {
        return 1.0;
    }
    let mean_var = (0..p)
        .map(|j| {
            let c = x.column(j);
            let m = c.iter().sum::<f64>() / n;
            c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n
        })
        .sum::<f64>()
        / p as f64;
    if mean_var > 0.0 {
        1.0 / (p as f64 * mean_var)
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelChoice {
    Linear,
    /// `None` picks [`default_gamma`] from the training data.
    Rbf {
        gamma: Option<f64>,
    },
}

impl KernelChoice {
    pub fn resolve(&self, x: &Matrix) -> Kernel {
        match *self {
            KernelChoice::Linear => Kernel::Linear,
            KernelChoice::Rbf { gamma } => Kernel::Rbf {
                gamma: gamma.unwrap_or_else(|| default_gamma(x)),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub kernel: KernelChoice,
    /// Tube half-width for regression; ignored by the classifier.
    pub epsilon: f64,
    /// Stop once the maximal KKT violation falls below this.
    pub tol: f64,
    /// Iteration budget in passes, one pass being one update per dual variable.
    pub max_passes: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            kernel: KernelChoice::Rbf { gamma: None },
            epsilon: 0.1,
            tol: 1e-3,
            max_passes: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub converged: bool,
    pub iterations: usize,
    pub kkt_violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub support_vectors: Matrix,
    /// `alpha_i * y_i` for classification, `alpha_i - alpha_i*` for regression.
    pub coefficients: Vec<f64>,
    pub bias: f64,
    pub kernel: Kernel,
    pub c: f64,
    pub epsilon: Option<f64>,
    pub convergence: Convergence,
}

impl SvmModel {
    /// `f(x) = sum coef_i K(sv_i, x) + b`.
    pub fn decision(&self, x: &Matrix) -> Result<Vec<f64>> {
        x.check_cols(self.support_vectors.cols())?;
        Ok(x.iter_rows().map(|r| self.decision_row(r)).collect())
    }

    pub fn decision_row(&self, row: &[f64]) -> f64 {
        self.support_vectors
            .iter_rows()
            .zip(&self.coefficients)
            .map(|(sv, c)| c * self.kernel.eval(sv, row))
            .sum::<f64>()
            + self.bias
    }

    /// Labels in {-1, +1}; a zero margin maps to +1.
    pub fn predict_labels(&self, x: &Matrix) -> Result<Vec<f64>> {
        Ok(self
            .decision(x)?
            .into_iter()
            .map(|f| if f >= 0.0 { 1.0 } else { -1.0 })
            .collect())
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        self.decision(x)
    }

    pub fn warning(&self, label: &str) -> Option<String> {
        (!self.convergence.converged).then(|| {
            format!(
                "{label}: SMO did not converge after {} iterations (KKT violation {:.3e})",
                self.convergence.iterations, self.convergence.kkt_violation
            )
        })
    }
}

/// Raw dual solution, exposed for feasibility checks.
#[derive(Debug, Clone)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub objective_trace: Vec<f64>,
}

fn check_params(x: &Matrix, y: &[f64], params: &SvmParams) -> Result<()> {
    if y.len() != x.rows() {
        return Err(Error::LengthMismatch {
            left: x.rows(),
            right: y.len(),
        });
    }
    if !(params.c > 0.0) {
        return Err(Error::InvalidParameter("C must be positive".into()));
    }
    if !(params.epsilon >= 0.0) {
        return Err(Error::InvalidParameter(
            "epsilon must be non-negative".into(),
        ));
    }
    if !(params.tol > 0.0) {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    Ok(())
}

fn gram(x: &Matrix, kernel: &Kernel) -> Vec<f64> {
    let n = x.rows();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = kernel.eval(x.row(i), x.row(j));
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

fn collect_model(
    x: &Matrix,
    coef: Vec<f64>,
    bias: f64,
    kernel: Kernel,
    params: &SvmParams,
    epsilon: Option<f64>,
    sol: &smo::Solution,
) -> SvmModel {
    let keep: Vec<usize> = (0..coef.len()).filter(|&i| coef[i] != 0.0).collect();
    SvmModel {
        support_vectors: x.select_rows(&keep),
        coefficients: keep.iter().map(|&i| coef[i]).collect(),
        bias,
        kernel,
        c: params.c,
        epsilon,
        convergence: Convergence {
            converged: sol.converged,
            iterations: sol.iterations,
            kkt_violation: sol.kkt_violation,
        },
    }
}

/// C-SVC on labels in {-1, +1}.
pub fn svc_fit(x: &Matrix, y: &[f64], params: SvmParams, seed: u64) -> Result<SvmModel> {
    svc_fit_dual(x, y, params, seed, false).map(|(m, _)| m)
}

/// As [`svc_fit`], also returning the raw dual variables and, when
/// `record_objective` is set, the objective after every pair update.
pub fn svc_fit_dual(
    x: &Matrix,
    y: &[f64],
    params: SvmParams,
    seed: u64,
    record_objective: bool,
) -> Result<(SvmModel, DualSolution)> {
    check_params(x, y, &params)?;
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::InvalidParameter(
            "SVC labels must be -1 or +1".into(),
        ));
    }
    if !(y.contains(&1.0) && y.contains(&-1.0)) {
        return Err(Error::SingleClass);
    }
    let n = x.rows();
    let kernel = params.kernel.resolve(x);
    let k = gram(x, &kernel);
    let kf = |s: usize, t: usize| k[s * n + t];
    let p = vec![-1.0; n];
    let prob = smo::Problem {
        y,
        p: &p,
        c: params.c,
        kernel: &kf,
    };
    let sol = smo::solve(
        &prob,
        smo::Options {
            tol: params.tol,
            max_iter: params.max_passes.saturating_mul(n.max(1)),
            seed,
            record_objective,
        },
    );
    let coef: Vec<f64> = sol.alpha.iter().zip(y).map(|(a, yi)| a * yi).collect();
    let model = collect_model(x, coef, sol.bias, kernel, &params, None, &sol);
    Ok((
        model,
        DualSolution {
            alpha: sol.alpha,
            objective_trace: sol.objective_trace,
        },
    ))
}

pub fn svr_fit(x: &Matrix, y: &[f64], params: SvmParams, seed: u64) -> Result<SvmModel> {
    svr_fit_dual(x, y, params, seed, false).map(|(m, _)| m)
}

/// SVR as a 2n-variable problem: variables `0..n` are `alpha`, `n..2n` are
/// `alpha*`, with signs +1 and -1. The returned `alpha` vector has that layout.
pub fn svr_fit_dual(
    x: &Matrix,
    y: &[f64],
    params: SvmParams,
    seed: u64,
    record_objective: bool,
) -> Result<(SvmModel, DualSolution)> {
    check_params(x, y, &params)?;
    let n = x.rows();
    if n < 2 {
        return Err(Error::InsufficientData { n, needed: 2 });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "non-finite regression target".into(),
        ));
    }
    let kernel = params.kernel.resolve(x);
    let k = gram(x, &kernel);
    let kf = |s: usize, t: usize| k[(s % n) * n + (t % n)];
    let signs: Vec<f64> = (0..2 * n).map(|t| if t < n { 1.0 } else { -1.0 }).collect();
    let p: Vec<f64> = (0..2 * n)
        .map(|t| {
            if t < n {
                params.epsilon - y[t]
            } else {
                params.epsilon + y[t - n]
            }
        })
        .collect();
    let prob = smo::Problem {
        y: &signs,
        p: &p,
        c: params.c,
        kernel: &kf,
    };
    let sol = smo::solve(
        &prob,
        smo::Options {
            tol: params.tol,
            max_iter: params.max_passes.saturating_mul(2 * n),
            seed,
            record_objective,
        },
    );
    let coef: Vec<f64> = (0..n).map(|i| sol.alpha[i] - sol.alpha[i + n]).collect();
    let model = collect_model(
        x,
        coef,
        sol.bias,
        kernel,
        &params,
        Some(params.epsilon),
        &sol,
    );
    Ok((
        model,
        DualSolution {
            alpha: sol.alpha,
            objective_trace: sol.objective_trace,
        },
    ))
}
