//! Sequential minimal optimization for the box- and equality-constrained
//! quadratic program shared by C-SVC and epsilon-SVR:
//!
//! ```text
//! minimize   1/2 a'Qa + p'a
//! subject to y'a = 0,  0 <= a_t <= C,  y_t in {-1, +1}
//! ```
//!
//! `Q[s][t] = y_s y_t K(s, t)`. Each iteration takes the most violating index
//! `i` of the "up" set, pairs it with the "low" index promising the largest
//! second-order decrease, solves the two-variable subproblem in closed form
//! and clips to the box. The run stops once the maximal KKT violation
//! `m(a) - M(a)` drops below the tolerance.

use rand::Rng;

const TAU: f64 = 1e-12;

pub(crate) struct Problem<'a> {
    pub y: &'a [f64],
    pub p: &'a [f64],
    pub c: f64,
    /// Kernel value between variables `s` and `t`, without label signs.
    pub kernel: &'a dyn Fn(usize, usize) -> f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Options {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub record_objective: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct Solution {
    pub alpha: Vec<f64>,
    /// Bias `b` of `f(x) = sum coef K + b`.
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Final maximal KKT violation `m(a) - M(a)`.
    pub kkt_violation: f64,
    /// Objective after each accepted pair update (when requested).
    pub objective_trace: Vec<f64>,
}

pub(crate) fn solve(prob: &Problem<'_>, opts: Options) -> Solution {
    let l = prob.y.len();
    let y = prob.y;
    let c = prob.c;
    let q = |s: usize, t: usize| y[s] * y[t] * (prob.kernel)(s, t);
    let diag: Vec<f64> = (0..l).map(|t| (prob.kernel)(t, t)).collect();

    let mut alpha = vec![0.0; l];
    let mut grad = prob.p.to_vec();
    let mut rng = crate::seed::rng(opts.seed);
    let mut trace = Vec::new();
    if opts.record_objective {
        trace.push(objective(&alpha, &grad, prob.p));
    }

    let in_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    let mut iterations = 0;
    let mut converged = false;
    let mut violation;
    loop {
        let mut i = usize::MAX;
        let mut gmax = f64::NEG_INFINITY;
        for t in 0..l {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t]) && v > gmax {
                gmax = v;
                i = t;
            }
        }
        // j: most violating by M(a) for the stopping test, and by the
        // second-order decrease estimate for the actual step
        let mut gmin = f64::INFINITY;
        let mut j = usize::MAX;
        let mut best_drop = f64::INFINITY;
        if i != usize::MAX {
            for t in 0..l {
                if !in_low(alpha[t], y[t]) {
                    continue;
                }
                let v = -y[t] * grad[t];
                gmin = gmin.min(v);
                let b = gmax - v;
                if b > 0.0 {
                    let mut a = diag[i] + diag[t] - 2.0 * (prob.kernel)(i, t);
                    if a <= 0.0 {
                        a = TAU;
                    }
                    let drop = -(b * b) / a;
                    if drop < best_drop {
                        best_drop = drop;
                        j = t;
                    }
                }
            }
        }
        violation = if i == usize::MAX || gmin == f64::INFINITY {
            0.0
        } else {
            gmax - gmin
        };
        if violation < opts.tol {
            converged = true;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }

        let mut progressed = update_pair(prob, &q, &diag, &mut alpha, &mut grad, i, j);
        if !progressed {
            // stalled on the maximal pair: try random partners for i
            let low: Vec<usize> = (0..l)
                .filter(|&t| t != i && in_low(alpha[t], y[t]) && -y[t] * grad[t] < gmax)
                .collect();
            for _ in 0..low.len().min(16) {
                let jj = low[rng.random_range(0..low.len())];
                if update_pair(prob, &q, &diag, &mut alpha, &mut grad, i, jj) {
                    progressed = true;
                    break;
                }
            }
        }
        iterations += 1;
        if !progressed {
            break;
        }
        if opts.record_objective {
            trace.push(objective(&alpha, &grad, prob.p));
        }
    }

    let bias = -rho(&alpha, &grad, y, c);
    Solution {
        alpha,
        bias,
        iterations,
        converged,
        kkt_violation: violation.max(0.0),
        objective_trace: trace,
    }
}

fn objective(alpha: &[f64], grad: &[f64], p: &[f64]) -> f64 {
    // G = Qa + p, so a'Qa / 2 + p'a = a'(G + p) / 2
    alpha
        .iter()
        .zip(grad.iter().zip(p))
        .map(|(a, (g, pp))| a * (g + pp))
        .sum::<f64>()
        * 0.5
}

/// Two-variable closed-form step with box clipping. Returns whether either
/// variable moved.
fn update_pair(
    prob: &Problem<'_>,
    q: &dyn Fn(usize, usize) -> f64,
    diag: &[f64],
    alpha: &mut [f64],
    grad: &mut [f64],
    i: usize,
    j: usize,
) -> bool {
    let y = prob.y;
    let c = prob.c;
    let (old_i, old_j) = (alpha[i], alpha[j]);
    let qij = q(i, j);
    let (mut ai, mut aj) = (old_i, old_j);

    if y[i] != y[j] {
        let mut quad = diag[i] + diag[j] + 2.0 * qij;
        if quad <= 0.0 {
            quad = TAU;
        }
        let delta = (-grad[i] - grad[j]) / quad;
        let diff = ai - aj;
        ai += delta;
        aj += delta;
        if diff > 0.0 {
            if aj < 0.0 {
                aj = 0.0;
                ai = diff;
            }
        } else if ai < 0.0 {
            ai = 0.0;
            aj = -diff;
        }
        if diff > 0.0 {
            if ai > c {
                ai = c;
                aj = c - diff;
            }
        } else if aj > c {
            aj = c;
            ai = c + diff;
        }
    } else {
        let mut quad = diag[i] + diag[j] - 2.0 * qij;
        if quad <= 0.0 {
            quad = TAU;
        }
        let delta = (grad[i] - grad[j]) / quad;
        let sum = ai + aj;
        ai -= delta;
        aj += delta;
        if sum > c {
            if ai > c {
                ai = c;
                aj = sum - c;
            }
        } else if aj < 0.0 {
            aj = 0.0;
            ai = sum;
        }
        if sum > c {
            if aj > c {
                aj = c;
                ai = sum - c;
            }
        } else if ai < 0.0 {
            ai = 0.0;
            aj = sum;
        }
    }

    let (di, dj) = (ai - old_i, aj - old_j);
    if di == 0.0 && dj == 0.0 {
        return false;
    }
    alpha[i] = ai;
    alpha[j] = aj;
    for (t, g) in grad.iter_mut().enumerate() {
        *g += q(t, i) * di + q(t, j) * dj;
    }
    true
}

/// Offset from free variables when any exist, else the midpoint of the
/// feasible interval given by bound variables.
fn rho(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut n_free, mut sum_free) = (0usize, 0.0);
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    if n_free > 0 {
        sum_free / n_free as f64
    } else if ub.is_finite() && lb.is_finite() {
        0.5 * (ub + lb)
    } else if ub.is_finite() {
        ub
    } else if lb.is_finite() {
        lb
    } else {
        0.0
    }
}
