//! Binary C-SVM trained by sequential minimal optimization.
//!
//! Solves the dual
//!
//! ```text
//! min_a  1/2 a^T Q a - e^T a   s.t.  y^T a = 0,  0 <= a_i <= C,
//! Q_ij = y_i y_j K(x_i, x_j)
//! ```
//!
//! by repeatedly optimizing the maximal violating pair
//! `i = argmax_{I_up} -y_i G_i`, `j = argmin_{I_low} -y_j G_j`, where
//! `G = Q a - e`. Iteration stops when `m(a) - M(a) <= tau`. The decision
//! function is `f(x) = sum_i y_i a_i K(x_i, x) + bias`.

use serde::{Deserialize, Serialize};

use super::kernel::Kernel;
use crate::error::{Error, Result};

/// Stand-in for a hard margin when no `C` is given.
pub const DEFAULT_C: f64 = 1e6;
pub const DEFAULT_TAU: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoConfig {
    pub c: f64,
    pub tau: f64,
    /// Defaults to `max(10_000_000, 100 n)`.
    pub max_iters: Option<usize>,
}

impl Default for SmoConfig {
    fn default() -> Self {
        SmoConfig {
            c: DEFAULT_C,
            tau: DEFAULT_TAU,
            max_iters: None,
        }
    }
}

impl SmoConfig {
    pub fn with_c(c: f64) -> Self {
        SmoConfig {
            c,
            ..SmoConfig::default()
        }
    }
}

/// Full dual solution, one multiplier per training point.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    pub iterations: usize,
    /// `m(a) - M(a)` at termination.
    pub max_violation: f64,
    pub converged: bool,
    /// `e^T a - 1/2 a^T Q a` (the maximization form).
    pub dual_objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySvm {
    pub kernel: Kernel,
    /// `y_i * a_i` for each stored support vector.
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub svs: Vec<Vec<f64>>,
    #[serde(skip)]
    pub training: Option<DualSolution>,
}

impl BinarySvm {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.svs
            .iter()
            .zip(&self.alphas)
            .map(|(sv, a)| a * self.kernel.eval(sv, x))
            .sum::<f64>()
            + self.bias
    }

    pub fn dim(&self) -> Option<usize> {
        self.svs.first().map(Vec::len)
    }

    /// Largest KKT violation over a training set, evaluated directly through
    /// the stored decision function. Needs the training-time multipliers.
    pub fn kkt_residual<R: AsRef<[f64]>>(&self, x: &[R], y: &[f64]) -> Result<f64> {
        let sol = self
            .training
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("model carries no training multipliers".into()))?;
        if sol.alphas.len() != x.len() || y.len() != x.len() {
            return Err(Error::InvalidInput("training set size mismatch".into()));
        }
        let mut worst: f64 = 0.0;
        for ((xi, &yi), &a) in x.iter().zip(y).zip(&sol.alphas) {
            let g = yi * self.decision(xi.as_ref()) - 1.0;
            let v = if a <= 0.0 {
                (-g).max(0.0)
            } else if a >= sol.c {
                g.max(0.0)
            } else {
                g.abs()
            };
            worst = worst.max(v);
        }
        Ok(worst)
    }
}

pub(crate) fn validate_problem<R: AsRef<[f64]>>(x: &[R], y: &[f64]) -> Result<usize> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "{} points but {} labels",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::InvalidInput("need at least two training points".into()));
    }
    if let Some(bad) = y.iter().find(|&&v| v != 1.0 && v != -1.0) {
        return Err(Error::InvalidInput(format!("label {bad} is not +1 or -1")));
    }
    if !(y.contains(&1.0) && y.contains(&-1.0)) {
        return Err(Error::DegenerateLabels(
            "binary training needs both classes".into(),
        ));
    }
    let dim = x[0].as_ref().len();
    for p in x {
        let p = p.as_ref();
        if p.len() != dim {
            return Err(Error::InvalidInput("feature dimensions differ".into()));
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite feature value".into()));
        }
    }
    Ok(dim)
}

pub fn solve_dual<R: AsRef<[f64]>>(
    x: &[R],
    y: &[f64],
    kernel: Kernel,
    config: &SmoConfig,
) -> Result<DualSolution> {
    validate_problem(x, y)?;
    kernel.validate()?;
    if !(config.c.is_finite() && config.c > 0.0) {
        return Err(Error::Config(format!("C = {} must be positive", config.c)));
    }
    if config.tau.is_nan() || config.tau <= 0.0 {
        return Err(Error::Config(format!("tau = {} must be positive", config.tau)));
    }
    let n = x.len();
    let c = config.c;
    let q: Vec<f64> = (0..n * n)
        .map(|ij| {
            let (i, j) = (ij / n, ij % n);
            y[i] * y[j] * kernel.eval(x[i].as_ref(), x[j].as_ref())
        })
        .collect();
    let qd: Vec<f64> = (0..n).map(|i| q[i * n + i]).collect();
    let max_iters = config.max_iters.unwrap_or_else(|| (100 * n).max(10_000_000));

    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut iterations = 0;
    let mut violation;
    let mut converged = false;

    let in_up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
    let in_low = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);

    loop {
        let mut i = usize::MAX;
        let mut gmax = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut gmin = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t]) && v > gmax {
                gmax = v;
                i = t;
            }
            if in_low(alpha[t], y[t]) && v < gmin {
                gmin = v;
                j = t;
            }
        }
        violation = gmax - gmin;
        if i == usize::MAX || j == usize::MAX || violation <= config.tau {
            converged = true;
            break;
        }
        if iterations >= max_iters {
            break;
        }
        iterations += 1;

        let qi = &q[i * n..(i + 1) * n];
        let qj = &q[j * n..(j + 1) * n];
        let (old_ai, old_aj) = (alpha[i], alpha[j]);
        const TAU_SMALL: f64 = 1e-12;

        if y[i] != y[j] {
            let mut quad = qd[i] + qd[j] + 2.0 * qi[j];
            if quad <= 0.0 {
                quad = TAU_SMALL;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = qd[i] + qd[j] - 2.0 * qi[j];
            if quad <= 0.0 {
                quad = TAU_SMALL;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (dai, daj) = (alpha[i] - old_ai, alpha[j] - old_aj);
        for t in 0..n {
            grad[t] += qi[t] * dai + qj[t] * daj;
        }
    }

    // Bias: average over free multipliers, else the middle of the feasible interval.
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut free_sum = 0.0;
    let mut free = 0usize;
    for t in 0..n {
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
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 {
        free_sum / free as f64
    } else {
        0.5 * (ub + lb)
    };

    let dual_objective = alpha
        .iter()
        .zip(&grad)
        .map(|(a, g)| a - 0.5 * a * (g + 1.0))
        .sum();

    Ok(DualSolution {
        alphas: alpha,
        bias: -rho,
        c,
        iterations,
        max_violation: violation,
        converged,
        dual_objective,
    })
}

pub fn train_binary<R: AsRef<[f64]>>(
    x: &[R],
    y: &[f64],
    kernel: Kernel,
    config: &SmoConfig,
) -> Result<BinarySvm> {
    let solution = solve_dual(x, y, kernel, config)?;
    let mut alphas = Vec::new();
    let mut svs = Vec::new();
    for ((xi, yi), a) in x.iter().zip(y).zip(&solution.alphas) {
        if *a > 0.0 {
            alphas.push(yi * a);
            svs.push(xi.as_ref().to_vec());
        }
    }
    Ok(BinarySvm {
        kernel,
        alphas,
        bias: solution.bias,
        svs,
        training: Some(solution),
    })
}
