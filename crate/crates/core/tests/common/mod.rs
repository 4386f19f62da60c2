//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};
use rand_xoshiro::SplitMix64;
use taxel_bow::svm::{solve_dual, train_binary, Kernel, SmoConfig};
use taxel_bow::TaxelFrame;

// ---------------------------------------------------------------------------
// SVM dual: accelerated projected gradient on `max 1'a - a'Qa/2` over
// `{0 <= a <= C, y'a = 0}`; the projection is found by bisection on the
// hyperplane multiplier.

pub struct Instance {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub probes: Vec<Vec<f64>>,
}

pub fn instance(seed: u64) -> Instance {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let n = rng.random_range(4..=20);
    let dim = rng.random_range(1..=4);
    let spread = Normal::new(0.0, rng.random_range(0.5..2.0)).unwrap();
    let shift: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.5..1.5)).collect();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..n {
        // both classes present
        let label = if i < 2 { [1.0, -1.0][i] } else if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let p: Vec<f64> = shift.iter().map(|s| label * s + spread.sample(&mut rng)).collect();
        x.push(p);
        y.push(label);
    }
    let probes = (0..20)
        .map(|_| (0..dim).map(|_| rng.random_range(-4.0..4.0)).collect())
        .collect();
    Instance { x, y, probes }
}

pub fn gram(x: &[Vec<f64>], y: &[f64], kernel: &Kernel) -> Vec<Vec<f64>> {
    x.iter()
        .zip(y)
        .map(|(a, ya)| x.iter().zip(y).map(|(b, yb)| ya * yb * kernel.eval(a, b)).collect())
        .collect()
}

/// Euclidean projection of `v` onto the box intersected with `y'a = 0`.
pub fn project(v: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let at = |lambda: f64| -> Vec<f64> { v.iter().zip(y).map(|(vi, yi)| (vi - lambda * yi).clamp(0.0, c)).collect() };
    let balance = |a: &[f64]| a.iter().zip(y).map(|(ai, yi)| ai * yi).sum::<f64>();
    // balance(at(lambda)) is non-increasing in lambda
    let bound = v.iter().fold(0.0f64, |m, x| m.max(x.abs())) + c + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if balance(&at(mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

pub fn objective(a: &[f64], q: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let quad: f64 = (0..n).map(|i| (0..n).map(|j| a[i] * q[i][j] * a[j]).sum::<f64>()).sum();
    a.iter().sum::<f64>() - 0.5 * quad
}

pub fn oracle(q: &[Vec<f64>], y: &[f64], c: f64) -> Vec<f64> {
    let n = y.len();
    // Lipschitz constant of the gradient: a Gershgorin bound on Q's spectrum
    let lip = q.iter().map(|row| row.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max).max(1e-12);
    let mut a = vec![0.0; n];
    let mut z = a.clone();
    let mut t = 1.0f64;
    for _ in 0..60_000 {
        // ascent direction of the concave objective: 1 - Qz
        let grad: Vec<f64> = (0..n).map(|i| 1.0 - (0..n).map(|j| q[i][j] * z[j]).sum::<f64>()).collect();
        let step: Vec<f64> = z.iter().zip(&grad).map(|(zi, gi)| zi + gi / lip).collect();
        let next = project(&step, y, c);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = next.iter().zip(&a).map(|(n, p)| n + (t - 1.0) / t_next * (n - p)).collect();
        a = next;
        t = t_next;
    }
    a
}

/// Bias from a dual solution: average over free multipliers, otherwise the
/// midpoint of the feasible interval.
pub fn oracle_bias(a: &[f64], q: &[Vec<f64>], y: &[f64], c: f64) -> f64 {
    let n = a.len();
    let eps = 1e-6 * c.max(1.0);
    let mut free = Vec::new();
    let (mut lb, mut ub) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..n {
        // y_i * (1 - (Qa)_i) is the value b would take if i sat on the margin
        let yg = y[i] * (1.0 - (0..n).map(|j| q[i][j] * a[j]).sum::<f64>());
        if a[i] > eps && a[i] < c - eps {
            free.push(yg);
        } else {
            // y_i (f_i) >= 1 at zero, <= 1 at C
            let at_upper = a[i] >= c - eps;
            if (y[i] > 0.0) == at_upper {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        }
    }
    if free.is_empty() {
        0.5 * (lb + ub)
    } else {
        free.iter().sum::<f64>() / free.len() as f64
    }
}

/// Runs `count` random instances (up to 20 points, C alternating between 1
/// and 10) and returns the worst objective gap, or the first disagreement.
pub fn smo_vs_oracle(kernel_for: impl Fn(u64) -> Kernel, tag: u64, count: u64) -> Result<f64, String> {
    let mut worst_gap = 0.0f64;
    for seed in 0..count {
        let inst = instance(tag * 1000 + seed);
        let kernel = kernel_for(seed);
        let c = if seed % 2 == 0 { 1.0 } else { 10.0 };
        let cfg = SmoConfig::with_c(c);
        let q = gram(&inst.x, &inst.y, &kernel);

        let smo = solve_dual(&inst.x, &inst.y, kernel, &cfg).map_err(|e| e.to_string())?;
        if !smo.converged {
            return Err(format!("instance {seed}: SMO did not converge"));
        }
        let reference = oracle(&q, &inst.y, c);
        let ref_obj = objective(&reference, &q);
        let smo_obj = objective(&smo.alphas, &q);
        if (smo.dual_objective - smo_obj).abs() > 1e-9 * smo_obj.abs().max(1.0) {
            return Err(format!("instance {seed}: reported objective {} != {smo_obj}", smo.dual_objective));
        }
        let gap = (smo_obj - ref_obj).abs();
        worst_gap = worst_gap.max(gap);
        if gap > 1e-3 {
            return Err(format!("instance {seed}: smo {smo_obj} vs oracle {ref_obj}"));
        }

        let model = train_binary(&inst.x, &inst.y, kernel, &cfg).map_err(|e| e.to_string())?;
        let b = oracle_bias(&reference, &q, &inst.y, c);
        let oracle_decision = |p: &[f64]| -> f64 {
            inst.x
                .iter()
                .zip(&inst.y)
                .zip(&reference)
                .map(|((xi, yi), ai)| ai * yi * kernel.eval(xi, p))
                .sum::<f64>()
                + b
        };
        for p in inst.x.iter().chain(&inst.probes) {
            let (f_smo, f_ref) = (model.decision(p), oracle_decision(p));
            if (f_smo >= 0.0) != (f_ref >= 0.0) {
                return Err(format!(
                    "instance {seed}: prediction differs at {p:?} (smo {f_smo}, oracle {f_ref})"
                ));
            }
        }
    }
    Ok(worst_gap)
}

// ---------------------------------------------------------------------------
// Bag-of-words histogram computed the long way round.

/// Raw counts: derivatives of every channel that is nonzero somewhere in
/// `frames`, every stride-1 window of width `w`, each compared with every
/// center (strictly smaller distance wins, so ties keep the lower index).
pub fn brute_histogram(frames: &[TaxelFrame], centers: &[Vec<f64>], w: usize) -> (Vec<f64>, usize) {
    let mut counts = vec![0.0; centers.len()];
    let mut windows = 0;
    let width = frames[0].values().len();
    for c in 0..width {
        let raw: Vec<f64> = frames.iter().map(|f| f.values()[c]).collect();
        if raw.iter().all(|&v| v == 0.0) {
            continue;
        }
        let deriv: Vec<f64> = (1..raw.len()).map(|i| raw[i] - raw[i - 1]).collect();
        if deriv.len() < w {
            continue;
        }
        for start in 0..=deriv.len() - w {
            let window = &deriv[start..start + w];
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (k, center) in centers.iter().enumerate() {
                let d: f64 = window.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                if d < best_d {
                    best = k;
                    best_d = d;
                }
            }
            counts[best] += 1.0;
            windows += 1;
        }
    }
    (counts, windows)
}

// ---------------------------------------------------------------------------
// Cyclic Jacobi eigenvalue iteration for small symmetric matrices.

/// Eigenvalues of the symmetric matrix `a`, sorted descending.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-22 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    eig
}

/// Sample covariance (divisor `n - 1`) of the rows of `x`.
pub fn covariance(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = x.len() as f64;
    let d = x[0].len();
    let mean: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| x.iter().map(|r| (r[i] - mean[i]) * (r[j] - mean[j])).sum::<f64>() / (n - 1.0))
                .collect()
        })
        .collect()
}
