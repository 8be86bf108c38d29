//! Limited-memory BFGS ascent with Armijo backtracking, and a simplex projection.

use std::collections::VecDeque;

/// Outcome of one objective evaluation.
pub enum Eval {
    /// Objective value and gradient.
    Point(f64, Vec<f64>),
    /// The point is outside the usable region (overflow guard); the line search backs off.
    Reject,
}

#[derive(Clone, Copy, Debug)]
pub struct AscentOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub step0: f64,
    /// Values above this are reported as divergent.
    pub cap: f64,
    pub memory: usize,
    /// Consecutive iterations with relative improvement below `1e-12` before stopping.
    pub stall_limit: usize,
}

impl Default for AscentOptions {
    fn default() -> Self {
        AscentOptions { tol: 1e-9, max_iter: 5000, step0: 1.0, cap: 1e6, memory: 10, stall_limit: 50 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Gradient,
    Stalled,
    LineSearch,
    MaxIter,
    Diverged,
}

#[derive(Clone, Debug)]
pub struct AscentOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad: Vec<f64>,
    pub grad_norm: f64,
    pub iterations: usize,
    pub termination: Termination,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn along(x: &[f64], t: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + t * b).collect()
}

/// Two-loop recursion: approximate inverse Hessian (of `-F`) applied to `g`.
fn two_loop(g: &[f64], hist: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(hist.len());
    for (s, y, rho) in hist.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = hist.back() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q
}

/// Maximizes `f` from `x0`. `f` must accept `x0` (return `Eval::Point`).
///
/// Every accepted step satisfies the Armijo condition, so the objective is non-decreasing.
pub fn maximize(mut f: impl FnMut(&[f64]) -> Eval, x0: Vec<f64>, opts: &AscentOptions) -> Option<AscentOutcome> {
    let (mut value, mut grad) = match f(&x0) {
        Eval::Point(v, g) => (v, g),
        Eval::Reject => return None,
    };
    let mut x = x0;
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut stalls = 0;
    let mut iterations = 0;
    let finish = |x, value, grad: Vec<f64>, iterations, termination| {
        let grad_norm = norm(&grad);
        Some(AscentOutcome { x, value, grad, grad_norm, iterations, termination })
    };
    loop {
        if value > opts.cap {
            return finish(x, value, grad, iterations, Termination::Diverged);
        }
        if norm(&grad) <= opts.tol {
            return finish(x, value, grad, iterations, Termination::Gradient);
        }
        if iterations >= opts.max_iter {
            return finish(x, value, grad, iterations, Termination::MaxIter);
        }
        iterations += 1;

        let mut d = two_loop(&grad, &hist);
        let mut slope = dot(&grad, &d);
        if !(slope > 0.0) {
            hist.clear();
            d = grad.clone();
            slope = dot(&grad, &d);
        }
        let mut t = if hist.is_empty() { (opts.step0 / norm(&d)).min(opts.step0) } else { 1.0 };
        let mut accepted = None;
        for _ in 0..80 {
            let trial = along(&x, t, &d);
            if let Eval::Point(v, g) = f(&trial) {
                if v.is_finite() && v >= value + 1e-4 * t * slope {
                    accepted = Some((trial, v, g));
                    break;
                }
                if v.is_infinite() && v > 0.0 {
                    return finish(trial, v, g, iterations, Termination::Diverged);
                }
            }
            t *= 0.5;
        }
        let Some((xn, vn, gn)) = accepted else {
            if hist.is_empty() {
                return finish(x, value, grad, iterations, Termination::LineSearch);
            }
            hist.clear();
            continue;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        // curvature pair for the minimization of -F
        let y: Vec<f64> = grad.iter().zip(&gn).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-16 * norm(&s) * norm(&y) {
            hist.push_back((s, y, 1.0 / sy));
            if hist.len() > opts.memory {
                hist.pop_front();
            }
        }
        if vn - value < 1e-12 * value.abs().max(1.0) {
            stalls += 1;
        } else {
            stalls = 0;
        }
        x = xn;
        value = vn;
        grad = gn;
        if stalls >= opts.stall_limit {
            return finish(x, value, grad, iterations, Termination::Stalled);
        }
    }
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        cum += uk;
        let t = (cum - 1.0) / (k + 1) as f64;
        if uk - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}
