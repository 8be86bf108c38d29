use super::FGenerator;
use crate::error::{Error, Result};

/// A finite nonnegative weight vector (not necessarily normalized).
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalDistribution {
    weights: Vec<f64>,
}

impl ClassicalDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(&w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameter(format!("weights must be finite and nonnegative, got {w}")));
        }
        Ok(ClassicalDistribution { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// `sum_x Q(x) f(P(x)/Q(x))` with `0 f(0/0) = 0`, `f(0) = lim_{t->0} f(t)` and
/// `0 f(a/0) = a lim_{t->0} t f(1/t)`. Returns `+inf` when any term diverges.
pub fn classical_f_divergence(p: &ClassicalDistribution, q: &ClassicalDistribution, g: &FGenerator) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), found: q.len() });
    }
    let mut total = 0.0;
    for (&px, &qx) in p.weights.iter().zip(q.weights.iter()) {
        let term = g.perspective(px, qx);
        if term.is_infinite() {
            return Ok(f64::INFINITY);
        }
        total += term;
    }
    Ok(total)
}
