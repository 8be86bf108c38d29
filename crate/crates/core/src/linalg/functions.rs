//! Spectral functional calculus and the Daleckii-Krein gradient.

use super::eigen::{eig_hermitian, EigenDecomposition};
use super::matrix::{CMatrix, Hermitian};
use crate::error::{Error, Result};
use crate::interval::Interval;

/// Eigenvalues this close outside the domain are clamped onto it.
pub const DOMAIN_TOL: f64 = 1e-9;

/// A real scalar function with derivative, lifted to Hermitian matrices spectrally.
pub trait ScalarFunction {
    fn value(&self, t: f64) -> f64;
    fn derivative(&self, t: f64) -> f64;
    fn domain(&self) -> Interval {
        Interval::real_line()
    }
}

impl<T: ScalarFunction + ?Sized> ScalarFunction for &T {
    fn value(&self, t: f64) -> f64 {
        (**self).value(t)
    }
    fn derivative(&self, t: f64) -> f64 {
        (**self).derivative(t)
    }
    fn domain(&self) -> Interval {
        (**self).domain()
    }
}

/// A scalar function assembled from closures.
#[derive(Clone)]
pub struct Smooth<F, D> {
    f: F,
    df: D,
    domain: Interval,
}

impl<F, D> Smooth<F, D>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    pub fn new(f: F, df: D) -> Self {
        Smooth { f, df, domain: Interval::real_line() }
    }

    pub fn on(mut self, domain: Interval) -> Self {
        self.domain = domain;
        self
    }
}

impl<F, D> ScalarFunction for Smooth<F, D>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    fn value(&self, t: f64) -> f64 {
        (self.f)(t)
    }
    fn derivative(&self, t: f64) -> f64 {
        (self.df)(t)
    }
    fn domain(&self) -> Interval {
        self.domain
    }
}

pub fn exp_fn() -> impl ScalarFunction + Clone {
    Smooth::new(f64::exp, f64::exp)
}

pub fn log_fn() -> impl ScalarFunction + Clone {
    Smooth::new(f64::ln, |t: f64| 1.0 / t).on(Interval::positive())
}

/// `t^p` on `(0, inf)`.
pub fn power_fn(p: f64) -> impl ScalarFunction + Clone {
    Smooth::new(move |t: f64| t.powf(p), move |t: f64| p * t.powf(p - 1.0)).on(Interval::positive())
}

/// `t^p` on `[0, inf)` for `p >= 0` (used for roots and fractional powers of PSD operators).
pub fn power_nonneg_fn(p: f64) -> impl ScalarFunction + Clone {
    Smooth::new(
        move |t: f64| if t <= 0.0 { 0.0 } else { t.powf(p) },
        move |t: f64| p * t.powf(p - 1.0),
    )
    .on(Interval::nonnegative())
}

fn checked_eigenvalues(eig: &EigenDecomposition, domain: &Interval) -> Result<Vec<f64>> {
    eig.values
        .iter()
        .map(|&t| {
            domain
                .clamp_within(t, DOMAIN_TOL)
                .ok_or(Error::DomainViolation { value: t, domain: domain.to_string() })
        })
        .collect()
}

/// `U diag(phi(lambda)) U^dagger` from a precomputed decomposition.
pub fn apply_with<F: ScalarFunction>(eig: &EigenDecomposition, phi: &F) -> Result<Hermitian> {
    let lam = checked_eigenvalues(eig, &phi.domain())?;
    let vals: Vec<f64> = lam.iter().map(|&t| phi.value(t)).collect();
    Ok(eig.synthesize(&vals))
}

/// Applies `phi` to `h` through its eigendecomposition.
pub fn apply_scalar_function<F: ScalarFunction>(h: &Hermitian, phi: &F) -> Result<Hermitian> {
    apply_with(&eig_hermitian(h)?, phi)
}

/// Pair threshold below which the first divided difference falls back to the midpoint derivative.
pub fn pair_threshold(a: f64, b: f64) -> f64 {
    1e-7 * (1.0 + a.abs() + b.abs())
}

/// First divided-difference (Loewner) matrix of `phi` at the eigenvalues `lam`.
pub fn divided_differences<F: ScalarFunction>(lam: &[f64], phi: &F) -> Vec<Vec<f64>> {
    let n = lam.len();
    let vals: Vec<f64> = lam.iter().map(|&t| phi.value(t)).collect();
    let mut delta = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let (a, b) = (lam[i], lam[j]);
            let d = if (a - b).abs() > pair_threshold(a, b) {
                (vals[i] - vals[j]) / (a - b)
            } else {
                phi.derivative(0.5 * (a + b))
            };
            delta[i][j] = d;
            delta[j][i] = d;
        }
    }
    delta
}

/// Gradient of `gamma -> tr[W phi(gamma)]` at the decomposed point, i.e.
/// `U (Delta o (U^dagger W U)) U^dagger` with `Delta` the divided-difference matrix.
pub fn frechet_adjoint_with<F: ScalarFunction>(
    eig: &EigenDecomposition,
    phi: &F,
    w: &Hermitian,
) -> Result<Hermitian> {
    if w.dim() != eig.dim() {
        return Err(Error::DimensionMismatch { expected: eig.dim(), found: w.dim() });
    }
    let lam = checked_eigenvalues(eig, &phi.domain())?;
    let delta = divided_differences(&lam, phi);
    let u = &eig.vectors;
    let mut inner = u.adjoint().matmul(w.matrix()).matmul(u);
    let n = eig.dim();
    for i in 0..n {
        for j in 0..n {
            inner[(i, j)] *= delta[i][j];
        }
    }
    Ok(Hermitian::symmetrize(u.matmul(&inner).matmul(&u.adjoint())))
}

pub fn frechet_adjoint<F: ScalarFunction>(h: &Hermitian, phi: &F, w: &Hermitian) -> Result<Hermitian> {
    frechet_adjoint_with(&eig_hermitian(h)?, phi, w)
}

/// `(U^dagger W U)` diagonal, i.e. `<u_k|W|u_k>` for each eigenvector.
pub fn pinch_diagonal(eig: &EigenDecomposition, w: &Hermitian) -> Vec<f64> {
    let u: &CMatrix = &eig.vectors;
    let n = eig.dim();
    (0..n)
        .map(|k| {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc += (u[(i, k)].conj() * w[(i, j)] * u[(j, k)]).re;
                }
            }
            acc
        })
        .collect()
}
