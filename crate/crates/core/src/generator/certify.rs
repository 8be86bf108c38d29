//! Randomized certifiers for operator convexity and operator monotonicity.

use rand::Rng;

use crate::interval::Interval;
use crate::linalg::eigen::eig_hermitian;
use crate::linalg::functions::{apply_scalar_function, ScalarFunction};
use crate::linalg::matrix::Hermitian;
use crate::linalg::random::{haar_unitary_with, rng_from_seed};

/// Violations smaller than this (as a negative eigenvalue) are attributed to round-off.
pub const CERT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertificationReport {
    pub pass: bool,
    /// Most negative eigenvalue of the tested gap, over all trials (0 if never negative).
    pub worst_violation: f64,
    pub trials: usize,
}

/// A spectrum point strictly inside `iv`, drawn on a moderate scale.
fn sample_point<R: Rng + ?Sized>(iv: &Interval, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    match (iv.lo.is_finite(), iv.hi.is_finite()) {
        (true, true) => iv.lo + (iv.hi - iv.lo) * (0.02 + 0.96 * u),
        (true, false) => iv.lo + (4.0 * u - 2.0).exp(),
        (false, true) => iv.hi - (4.0 * u - 2.0).exp(),
        (false, false) => 6.0 * u - 3.0,
    }
}

fn sample_in<R: Rng + ?Sized>(iv: &Interval, dim: usize, rng: &mut R) -> Hermitian {
    let d: Vec<f64> = (0..dim).map(|_| sample_point(iv, rng)).collect();
    Hermitian::from_real_diagonal(&d).conjugate_by(&haar_unitary_with(dim, rng))
}

/// PSD perturbation with spectrum in `[0, scale]`.
fn sample_psd<R: Rng + ?Sized>(dim: usize, scale: f64, rng: &mut R) -> Hermitian {
    let d: Vec<f64> = (0..dim).map(|_| scale * rng.random::<f64>()).collect();
    Hermitian::from_real_diagonal(&d).conjugate_by(&haar_unitary_with(dim, rng))
}

fn min_eig(h: &Hermitian) -> f64 {
    eig_hermitian(h).map(|e| e.min()).unwrap_or(f64::NEG_INFINITY)
}

fn report(worst: f64, trials: usize) -> CertificationReport {
    CertificationReport { pass: worst >= -CERT_TOL, worst_violation: worst.min(0.0), trials }
}

/// Checks `phi((A+B)/2) <= (phi(A) + phi(B))/2` on random pairs with spectra in `interval`.
pub fn check_operator_convex<F: ScalarFunction>(
    phi: &F,
    interval: Interval,
    dim: usize,
    trials: usize,
    seed: u64,
) -> CertificationReport {
    convexity_gap(phi, interval, dim, trials, seed, 1.0)
}

/// Checks `phi((A+B)/2) >= (phi(A) + phi(B))/2`.
pub fn check_operator_concave<F: ScalarFunction>(
    phi: &F,
    interval: Interval,
    dim: usize,
    trials: usize,
    seed: u64,
) -> CertificationReport {
    convexity_gap(phi, interval, dim, trials, seed, -1.0)
}

fn convexity_gap<F: ScalarFunction>(
    phi: &F,
    interval: Interval,
    dim: usize,
    trials: usize,
    seed: u64,
    sign: f64,
) -> CertificationReport {
    let mut rng = rng_from_seed(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let a = sample_in(&interval, dim, &mut rng);
        let b = sample_in(&interval, dim, &mut rng);
        let mid = a.add(&b).scale(0.5);
        let (fa, fb, fm) = match (
            apply_scalar_function(&a, phi),
            apply_scalar_function(&b, phi),
            apply_scalar_function(&mid, phi),
        ) {
            (Ok(x), Ok(y), Ok(z)) => (x, y, z),
            _ => continue,
        };
        let gap = fa.add(&fb).scale(0.5).sub(&fm).scale(sign);
        worst = worst.min(min_eig(&gap));
    }
    report(worst, trials)
}

/// Checks `A <= B => phi(A) <= phi(B)` on random ordered pairs with spectra in `interval`.
pub fn check_operator_monotone<F: ScalarFunction>(
    phi: &F,
    interval: Interval,
    dim: usize,
    trials: usize,
    seed: u64,
) -> CertificationReport {
    let mut rng = rng_from_seed(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let (a, b) = if interval.is_bounded() {
            let half = 0.5 * (interval.hi - interval.lo);
            let lower = Interval::new(interval.lo, interval.lo + half, interval.lo_closed, true);
            let a = sample_in(&lower, dim, &mut rng);
            let p = sample_psd(dim, 0.98 * half, &mut rng);
            let b = a.add(&p);
            (a, b)
        } else if interval.lo.is_finite() {
            let a = sample_in(&interval, dim, &mut rng);
            let p = sample_psd(dim, 2.0, &mut rng);
            let b = a.add(&p);
            (a, b)
        } else {
            let b = sample_in(&interval, dim, &mut rng);
            let p = sample_psd(dim, 2.0, &mut rng);
            (b.sub(&p), b)
        };
        let (fa, fb) = match (apply_scalar_function(&a, phi), apply_scalar_function(&b, phi)) {
            (Ok(x), Ok(y)) => (x, y),
            _ => continue,
        };
        worst = worst.min(min_eig(&fb.sub(&fa)));
    }
    report(worst, trials)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::FGenerator;
    use crate::linalg::functions::{log_fn, Smooth};

    #[test]
    fn square_is_operator_convex() {
        let sq = Smooth::new(|t: f64| t * t, |t: f64| 2.0 * t);
        assert!(check_operator_convex(&sq, Interval::real_line(), 3, 200, 1).pass);
    }

    #[test]
    fn cube_is_not_operator_convex() {
        let cube = Smooth::new(|t: f64| t * t * t, |t: f64| 3.0 * t * t).on(Interval::positive());
        let r = check_operator_convex(&cube, Interval::positive(), 3, 500, 2);
        assert!(!r.pass, "worst {}", r.worst_violation);
    }

    #[test]
    fn conjugate_low_order_is_convex_and_monotone() {
        let g = FGenerator::renyi(0.3).unwrap();
        let dom = g.fstar_domain();
        assert!(check_operator_convex(&g.fstar_fn(), dom, 3, 200, 3).pass);
        assert!(check_operator_monotone(&g.fstar_fn(), dom, 3, 200, 4).pass);
    }

    #[test]
    fn negative_inverse_is_monotone() {
        let f = Smooth::new(|t: f64| -1.0 / t, |t: f64| 1.0 / (t * t)).on(Interval::positive());
        assert!(check_operator_monotone(&f, Interval::positive(), 3, 200, 5).pass);
    }

    #[test]
    fn square_is_not_monotone() {
        let sq = Smooth::new(|t: f64| t * t, |t: f64| 2.0 * t).on(Interval::positive());
        assert!(!check_operator_monotone(&sq, Interval::positive(), 3, 500, 6).pass);
    }

    #[test]
    fn entropy_inverse_is_concave_and_monotone() {
        let g = FGenerator::kl();
        let inv = g.fstar_inverse_fn();
        assert!(check_operator_concave(&inv, g.fstar_range(), 3, 200, 7).pass);
        assert!(check_operator_monotone(&inv, g.fstar_range(), 3, 200, 8).pass);
        assert!(check_operator_monotone(&log_fn(), Interval::positive(), 3, 100, 9).pass);
    }
}
