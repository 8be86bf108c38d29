//! Spectral closed forms used as comparison points for the measured quantities.

use crate::error::{Error, Result};
use crate::linalg::eigen::eig_hermitian;
use crate::linalg::functions::{apply_with, power_fn};
use crate::linalg::matrix::Hermitian;
use crate::linalg::positive::PositiveOperator;

fn same_dim(rho: &PositiveOperator, sigma: &PositiveOperator) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    Ok(())
}

/// `P^e` on the support of `P`, zero on its kernel.
fn support_power(p: &PositiveOperator, e: f64) -> Hermitian {
    let d: Vec<f64> = p.eig().values.iter().map(|&v| if v > p.rank_tol() { v.powf(e) } else { 0.0 }).collect();
    p.eig().synthesize(&d)
}

/// Sum of `v^e` over eigenvalues that are not round-off zeros.
fn spectral_power_sum(values: &[f64], e: f64) -> f64 {
    let top = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    values.iter().filter(|&&v| v > 1e-13 * top).map(|&v| v.powf(e)).sum()
}

fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// `tr[rho log rho]`, i.e. the relative entropy with respect to the identity.
pub fn relative_entropy_to_identity(rho: &PositiveOperator) -> f64 {
    rho.eig().values.iter().filter(|&&v| v > rho.rank_tol()).map(|&v| xlogx(v)).sum()
}

/// Umegaki relative entropy `tr[rho (log rho - log sigma)]`, `+inf` on support violation.
pub fn umegaki(rho: &PositiveOperator, sigma: &PositiveOperator) -> Result<f64> {
    same_dim(rho, sigma)?;
    if !rho.support_within(sigma) {
        return Ok(f64::INFINITY);
    }
    let e = sigma.eig();
    let u = &e.vectors;
    let mut cross = 0.0;
    for (k, &s) in e.values.iter().enumerate() {
        if s <= sigma.rank_tol() {
            continue;
        }
        let v = u.column(k);
        let mut w = 0.0;
        for i in 0..rho.dim() {
            for j in 0..rho.dim() {
                w += (v[i].conj() * rho.op()[(i, j)] * v[j]).re;
            }
        }
        cross += w * s.ln();
    }
    Ok(relative_entropy_to_identity(rho) - cross)
}

/// Fidelity `|| sqrt(rho) sqrt(sigma) ||_1 = tr sqrt(sqrt(rho) sigma sqrt(rho))`.
pub fn fidelity(rho: &PositiveOperator, sigma: &PositiveOperator) -> Result<f64> {
    same_dim(rho, sigma)?;
    let sr = support_power(rho, 0.5);
    let inner = sigma.op().conjugate_by(sr.matrix());
    let e = eig_hermitian(&inner)?;
    Ok(spectral_power_sum(&e.values, 0.5))
}

/// `0.5 ||rho - sigma||_1`.
pub fn trace_distance(rho: &PositiveOperator, sigma: &PositiveOperator) -> Result<f64> {
    same_dim(rho, sigma)?;
    let e = eig_hermitian(&rho.op().sub(sigma.op()))?;
    Ok(0.5 * e.values.iter().map(|v| v.abs()).sum::<f64>())
}

/// `log inf{lambda : rho <= lambda sigma}`; `+inf` if the support of `rho` leaves that of `sigma`.
pub fn dmax(rho: &PositiveOperator, sigma: &PositiveOperator) -> Result<f64> {
    same_dim(rho, sigma)?;
    if !rho.support_within(sigma) {
        return Ok(f64::INFINITY);
    }
    let v = sigma.support_isometry();
    let sc = sigma.op().compress(&v);
    let rc = rho.op().compress(&v);
    let inv_sqrt = apply_with(&eig_hermitian(&sc)?, &power_fn(-0.5))?;
    let m = rc.conjugate_by(inv_sqrt.matrix());
    Ok(eig_hermitian(&m)?.max().ln())
}

/// Sandwiched Renyi divergence `log tr[(sigma^{(1-a)/2a} rho sigma^{(1-a)/2a})^a] / (a - 1)` for `a >= 1/2`;
/// order 1 is the Umegaki relative entropy.
pub fn sandwiched_renyi(rho: &PositiveOperator, sigma: &PositiveOperator, alpha: f64) -> Result<f64> {
    same_dim(rho, sigma)?;
    if !(alpha >= 0.5) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("sandwiched order must be finite and >= 1/2, got {alpha}")));
    }
    if alpha == 1.0 {
        return umegaki(rho, sigma);
    }
    let expo = (1.0 - alpha) / (2.0 * alpha);
    let q = if alpha > 1.0 {
        if !rho.support_within(sigma) {
            return Ok(f64::INFINITY);
        }
        let v = sigma.support_isometry();
        let sc = sigma.op().compress(&v);
        let rc = rho.op().compress(&v);
        let s = apply_with(&eig_hermitian(&sc)?, &power_fn(expo))?;
        sandwich_trace(&rc, &s, alpha)?
    } else {
        let s = support_power(sigma, expo);
        sandwich_trace(rho.op(), &s, alpha)?
    };
    if q <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(q.ln() / (alpha - 1.0))
}

fn sandwich_trace(rho: &Hermitian, s: &Hermitian, alpha: f64) -> Result<f64> {
    let m = rho.conjugate_by(s.matrix());
    let e = eig_hermitian(&m)?;
    Ok(spectral_power_sum(&e.values, alpha))
}

/// Classical Renyi divergence of two weight vectors, `log sum p^a q^{1-a} / (a - 1)`.
/// Order 0 uses the mass of `q` on the support of `p`; order 1 is the Kullback-Leibler divergence.
pub fn classical_renyi(p: &[f64], q: &[f64], alpha: f64) -> f64 {
    let pairs = p.iter().copied().zip(q.iter().copied()).filter(|&(a, _)| a > 0.0);
    if (alpha >= 1.0) && pairs.clone().any(|(_, b)| b <= 0.0) {
        return f64::INFINITY;
    }
    if alpha == 1.0 {
        return pairs.map(|(a, b)| a * (a / b).ln()).sum();
    }
    let s: f64 = if alpha == 0.0 {
        pairs.map(|(_, b)| b).sum()
    } else {
        pairs.filter(|&(_, b)| b > 0.0).map(|(a, b)| a.powf(alpha) * b.powf(1.0 - alpha)).sum()
    };
    if s <= 0.0 {
        return f64::INFINITY;
    }
    s.ln() / (alpha - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::random_density;
    use num_complex::Complex64 as C64;

    fn pure0() -> PositiveOperator {
        PositiveOperator::new(Hermitian::from_real_diagonal(&[1.0, 0.0])).unwrap()
    }

    fn maxmix() -> PositiveOperator {
        PositiveOperator::new(Hermitian::identity(2).scale(0.5)).unwrap()
    }

    #[test]
    fn self_divergences_vanish() {
        let rho = random_density(3, 3, 1);
        assert!(umegaki(&rho, &rho).unwrap().abs() < 1e-12);
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-10);
        assert!(dmax(&rho, &rho).unwrap().abs() < 1e-10);
        assert!(sandwiched_renyi(&rho, &rho, 2.0).unwrap().abs() < 1e-10);
        assert!(sandwiched_renyi(&rho, &rho, 0.7).unwrap().abs() < 1e-10);
    }

    #[test]
    fn pure_against_maximally_mixed() {
        let l2 = 2f64.ln();
        assert!((umegaki(&pure0(), &maxmix()).unwrap() - l2).abs() < 1e-14);
        assert!((dmax(&pure0(), &maxmix()).unwrap() - l2).abs() < 1e-14);
        assert_eq!(umegaki(&maxmix(), &pure0()).unwrap(), f64::INFINITY);
    }

    #[test]
    fn pure_state_fidelity() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let phi = [C64::new(s, 0.0), C64::new(0.0, s)];
        let a = PositiveOperator::new(Hermitian::from_ket(&psi)).unwrap();
        let b = PositiveOperator::new(Hermitian::from_ket(&phi)).unwrap();
        assert!((fidelity(&a, &b).unwrap() - s).abs() < 1e-7);
    }

    #[test]
    fn commuting_sandwiched_is_classical() {
        let p = [0.7, 0.2, 0.1];
        let q = [0.3, 0.3, 0.4];
        let rho = PositiveOperator::new(Hermitian::from_real_diagonal(&p)).unwrap();
        let sigma = PositiveOperator::new(Hermitian::from_real_diagonal(&q)).unwrap();
        for &a in &[0.5, 0.8, 1.0, 2.0, 3.5] {
            let d = sandwiched_renyi(&rho, &sigma, a).unwrap();
            assert!((d - classical_renyi(&p, &q, a)).abs() < 1e-12, "alpha {a}");
        }
    }

    #[test]
    fn sandwiched_half_is_fidelity_exponent() {
        for seed in 0..5 {
            let rho = random_density(3, 3, seed);
            let sigma = random_density(3, 2, seed + 50);
            let d = sandwiched_renyi(&rho, &sigma, 0.5).unwrap();
            let f = fidelity(&rho, &sigma).unwrap();
            assert!((d + 2.0 * f.ln()).abs() < 1e-8, "{d} {f}");
        }
    }

    #[test]
    fn dmax_matches_bisection_oracle() {
        let rho = random_density(3, 3, 4);
        let sigma = random_density(3, 3, 5);
        let feasible = |l: f64| eig_hermitian(&sigma.op().scale(l).sub(rho.op())).unwrap().min() >= 0.0;
        let (mut lo, mut hi) = (0.0, 1.0);
        while !feasible(hi) {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if feasible(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!((dmax(&rho, &sigma).unwrap() - hi.ln()).abs() < 1e-8);
    }

    #[test]
    fn trace_distance_orthogonal() {
        let a = pure0();
        let b = PositiveOperator::new(Hermitian::from_real_diagonal(&[0.0, 1.0])).unwrap();
        assert!((trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-15);
    }
}
