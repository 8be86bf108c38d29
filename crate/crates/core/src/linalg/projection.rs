//! Projections onto the PSD cone and Dykstra's alternating projections.

use super::eigen::eig_hermitian;
use super::matrix::Hermitian;
use crate::error::{Error, Result};

pub const DYKSTRA_TOL: f64 = 1e-9;
pub const DYKSTRA_MAX_SWEEPS: usize = 10_000;
/// Consecutive motionless sweeps with an unmet residual that signal an empty intersection.
const STALL_SWEEPS: usize = 20;

/// Nearest PSD matrix in Frobenius norm (negative eigenvalues clipped to zero).
pub fn project_psd(h: &Hermitian) -> Hermitian {
    project_psd_floor(h, 0.0)
}

/// Nearest matrix with all eigenvalues at least `floor`.
pub fn project_psd_floor(h: &Hermitian, floor: f64) -> Hermitian {
    let e = match eig_hermitian(h) {
        Ok(e) => e,
        Err(_) => return h.clone(),
    };
    if e.min() >= floor {
        return h.clone();
    }
    let d: Vec<f64> = e.values.iter().map(|&v| v.max(floor)).collect();
    e.synthesize(&d)
}

/// Projection onto `{X : tr[X Y] <= b}`.
pub fn project_halfspace(x: &Hermitian, y: &Hermitian, b: f64) -> Hermitian {
    let v = x.inner(y);
    if v <= b {
        return x.clone();
    }
    let nn = y.inner(y);
    if nn == 0.0 {
        return x.clone();
    }
    x.axpy(-(v - b) / nn, y)
}

/// A projection onto a closed convex set.
pub type Projection<'a> = &'a dyn Fn(&Hermitian) -> Hermitian;

/// Dykstra's algorithm for the projection of `x0` onto the intersection of convex sets.
///
/// Stops when one full sweep changes the iterate by at most `tol` and every set is within
/// `tol` of the iterate. When the iterate stops moving altogether while some set remains
/// farther than `tol` away, the intersection is reported empty without exhausting the sweeps.
pub fn dykstra(projections: &[Projection<'_>], x0: &Hermitian, tol: f64, max_sweeps: usize) -> Result<Hermitian> {
    let m = projections.len();
    if m == 0 {
        return Ok(x0.clone());
    }
    let residuals = |x: &Hermitian| -> Vec<f64> {
        projections.iter().map(|p| p(x).sub(x).frobenius_norm()).collect()
    };
    let r0 = residuals(x0);
    if r0.iter().all(|&r| r <= tol) {
        return Ok(x0.clone());
    }
    let n = x0.dim();
    let mut x = x0.clone();
    let mut incr = vec![Hermitian::zeros(n); m];
    let mut frozen = 0;
    for sweep in 0..max_sweeps {
        let start = x.clone();
        for (i, p) in projections.iter().enumerate() {
            let y = x.add(&incr[i]);
            let px = p(&y);
            incr[i] = y.sub(&px);
            x = px;
        }
        let moved = x.sub(&start).frobenius_norm();
        if moved <= tol * 0.1 {
            let r = residuals(&x);
            if r.iter().all(|&v| v <= tol) {
                return Ok(x);
            }
            if moved <= 1e-14 * (1.0 + x.frobenius_norm()) {
                frozen += 1;
                if frozen >= STALL_SWEEPS {
                    return Err(Error::ProjectionNoConvergence { sweeps: sweep + 1, residuals: r });
                }
            } else {
                frozen = 0;
            }
        } else {
            frozen = 0;
        }
    }
    Err(Error::ProjectionNoConvergence { sweeps: max_sweeps, residuals: residuals(&x) })
}
