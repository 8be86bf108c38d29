//! Positive semidefinite operators with a rank tolerance.

use super::eigen::{eig_hermitian, EigenDecomposition};
use super::matrix::{CMatrix, Hermitian};
use crate::error::{Error, Result};

/// Eigenvalues at or below this are treated as zero when computing supports.
pub const RANK_TOL: f64 = 1e-10;
/// Allowed deviation of the trace of a density operator from one.
pub const TRACE_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct PositiveOperator {
    op: Hermitian,
    eig: EigenDecomposition,
    rank_tol: f64,
}

impl PositiveOperator {
    pub fn new(op: Hermitian) -> Result<Self> {
        Self::with_rank_tol(op, RANK_TOL)
    }

    pub fn with_rank_tol(op: Hermitian, rank_tol: f64) -> Result<Self> {
        let eig = eig_hermitian(&op)?;
        if eig.min() < -rank_tol {
            return Err(Error::NotPositive(eig.min()));
        }
        Ok(PositiveOperator { op, eig, rank_tol })
    }

    /// Checks positivity and unit trace.
    pub fn density(op: Hermitian) -> Result<Self> {
        let p = Self::new(op)?;
        if !p.is_density() {
            return Err(Error::NotNormalized(p.trace()));
        }
        Ok(p)
    }

    pub fn op(&self) -> &Hermitian {
        &self.op
    }

    pub fn into_op(self) -> Hermitian {
        self.op
    }

    pub fn eig(&self) -> &EigenDecomposition {
        &self.eig
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn rank_tol(&self) -> f64 {
        self.rank_tol
    }

    pub fn trace(&self) -> f64 {
        self.op.trace()
    }

    pub fn is_density(&self) -> bool {
        (self.trace() - 1.0).abs() <= TRACE_TOL
    }

    pub fn rank(&self) -> usize {
        self.eig.values.iter().filter(|&&v| v > self.rank_tol).count()
    }

    pub fn support_projector(&self) -> Hermitian {
        self.eig.support_projector(self.rank_tol)
    }

    pub fn support_isometry(&self) -> CMatrix {
        self.eig.support_isometry(self.rank_tol)
    }

    /// True when the support of `self` lies inside the support of `other`.
    pub fn support_within(&self, other: &PositiveOperator) -> bool {
        let p = self.support_projector();
        let q = other.support_projector();
        // ||(I - Q) P||_F^2 = tr P - tr QP
        let leak = p.trace() - q.inner(&p);
        leak <= 1e-8
    }

    pub fn scale(&self, s: f64) -> Result<PositiveOperator> {
        PositiveOperator::with_rank_tol(self.op.scale(s), self.rank_tol)
    }
}
