//! Tensor products, partial traces and the marginal-constraint projection.

use num_complex::Complex64 as C64;

use super::matrix::{CMatrix, Hermitian};
use crate::error::{Error, Result};

/// Split of a Hilbert space as `A (x) R`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BipartiteShape {
    pub dim_a: usize,
    pub dim_r: usize,
}

/// Which factor survives a partial trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keep {
    A,
    R,
}

impl BipartiteShape {
    pub fn new(dim_a: usize, dim_r: usize) -> Result<Self> {
        if dim_a == 0 || dim_r == 0 {
            return Err(Error::InvalidParameter("subsystem dimensions must be positive".into()));
        }
        Ok(BipartiteShape { dim_a, dim_r })
    }

    pub fn total(&self) -> usize {
        self.dim_a * self.dim_r
    }

    pub fn check(&self, x: &Hermitian) -> Result<()> {
        if x.dim() != self.total() {
            return Err(Error::DimensionMismatch { expected: self.total(), found: x.dim() });
        }
        Ok(())
    }
}

pub fn tensor(x: &Hermitian, y: &Hermitian) -> Hermitian {
    Hermitian::symmetrize(x.matrix().kron(y.matrix()))
}

/// Partial trace over the factor that is *not* kept.
pub fn partial_trace(x: &Hermitian, shape: BipartiteShape, keep: Keep) -> Result<Hermitian> {
    shape.check(x)?;
    let (da, dr) = (shape.dim_a, shape.dim_r);
    let m = x.matrix();
    let out = match keep {
        Keep::A => CMatrix::from_fn(da, da, |i, j| {
            (0..dr).map(|k| m[(i * dr + k, j * dr + k)]).sum::<C64>()
        }),
        Keep::R => CMatrix::from_fn(dr, dr, |i, j| {
            (0..da).map(|k| m[(k * dr + i, k * dr + j)]).sum::<C64>()
        }),
    };
    Ok(Hermitian::symmetrize(out))
}

/// Orthogonal projection onto the affine set `{X : tr_R X = target}`:
/// `X + (target - tr_R X) (x) I_R / d_R`.
pub fn project_marginal(x: &Hermitian, shape: BipartiteShape, target: &Hermitian) -> Result<Hermitian> {
    if target.dim() != shape.dim_a {
        return Err(Error::DimensionMismatch { expected: shape.dim_a, found: target.dim() });
    }
    let defect = target.sub(&partial_trace(x, shape, Keep::A)?);
    let correction = tensor(&defect, &Hermitian::identity(shape.dim_r)).scale(1.0 / shape.dim_r as f64);
    Ok(x.add(&correction))
}

/// Removes the component of `g` that would change the A-marginal: `g - tr_R(g) (x) I/d_R`.
pub fn tangent_to_marginal(g: &Hermitian, shape: BipartiteShape) -> Result<Hermitian> {
    let ga = partial_trace(g, shape, Keep::A)?;
    Ok(g.sub(&tensor(&ga, &Hermitian::identity(shape.dim_r)).scale(1.0 / shape.dim_r as f64)))
}

/// For `X1` on `A1 R1` and `X2` on `A2 R2`, returns `X1 (x) X2` reordered onto `(A1 A2) (R1 R2)`.
pub fn tensor_bipartite(
    x1: &Hermitian,
    s1: BipartiteShape,
    x2: &Hermitian,
    s2: BipartiteShape,
) -> Result<(Hermitian, BipartiteShape)> {
    s1.check(x1)?;
    s2.check(x2)?;
    let shape = BipartiteShape::new(s1.dim_a * s2.dim_a, s1.dim_r * s2.dim_r)?;
    let n = shape.total();
    // index in (A1 A2 R1 R2) ordering -> index in (A1 R1 A2 R2) ordering
    let map = |idx: usize| {
        let r = idx % shape.dim_r;
        let a = idx / shape.dim_r;
        let (a1, a2) = (a / s2.dim_a, a % s2.dim_a);
        let (r1, r2) = (r / s2.dim_r, r % s2.dim_r);
        let i1 = a1 * s1.dim_r + r1;
        let i2 = a2 * s2.dim_r + r2;
        (i1, i2)
    };
    let (m1, m2) = (x1.matrix(), x2.matrix());
    let m = CMatrix::from_fn(n, n, |i, j| {
        let (i1, i2) = map(i);
        let (j1, j2) = map(j);
        m1[(i1, j1)] * m2[(i2, j2)]
    });
    Ok((Hermitian::symmetrize(m), shape))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{random_density, random_hermitian};

    fn bell() -> Hermitian {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let z = C64::new(0.0, 0.0);
        Hermitian::from_ket(&[C64::new(s, 0.0), z, z, C64::new(s, 0.0)])
    }

    #[test]
    fn trace_of_product_state() {
        let rho = random_density(2, 2, 1);
        let tau = random_density(3, 3, 2);
        let shape = BipartiteShape::new(2, 3).unwrap();
        let joint = tensor(rho.op(), tau.op());
        let back = partial_trace(&joint, shape, Keep::A).unwrap();
        assert!(back.sub(rho.op()).frobenius_norm() < 1e-14);
        let back_r = partial_trace(&joint, shape, Keep::R).unwrap();
        assert!(back_r.sub(tau.op()).frobenius_norm() < 1e-14);
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let shape = BipartiteShape::new(2, 2).unwrap();
        let a = partial_trace(&bell(), shape, Keep::A).unwrap();
        assert!(a.sub(&Hermitian::identity(2).scale(0.5)).frobenius_norm() < 1e-15);
    }

    #[test]
    fn matches_index_summation_oracle() {
        let x = random_hermitian(6, 3);
        let shape = BipartiteShape::new(2, 3).unwrap();
        let got = partial_trace(&x, shape, Keep::A).unwrap();
        // naive loop with explicit (a, r) index pairs
        for a in 0..2 {
            for b in 0..2 {
                let mut acc = C64::new(0.0, 0.0);
                for r in 0..3 {
                    acc += x[(a * 3 + r, b * 3 + r)];
                }
                assert!((acc - got[(a, b)]).norm() < 1e-12);
            }
        }
        assert!((got.trace() - x.trace()).abs() < 1e-12);
    }

    #[test]
    fn tensor_with_trivial_factor() {
        let x = random_hermitian(3, 4);
        assert_eq!(tensor(&x, &Hermitian::identity(1)), x);
    }

    #[test]
    fn tensor_trace_factorizes() {
        let x = random_hermitian(2, 5);
        let y = random_hermitian(3, 6);
        assert!((tensor(&x, &y).trace() - x.trace() * y.trace()).abs() < 1e-12);
    }

    #[test]
    fn marginal_projection() {
        let shape = BipartiteShape::new(2, 2).unwrap();
        let rho_a = random_density(2, 2, 7);
        let zero = project_marginal(&Hermitian::zeros(4), shape, rho_a.op()).unwrap();
        let expected = tensor(rho_a.op(), &Hermitian::identity(2)).scale(0.5);
        assert!(zero.sub(&expected).frobenius_norm() < 1e-15);
        let again = project_marginal(&zero, shape, rho_a.op()).unwrap();
        assert!(again.sub(&zero).frobenius_norm() < 1e-15);
        let x = random_hermitian(4, 8);
        let p = project_marginal(&x, shape, rho_a.op()).unwrap();
        let back = partial_trace(&p, shape, Keep::A).unwrap();
        assert!(back.sub(rho_a.op()).max_abs_diff(&Hermitian::zeros(2)) < 1e-12);
    }

    #[test]
    fn tensor_bipartite_reorders() {
        let s = BipartiteShape::new(2, 2).unwrap();
        let x1 = random_hermitian(4, 1);
        let x2 = random_hermitian(4, 2);
        let (x, shape) = tensor_bipartite(&x1, s, &x2, s).unwrap();
        let xa = partial_trace(&x, shape, Keep::A).unwrap();
        let expected = tensor(
            &partial_trace(&x1, s, Keep::A).unwrap(),
            &partial_trace(&x2, s, Keep::A).unwrap(),
        );
        assert!(xa.sub(&expected).frobenius_norm() < 1e-12);
    }
}
