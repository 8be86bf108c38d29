//! Cyclic Jacobi eigensolver for complex Hermitian matrices.

use num_complex::Complex64 as C64;

use super::matrix::{CMatrix, Hermitian};
use crate::error::{Error, Result};

/// Off-diagonal Frobenius mass, relative to `||H||_F`, at which a sweep stops.
pub const JACOBI_REL_TOL: f64 = 1e-13;
/// Sweep cap before reporting non-convergence.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// `H = U diag(values) U^dagger`, eigenvalues ascending, eigenvectors as columns of `U`.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Rebuilds `U diag(d) U^dagger` for arbitrary real weights `d`.
    pub fn synthesize(&self, d: &[f64]) -> Hermitian {
        let n = self.dim();
        let u = &self.vectors;
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut acc = C64::new(0.0, 0.0);
                for (k, &dk) in d.iter().enumerate() {
                    if dk != 0.0 {
                        acc += u[(i, k)] * u[(j, k)].conj() * dk;
                    }
                }
                m[(i, j)] = acc;
                m[(j, i)] = acc.conj();
            }
        }
        Hermitian::symmetrize(m)
    }

    pub fn reconstruct(&self) -> Hermitian {
        self.synthesize(&self.values)
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.dim() - 1]
    }

    /// Column `k` of `U`.
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// Projector onto the span of the eigenvectors whose eigenvalue exceeds `tol`.
    pub fn support_projector(&self, tol: f64) -> Hermitian {
        let d: Vec<f64> = self.values.iter().map(|&v| if v > tol { 1.0 } else { 0.0 }).collect();
        self.synthesize(&d)
    }

    /// Isometry whose columns span the eigenvectors with eigenvalue above `tol`.
    pub fn support_isometry(&self, tol: f64) -> CMatrix {
        let keep: Vec<usize> = (0..self.dim()).filter(|&k| self.values[k] > tol).collect();
        self.vectors.select_columns(&keep)
    }
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Eigendecomposition by cyclic complex Jacobi rotations.
///
/// Each rotation first removes the phase of `a[p][q]` with a diagonal unitary and then
/// applies the real symmetric Jacobi rotation to the resulting real 2x2 block. Sweeps
/// stop once the off-diagonal Frobenius mass is below `JACOBI_REL_TOL * ||H||_F`.
pub fn eig_hermitian(h: &Hermitian) -> Result<EigenDecomposition> {
    let n = h.dim();
    let mut a = h.matrix().clone();
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius_norm();
    let target = JACOBI_REL_TOL * scale;

    let mut converged = n == 1 || scale == 0.0;
    let mut sweeps = 0;
    while !converged {
        if off_diagonal_norm(&a) <= target {
            converged = true;
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::EigenNoConvergence { sweeps, residual: off_diagonal_norm(&a) });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    debug_assert!(converged);

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = v.select_columns(&order);
    Ok(EigenDecomposition { values, vectors })
}

fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let g = apq.norm();
    if g == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // skip rotations that cannot change the diagonal in floating point
    if app.abs() + 100.0 * g == app.abs() && aqq.abs() + 100.0 * g == aqq.abs() {
        a[(p, q)] = C64::new(0.0, 0.0);
        a[(q, p)] = C64::new(0.0, 0.0);
        return;
    }
    let phase = apq / g; // e^{i theta}
    let theta = (aqq - app) / (2.0 * g);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = a.rows();

    // U restricted to (p, q): [[c, s], [-s e^{-i theta}, c e^{-i theta}]]
    let e_m = phase.conj();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * (e_m * s);
        a[(k, q)] = akp * s + akq * (e_m * c);
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * (phase * s);
        a[(q, k)] = apk * s + aqk * (phase * c);
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * (e_m * s);
        v[(k, q)] = vkp * s + vkq * (e_m * c);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::random_hermitian;

    fn unitarity_defect(u: &CMatrix) -> f64 {
        u.adjoint().matmul(u).sub(&CMatrix::identity(u.cols())).frobenius_norm()
    }

    #[test]
    fn identity_spectrum() {
        let e = eig_hermitian(&Hermitian::identity(3)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn pauli_x() {
        let x = Hermitian::from_pairs(&[vec![(0.0, 0.0), (1.0, 0.0)], vec![(1.0, 0.0), (0.0, 0.0)]])
            .unwrap();
        let e = eig_hermitian(&x).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-15);
        assert!((e.values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pauli_y_complex_entries() {
        let y = Hermitian::from_pairs(&[vec![(0.0, 0.0), (0.0, -1.0)], vec![(0.0, 1.0), (0.0, 0.0)]])
            .unwrap();
        let e = eig_hermitian(&y).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-15 && (e.values[1] - 1.0).abs() < 1e-15);
        assert!(e.reconstruct().sub(&y).frobenius_norm() < 1e-14);
    }

    #[test]
    fn random_reconstruction_dim6() {
        let h = random_hermitian(6, 42);
        let e = eig_hermitian(&h).unwrap();
        assert!(e.reconstruct().sub(&h).frobenius_norm() <= 1e-10);
        assert!(unitarity_defect(&e.vectors) <= 1e-10);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn hundred_seeded_matrices_deterministic() {
        for seed in 0..100u64 {
            let n = 1 + (seed as usize % 8);
            let h = random_hermitian(n, seed);
            let e1 = eig_hermitian(&h).unwrap();
            let e2 = eig_hermitian(&h).unwrap();
            assert_eq!(e1.values, e2.values);
            assert_eq!(e1.vectors, e2.vectors);
            assert!(e1.reconstruct().sub(&h).frobenius_norm() <= 1e-10, "seed {seed}");
            assert!(unitarity_defect(&e1.vectors) <= 1e-10, "seed {seed}");
        }
    }

    #[test]
    fn degenerate_spectrum() {
        let h = Hermitian::from_real_diagonal(&[2.0, 2.0, -1.0, 2.0]);
        let u = crate::linalg::random::haar_unitary(4, 3);
        let g = h.conjugate_by(&u);
        let e = eig_hermitian(&g).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-12);
        for k in 1..4 {
            assert!((e.values[k] - 2.0).abs() < 1e-12);
        }
    }
}
