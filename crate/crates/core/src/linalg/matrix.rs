//! Dense complex matrices and the Hermitian newtype.

use std::ops::{Index, IndexMut};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    /// Builds a matrix from row vectors; all rows must share a length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::DimensionMismatch { expected: c, found: bad.len() });
        }
        Ok(CMatrix { rows: r, cols: c, data: rows.iter().flatten().copied().collect() })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// Outer product `|u><v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        CMatrix::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Keeps the listed columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> CMatrix {
        CMatrix::from_fn(self.rows, cols.len(), |i, k| self[(i, cols[k])])
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> CMatrix {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    fn zip_with(&self, other: &CMatrix, f: impl Fn(C64, C64) -> C64) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Kronecker product.
    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let (r2, c2) = (other.rows, other.cols);
        CMatrix::from_fn(self.rows * r2, self.cols * c2, |i, j| {
            self[(i / r2, j / c2)] * other[(i % r2, j % c2)]
        })
    }

    /// `max |A - A^dagger|` entrywise.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// A square complex matrix equal to its conjugate transpose.
///
/// Every constructor symmetrizes its input as `(A + A^dagger)/2`, so round-off
/// from upstream products never accumulates into a non-Hermitian operand.
#[derive(Clone, Debug, PartialEq)]
pub struct Hermitian(CMatrix);

impl Hermitian {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare(m.rows(), m.cols()));
        }
        if m.rows() == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        Ok(Hermitian::symmetrize(m))
    }

    pub(crate) fn symmetrize(m: CMatrix) -> Self {
        let n = m.rows();
        let mut out = m;
        for i in 0..n {
            out[(i, i)] = C64::new(out[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let avg = 0.5 * (out[(i, j)] + out[(j, i)].conj());
                out[(i, j)] = avg;
                out[(j, i)] = avg.conj();
            }
        }
        Hermitian(out)
    }

    pub fn zeros(n: usize) -> Self {
        Hermitian(CMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Hermitian(CMatrix::identity(n))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Hermitian(CMatrix::from_real_diagonal(diag))
    }

    /// Projector `|v><v|` (not normalized).
    pub fn from_ket(v: &[C64]) -> Self {
        Hermitian::symmetrize(CMatrix::outer(v, v))
    }

    /// Builds from real/imaginary parts given as `rows[i][j] = (re, im)`.
    pub fn from_pairs(rows: &[Vec<(f64, f64)>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> =
            rows.iter().map(|r| r.iter().map(|&(re, im)| C64::new(re, im)).collect()).collect();
        Hermitian::new(CMatrix::from_rows(&rows)?)
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.frobenius_norm()
    }

    /// Real inner product `Re tr[A B]`, i.e. the Frobenius inner product on Hermitian matrices.
    pub fn inner(&self, other: &Hermitian) -> f64 {
        assert_eq!(self.dim(), other.dim(), "inner product dimension mismatch");
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let a = self.0[(i, j)];
                let b = other.0[(j, i)];
                acc += a.re * b.re - a.im * b.im;
            }
        }
        acc
    }

    pub fn add(&self, other: &Hermitian) -> Hermitian {
        Hermitian(self.0.add(&other.0))
    }

    pub fn sub(&self, other: &Hermitian) -> Hermitian {
        Hermitian(self.0.sub(&other.0))
    }

    pub fn scale(&self, s: f64) -> Hermitian {
        Hermitian(self.0.scale(s))
    }

    /// `self + s * other`
    pub fn axpy(&self, s: f64, other: &Hermitian) -> Hermitian {
        Hermitian(self.0.add(&other.0.scale(s)))
    }

    pub fn add_identity(&self, s: f64) -> Hermitian {
        let mut m = self.0.clone();
        for i in 0..self.dim() {
            m[(i, i)] += s;
        }
        Hermitian(m)
    }

    /// `U H U^dagger` for a (possibly rectangular) `U`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Hermitian {
        Hermitian::symmetrize(u.matmul(&self.0).matmul(&u.adjoint()))
    }

    /// `V^dagger H V`, the compression onto the range of an isometry `V`.
    pub fn compress(&self, v: &CMatrix) -> Hermitian {
        Hermitian::symmetrize(v.adjoint().matmul(&self.0).matmul(v))
    }

    /// Coordinates in an orthonormal basis of the real vector space of Hermitian matrices:
    /// diagonal entries, then `sqrt(2) Re` and `sqrt(2) Im` of the strict upper triangle.
    pub fn to_coords(&self) -> Vec<f64> {
        let n = self.dim();
        let s = std::f64::consts::SQRT_2;
        let mut v = Vec::with_capacity(n * n);
        for i in 0..n {
            v.push(self.0[(i, i)].re);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                v.push(s * self.0[(i, j)].re);
                v.push(s * self.0[(i, j)].im);
            }
        }
        v
    }

    /// Inverse of [`Hermitian::to_coords`].
    pub fn from_coords(n: usize, v: &[f64]) -> Hermitian {
        assert_eq!(v.len(), n * n, "coordinate vector has wrong length");
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(v[i], 0.0);
        }
        let mut k = n;
        for i in 0..n {
            for j in (i + 1)..n {
                let z = C64::new(s * v[k], s * v[k + 1]);
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
                k += 2;
            }
        }
        Hermitian(m)
    }

    /// Max-norm of the difference, entrywise.
    pub fn max_abs_diff(&self, other: &Hermitian) -> f64 {
        self.0
            .as_slice()
            .iter()
            .zip(other.0.as_slice())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for Hermitian {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructor_rehermitizes() {
        let m = CMatrix::from_rows(&[
            vec![C64::new(1.0, 0.3), C64::new(2.0, 1.0)],
            vec![C64::new(2.0, 0.0), C64::new(3.0, 0.0)],
        ])
        .unwrap();
        let h = Hermitian::new(m).unwrap();
        assert!(h.matrix().hermiticity_defect() < 1e-15);
        assert_eq!(h[(0, 1)], C64::new(2.0, 0.5));
        assert_eq!(h[(0, 0)].im, 0.0);
    }

    #[test]
    fn rejects_non_square() {
        assert!(matches!(Hermitian::new(CMatrix::zeros(2, 3)), Err(Error::NotSquare(2, 3))));
    }

    #[test]
    fn coords_are_isometric() {
        let h = Hermitian::from_pairs(&[
            vec![(1.0, 0.0), (0.5, -0.25)],
            vec![(0.5, 0.25), (-2.0, 0.0)],
        ])
        .unwrap();
        let v = h.to_coords();
        let norm2: f64 = v.iter().map(|x| x * x).sum();
        assert!((norm2 - h.inner(&h)).abs() < 1e-14);
        assert!(Hermitian::from_coords(2, &v).max_abs_diff(&h) < 1e-15);
    }

    #[test]
    fn kron_of_diagonals() {
        let a = CMatrix::from_real_diagonal(&[1.0, 2.0]);
        let b = CMatrix::from_real_diagonal(&[3.0, 4.0]);
        assert_eq!(a.kron(&b), CMatrix::from_real_diagonal(&[3.0, 4.0, 6.0, 8.0]));
    }
}
