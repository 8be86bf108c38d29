//! Seeded random states, Hermitian matrices and Haar unitaries.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::matrix::{CMatrix, Hermitian};
use super::positive::PositiveOperator;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Complex Ginibre matrix with standard normal real and imaginary parts.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn random_hermitian_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Hermitian {
    Hermitian::symmetrize(ginibre(n, n, rng))
}

pub fn random_hermitian(n: usize, seed: u64) -> Hermitian {
    random_hermitian_with(n, &mut rng_from_seed(seed))
}

/// Haar-distributed unitary from modified Gram-Schmidt on a Ginibre matrix.
pub fn haar_unitary_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(n, n, rng);
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| g.column(j)).collect();
    for j in 0..n {
        for k in 0..j {
            let (done, rest) = cols.split_at_mut(j);
            let qk = &done[k];
            let proj: C64 = qk.iter().zip(rest[0].iter()).map(|(a, b)| a.conj() * b).sum();
            for (x, q) in rest[0].iter_mut().zip(qk.iter()) {
                *x -= proj * q;
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for x in cols[j].iter_mut() {
            *x /= norm;
        }
    }
    CMatrix::from_fn(n, n, |i, j| cols[j][i])
}

pub fn haar_unitary(n: usize, seed: u64) -> CMatrix {
    haar_unitary_with(n, &mut rng_from_seed(seed))
}

/// Density operator `G G^dagger / tr(G G^dagger)` with `G` a `dim x rank` Ginibre matrix.
pub fn random_density_with<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> PositiveOperator {
    assert!(rank >= 1 && rank <= dim, "rank must lie in 1..=dim");
    let g = ginibre(dim, rank, rng);
    let w = Hermitian::symmetrize(g.matmul(&g.adjoint()));
    let t = w.trace();
    PositiveOperator::new(w.scale(1.0 / t)).expect("Gram matrices are positive")
}

pub fn random_density(dim: usize, rank: usize, seed: u64) -> PositiveOperator {
    random_density_with(dim, rank, &mut rng_from_seed(seed))
}

/// Diagonal density operator with Dirichlet(1,...,1) weights.
pub fn random_diagonal_density_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> PositiveOperator {
    let w: Vec<f64> = (0..dim).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let s: f64 = w.iter().sum();
    let d: Vec<f64> = w.iter().map(|x| x / s).collect();
    PositiveOperator::new(Hermitian::from_real_diagonal(&d)).expect("nonnegative diagonal")
}
