//! Benchmark fixtures for the measdiv solvers (see `benches/`).

use measdiv::linalg::random::random_density;
use measdiv::polar::HullSet;
use measdiv::uhlmann::{Direction, ExtensionProblem, Order};
use measdiv::{BipartiteShape, PositiveOperator};

/// A full-rank pair of density operators of dimension `dim`.
pub fn pair(dim: usize, seed: u64) -> (PositiveOperator, PositiveOperator) {
    (random_density(dim, dim, seed), random_density(dim, dim, seed + 1))
}

/// A shape (2,2) extension problem at Renyi order `alpha`.
pub fn extension(direction: Direction, alpha: f64, seed: u64) -> ExtensionProblem {
    let shape = BipartiteShape::new(2, 2).unwrap();
    let fixed = random_density(4, 4, seed);
    let marginal = random_density(2, 2, seed + 1);
    ExtensionProblem::new(direction, fixed, marginal, shape, Order::renyi(alpha).unwrap()).unwrap()
}

/// A qubit state and a hull of `size` full-rank generators.
pub fn hull(size: usize, seed: u64) -> (PositiveOperator, HullSet) {
    let rho = random_density(2, 2, seed);
    let gens = (0..size as u64).map(|k| random_density(2, 2, seed + 1 + k)).collect();
    (rho, HullSet::new(gens).unwrap())
}
