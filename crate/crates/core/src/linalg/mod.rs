//! Dense Hermitian linear algebra.

pub mod bipartite;
pub mod eigen;
pub mod functions;
pub mod matrix;
pub mod positive;
pub mod projection;
pub mod random;

pub use bipartite::{partial_trace, project_marginal, tensor, BipartiteShape, Keep};
pub use eigen::{eig_hermitian, EigenDecomposition};
pub use functions::{apply_scalar_function, frechet_adjoint, ScalarFunction, Smooth};
pub use matrix::{CMatrix, Hermitian};
pub use positive::PositiveOperator;
pub use projection::{dykstra, project_psd};
