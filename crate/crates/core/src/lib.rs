//! Measured f-divergences between finite-dimensional positive operators.
//!
//! The crate evaluates measured f-divergences and measured Rényi divergences through their
//! variational expressions over Hermitian witnesses, cross-checks them against explicit
//! measurement searches, solves the Uhlmann extension problems, and verifies the polar
//! duality between the Umegaki relative entropy and the measured relative entropy.

pub mod closed_form;
pub mod error;
pub mod generator;
pub mod interval;
pub mod linalg;
pub mod measurement;
pub mod optim;
pub mod polar;
pub mod uhlmann;
pub mod variational;

pub use error::{Error, Result};
pub use interval::Interval;
pub use linalg::{BipartiteShape, CMatrix, EigenDecomposition, Hermitian, Keep, PositiveOperator};
