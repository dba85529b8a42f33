//! Exact linear algebra over prime fields.

mod field;
mod matrix;
mod subspace;

pub use field::{is_prime, next_prime, PrimeField, MAX_PRIME};
pub use matrix::{
    cauchy_matrix, default_cauchy_matrix, default_cauchy_params, solve_left, FMatrix, Rref,
};
pub use subspace::{intersect_all, Subspace};
