//! Vectors, counted matrix-free operators, energy norms and dense oracles.

mod dense;
pub mod flat;
pub mod gen;
mod operator;

pub use dense::{
    dense_eig, direct_solve, format_dense_text, parse_dense_text, read_dense, symmetric_eig_sorted, symmetric_sqrt,
    write_dense, DenseSpdMatrix, EigDecomposition, DENSE_EIG_MAX_DIM,
};
pub use operator::{energy_norm, LinearOperator, MatvecCounter, MatvecLedger};

/// Column vector of reals.
pub type Vector = nalgebra::DVector<f64>;

pub fn is_zero(v: &Vector) -> bool {
    v.iter().all(|&x| x == 0.0)
}
