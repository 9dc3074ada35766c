//! Matrix-free conjugate-gradient solvers for sequences of SPD systems, built
//! around the scaled spectral limited-memory preconditioner
//!
//! ```text
//! F_θ = I + S_k (θ Λ_k⁻¹ − I) S_kᵀ = U_θ²
//! ```
//!
//! which moves the `k` captured eigenvalues of `A` onto a single cluster at `θ`
//! and leaves the rest of the spectrum alone. The crate is split into:
//!
//! * [`linops`]: vectors, counted matrix-free operators and dense oracles.
//! * [`krylov`]: CG, PCG and deflated CG with per-iteration traces, Ritz
//!   extraction from the CG recurrence, the exact energy-error oracle and the
//!   Chebyshev bound.
//! * [`slmp`]: the preconditioner itself, the θ-selection strategies and the
//!   deflation-style starting guesses.
//! * [`da`]: a Lorenz-96 twin experiment solved by truncated Gauss-Newton,
//!   which produces a realistic sequence of slowly changing SPD systems.
//! * [`cli`]: configuration parsing and the `solve`, `da-run` and `spectrum`
//!   commands behind the `slmp` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod da;
pub mod error;
pub mod krylov;
pub mod linops;
pub mod slmp;

pub use error::{Error, Result};
pub use linops::{LinearOperator, Vector};
