//! Conjugate-gradient family with full per-iteration tracing.
//!
//! All three solvers stop after `max_iters` iterations unless the relative
//! residual `‖r_ℓ‖/‖b‖` drops to `rtol` (default `0`), the residual has
//! vanished in floating point (see [`RESIDUAL_FLOOR`]), or the curvature
//! `pᵀAp` stops being positive. Each
//! iteration costs exactly one product with `A`; when the starting guess is
//! the zero vector the initial residual is taken as `b` without a product.

mod bounds;
mod cg;
mod deflated;
mod oracle;
mod pcg;
mod ritz;
mod trace;

pub use bounds::chebyshev_bound;
pub use cg::cg;
pub use deflated::deflated_cg;
pub use oracle::{
    energy_error_oracle, energy_error_oracle_history, polynomial_min_residual, polynomial_min_residual_history,
};
pub use pcg::{pcg, DensePreconditioner, IdentityPreconditioner, Preconditioner};
pub use ritz::{extract_ritz_pairs, ritz_values, RitzPairs};
pub use trace::{fmt_f64, DeflationDiagnostics, LanczosData, SolveTrace, TerminationReason, TRACE_CSV_HEADER};

use crate::error::{Error, Result};
use crate::linops::{MatvecCounter, MatvecLedger, Vector};

/// `pᵀAp` at or below this value ends the run with
/// [`TerminationReason::Breakdown`].
pub const BREAKDOWN_THRESHOLD: f64 = 1e-300;

/// `‖r_ℓ‖ ≤ RESIDUAL_FLOOR·‖r₀‖` ends the run with
/// [`TerminationReason::Rtol`]: the residual is zero to working precision,
/// and iterating further would only underflow the recurrence scalars.
pub const RESIDUAL_FLOOR: f64 = 1e-150;

pub(crate) fn converged(rnorm: f64, rnorm0: f64, bnorm: f64, rtol: f64) -> bool {
    rnorm <= rtol * bnorm || rnorm <= RESIDUAL_FLOOR * rnorm0
}

#[derive(Clone, Debug)]
pub struct KrylovConfig {
    pub max_iters: usize,
    /// Relative residual threshold; `0` disables the early exit.
    pub rtol: f64,
    pub record_iterates: bool,
    pub record_lanczos: bool,
    /// Orthogonalize each new residual against all previous ones (full
    /// reorthogonalization; in the `F` inner product for PCG). Identical in
    /// exact arithmetic; keeps the iterates close to their exact-arithmetic
    /// values and the Ritz pairs free of spurious copies, at the cost of
    /// `O(nℓ)` work per step and no extra products.
    pub reorthogonalize: bool,
    /// Exact solution used to fill [`SolveTrace::energy_errors`]. The energy
    /// errors are evaluated with uncounted products.
    pub exact_solution: Option<Vector>,
    /// Extra operators whose matvec counters are sampled at every iteration,
    /// alongside the solver's own operator.
    pub watch: MatvecLedger,
}

impl KrylovConfig {
    pub fn new(max_iters: usize) -> Self {
        Self {
            max_iters,
            rtol: 0.0,
            record_iterates: false,
            record_lanczos: false,
            reorthogonalize: false,
            exact_solution: None,
            watch: MatvecLedger::new(),
        }
    }

    pub fn rtol(mut self, rtol: f64) -> Self {
        self.rtol = rtol;
        self
    }

    pub fn record_iterates(mut self, on: bool) -> Self {
        self.record_iterates = on;
        self
    }

    pub fn record_lanczos(mut self, on: bool) -> Self {
        self.record_lanczos = on;
        self
    }

    pub fn reorthogonalize(mut self, on: bool) -> Self {
        self.reorthogonalize = on;
        self
    }

    pub fn exact_solution(mut self, x: Vector) -> Self {
        self.exact_solution = Some(x);
        self
    }

    pub fn watch(mut self, counter: MatvecCounter) -> Self {
        self.watch.watch(counter);
        self
    }

    pub(crate) fn validate(&self, dim: usize) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Argument("max_iters must be at least 1".into()));
        }
        if !(self.rtol >= 0.0 && self.rtol.is_finite()) {
            return Err(Error::Argument(format!("rtol must be finite and non-negative, got {}", self.rtol)));
        }
        if let Some(x) = &self.exact_solution {
            crate::error::check_dim(dim, x.len())?;
        }
        Ok(())
    }
}

pub(crate) fn check_finite(name: &str, v: &Vector) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Argument(format!("{name} has non-finite entries")))
    }
}
