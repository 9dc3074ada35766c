//! Lorenz-96 twin experiment and truncated Gauss-Newton.
//!
//! The strong-constraint problem
//!
//! ```text
//! f(w₀) = ½‖w₀ − w_b‖²_{B⁻¹} + ½ Σ_i ‖y_i − H_i(M_i(w₀))‖²_{R_i⁻¹}
//! ```
//!
//! is minimized by outer loops, each solving the linearized quadratic in the
//! first-level variables `x` (`s = Lx`, `B = L²`) with a truncated CG run.

mod background;
mod gn;
mod model;
mod obs;
mod problem;

pub use background::{BackgroundCovariance, DIFFUSION_STEPS};
pub use gn::{
    assemble_system, run_gauss_newton, GNState, GaussNewtonConfig, GnRun, LoopResult, MethodSpec, ResultRow,
    RESULT_CSV_HEADER,
};
pub use model::{lorenz96_rhs, Lorenz96Model, Trajectory};
pub use obs::{uniform_indices, ObservationSet};
pub use problem::{stream_rng, synthesize_truth_and_obs, DAConfig, DAProblem, RngStream};
