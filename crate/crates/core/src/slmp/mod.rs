//! Scaled spectral limited-memory preconditioners.
//!
//! Given `k` eigenpairs `(λ_i, s_i)` of an SPD matrix `A`, the preconditioner
//!
//! ```text
//! F_θ = I + S_k(θΛ_k⁻¹ − I)S_kᵀ = U_θ²,   U_θ = I + S_k((θΛ_k⁻¹)^{1/2} − I)S_kᵀ
//! ```
//!
//! maps the stored eigenvalues of `U_θAU_θ` to `θ` and leaves the rest of the
//! spectrum untouched. Everything is applied in `O(nk)` without forming an
//! `n×n` matrix.

mod basis;
mod precond;
mod theta;

pub use basis::SpectralBasis;
pub use precond::{
    compose, deflation_initial_guess, init_slmp_guess, split_operator, ComposedPreconditioner,
    ScaledSpectralPreconditioner,
};
pub use theta::{improvement_interval, midrange_ratio, resolve_theta, ThetaStrategy};
