#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use spectral_lmp::krylov::{
    cg, deflated_cg, energy_error_oracle_history, pcg, polynomial_min_residual_history, KrylovConfig, SolveTrace,
};
use spectral_lmp::linops::gen::{self, SpdInstance};
use spectral_lmp::linops::{direct_solve, LinearOperator, Vector};
use spectral_lmp::slmp::{ScaledSpectralPreconditioner, SpectralBasis};

/// Energy errors below this fraction of the initial one are dominated by
/// roundoff in `x − x*`; comparisons between runs are made above it.
pub const RESOLVED: f64 = 1e-6;

/// A run follows exact arithmetic while its energy error matches the exact
/// value to this relative accuracy; well inside the `1e-8` comparison slack, so
/// tracking noise cannot decide a comparison.
pub const TRACKING: f64 = 1e-9;

/// Exact energy errors are compared down to this fraction of the initial one.
pub const EXACT_FLOOR: f64 = 1e-12;

pub struct Case {
    pub inst: SpdInstance,
    pub a: LinearOperator,
    pub b: Vector,
    pub x0: Vector,
    pub x_star: Vector,
    /// Full reorthogonalization, so runs follow their exact-arithmetic
    /// iterates (the inequalities hold in exact arithmetic).
    pub reorth: bool,
}

impl Case {
    pub fn random(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Self {
        let inst = gen::random_spd_instance(n, lo, hi, rng);
        let b = gen::random_vector(n, rng);
        let x0 = gen::random_vector(n, rng);
        Self::new(inst, b, x0)
    }

    pub fn new(inst: SpdInstance, b: Vector, x0: Vector) -> Self {
        let a = inst.matrix.to_operator("A");
        let x_star = direct_solve(&inst.matrix, &b).unwrap();
        Self { inst, a, b, x0, x_star, reorth: false }
    }

    pub fn reorthogonalized(mut self) -> Self {
        self.reorth = true;
        self
    }

    pub fn n(&self) -> usize {
        self.b.len()
    }

    pub fn lambda(&self, i: usize) -> f64 {
        self.inst.eig.values[i]
    }

    pub fn basis(&self, k: usize) -> SpectralBasis {
        SpectralBasis::from_eig(&self.inst.eig, k).unwrap()
    }

    pub fn r0(&self) -> Vector {
        &self.b - self.inst.matrix.matrix() * &self.x0
    }

    fn cfg(&self, iters: usize) -> KrylovConfig {
        KrylovConfig::new(iters).record_iterates(true).reorthogonalize(self.reorth).exact_solution(self.x_star.clone())
    }

    pub fn cg(&self, iters: usize) -> SolveTrace {
        cg(&self.a, &self.b, &self.x0, &self.cfg(iters)).unwrap()
    }

    pub fn cg_from(&self, x0: &Vector, iters: usize) -> SolveTrace {
        cg(&self.a, &self.b, x0, &self.cfg(iters)).unwrap()
    }

    pub fn pcg(&self, k: usize, theta: f64, iters: usize) -> SolveTrace {
        let p = ScaledSpectralPreconditioner::new(self.basis(k), theta).unwrap();
        pcg(&self.a, &p, &self.b, &self.x0, &self.cfg(iters)).unwrap()
    }

    pub fn deflated(&self, k: usize, iters: usize) -> SolveTrace {
        let w = self.inst.eig.vectors.columns(0, k).into_owned();
        deflated_cg(&self.a, &w, &self.b, &self.x0, &self.cfg(iters)).unwrap()
    }

    /// Exact-arithmetic energy errors of `pcg(k, theta, iters)`; `k = 0` is CG.
    pub fn exact_pcg(&self, k: usize, theta: f64, iters: usize) -> Vec<f64> {
        energy_error_oracle_history(&self.inst.eig, &self.r0(), k, theta, iters).unwrap()
    }

    pub fn exact_cg(&self, iters: usize) -> Vec<f64> {
        self.exact_pcg(0, 1.0, iters)
    }

    /// Exact-arithmetic energy errors of `deflated(k, iters)`: the projected
    /// start has no residual along the first `k` eigenvectors.
    pub fn exact_deflated(&self, k: usize, iters: usize) -> Vec<f64> {
        let eta = self.inst.eig.coefficients(&self.r0());
        let lam = &self.inst.eig.values;
        let nodes: Vec<f64> = (k..self.n()).map(|i| lam[i]).collect();
        let weights: Vec<f64> = (k..self.n()).map(|i| eta[i] * eta[i] / lam[i]).collect();
        polynomial_min_residual_history(&nodes, &weights, iters).unwrap()
    }
}

pub fn errors(t: &SolveTrace) -> &[f64] {
    t.energy_errors.as_deref().unwrap()
}

/// Number of leading iterations over which `run` matches `exact` to
/// `TRACKING` relative accuracy.
pub fn tracked(run: &[f64], exact: &[f64]) -> usize {
    run.iter().zip(exact).take_while(|(r, e)| (*r - *e).abs() <= TRACKING * *e).count()
}

/// `a ≤ (1 + slack)·b` wherever `b ≥ floor`.
pub fn dominated(a: &[f64], b: &[f64], floor: f64, slack: f64) -> Result<(), String> {
    for (l, (&x, &y)) in a.iter().zip(b).enumerate() {
        if y >= floor && x > (1.0 + slack) * y {
            return Err(format!("iteration {l}: {x:e} > (1+{slack:e})·{y:e}"));
        }
    }
    Ok(())
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}
