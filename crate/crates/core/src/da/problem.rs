use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{uniform_indices, BackgroundCovariance, Lorenz96Model, ObservationSet, Trajectory, DIFFUSION_STEPS};
use crate::error::{check_dim, Error, Result};
use crate::linops::Vector;

/// Random streams derived from the master seed, one per purpose, so that
/// changing how much one purpose draws never shifts another.
#[derive(Clone, Copy, Debug)]
pub enum RngStream {
    Truth = 1,
    Background = 2,
    Observation = 3,
}

pub fn stream_rng(seed: u64, stream: RngStream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

fn normal_vector(n: usize, rng: &mut ChaCha8Rng) -> Vector {
    Vector::from_iterator(n, (0..n).map(|_| StandardNormal.sample(rng)))
}

/// Twin-experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DAConfig {
    pub n: usize,
    pub m_per_window: usize,
    pub n_windows: usize,
    pub sigma_b: f64,
    pub sigma_r: f64,
    /// Background correlation length in grid points.
    pub length_scale: f64,
    /// Implicit diffusion steps of the background correlation.
    pub diffusion_steps: u32,
    pub forcing: f64,
    pub dt: f64,
    pub steps_per_window: usize,
    /// RK4 steps from the perturbed equilibrium to the truth.
    pub spinup_steps: usize,
    pub seed: u64,
}

impl Default for DAConfig {
    fn default() -> Self {
        Self::low_obs()
    }
}

impl DAConfig {
    pub fn low_obs() -> Self {
        Self {
            n: 1000,
            m_per_window: 150,
            n_windows: 2,
            sigma_b: 0.8,
            sigma_r: 0.2,
            length_scale: 5.0,
            diffusion_steps: DIFFUSION_STEPS,
            forcing: 8.0,
            dt: 0.025,
            steps_per_window: 2,
            spinup_steps: 2000,
            seed: 2024,
        }
    }

    pub fn high_obs() -> Self {
        Self { m_per_window: 300, ..Self::low_obs() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 4 {
            return Err(Error::Config(format!("n must be at least 4, got {}", self.n)));
        }
        if self.m_per_window > self.n {
            return Err(Error::Config(format!("m_per_window {} exceeds n {}", self.m_per_window, self.n)));
        }
        for (name, v) in [("sigma_b", self.sigma_b), ("sigma_r", self.sigma_r), ("dt", self.dt)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.length_scale >= 0.0) || self.steps_per_window == 0 {
            return Err(Error::Config("length_scale must be ≥ 0 and steps_per_window ≥ 1".into()));
        }
        Ok(())
    }
}

/// Immutable twin-experiment instance shared by every method.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DAProblem {
    pub config: DAConfig,
    pub model: Lorenz96Model,
    pub obs: ObservationSet,
    pub bcov: BackgroundCovariance,
    #[serde(with = "crate::linops::flat")]
    pub w_b: Vector,
    #[serde(with = "crate::linops::flat")]
    pub truth: Vector,
}

/// Builds truth, background and observations from `cfg.seed`.
///
/// The truth is a spun-up state from a slightly perturbed equilibrium;
/// `w_b = truth + Lξ` and `y_i = H_i(M_i(truth)) + σ_r ξ_i`.
pub fn synthesize_truth_and_obs(cfg: &DAConfig) -> Result<DAProblem> {
    cfg.validate()?;
    let model = Lorenz96Model::new(cfg.n, cfg.forcing, cfg.dt, cfg.steps_per_window)?;
    let bcov = BackgroundCovariance::with_steps(cfg.n, cfg.sigma_b, cfg.length_scale, cfg.diffusion_steps)?;

    let mut rng = stream_rng(cfg.seed, RngStream::Truth);
    let start = Vector::from_element(cfg.n, cfg.forcing) + normal_vector(cfg.n, &mut rng) * 0.01;
    let truth = model.advance(&start, cfg.spinup_steps);

    let mut rng = stream_rng(cfg.seed, RngStream::Background);
    let w_b = &truth + bcov.apply_l(&normal_vector(cfg.n, &mut rng))?;

    let idx = uniform_indices(cfg.n, cfg.m_per_window)?;
    let traj = model.trajectory(&truth, cfg.n_windows)?;
    let mut rng = stream_rng(cfg.seed, RngStream::Observation);
    let mut values = Vec::with_capacity(cfg.n_windows);
    for x in traj.window_states() {
        let clean = Vector::from_iterator(idx.len(), idx.iter().map(|&i| x[i]));
        values.push(clean + normal_vector(idx.len(), &mut rng) * cfg.sigma_r);
    }
    let obs = ObservationSet::new(cfg.n, vec![idx; cfg.n_windows], values, cfg.sigma_r)?;
    Ok(DAProblem { config: cfg.clone(), model, obs, bcov, w_b, truth })
}

impl DAProblem {
    pub fn dim(&self) -> usize {
        self.model.n
    }

    pub fn trajectory(&self, w0: &Vector) -> Result<Trajectory> {
        self.model.trajectory(w0, self.obs.n_windows())
    }

    /// `d_i = y_i − H_i(M_i(w₀))` along `traj`.
    pub fn innovations(&self, traj: &Trajectory) -> Vec<Vector> {
        traj.window_states().iter().enumerate().map(|(i, x)| &self.obs.values[i] - self.obs.select(i, x)).collect()
    }

    /// `G s`, one block per window.
    pub fn linearized_obs(&self, traj: &Trajectory, s: &Vector) -> Result<Vec<Vector>> {
        let dx = self.model.tlm(traj, s)?;
        Ok(dx.iter().enumerate().map(|(i, d)| self.obs.select(i, d)).collect())
    }

    /// `Gᵀ y`.
    pub fn linearized_obs_adjoint(&self, traj: &Trajectory, y: &[Vector]) -> Result<Vector> {
        check_dim(self.obs.n_windows(), y.len())?;
        let forcings: Vec<Vector> = y.iter().enumerate().map(|(i, yi)| self.obs.scatter(i, yi)).collect();
        self.model.adjoint(traj, &forcings)
    }

    /// `f(w₀) = ½‖w₀ − w_b‖²_{B⁻¹} + ½ Σ ‖y_i − H_i(M_i(w₀))‖² / σ_r²`.
    pub fn nonlinear_cost(&self, w0: &Vector) -> Result<f64> {
        check_dim(self.dim(), w0.len())?;
        let dw = w0 - &self.w_b;
        let jb = 0.5 * dw.dot(&self.bcov.apply_b_inv(&dw)?);
        let traj = self.trajectory(w0)?;
        let s2 = self.obs.sigma_r * self.obs.sigma_r;
        let jo: f64 = self.innovations(&traj).iter().map(|d| d.norm_squared()).sum::<f64>() / (2.0 * s2);
        Ok(jb + jo)
    }

    /// `∇f(w₀) = B⁻¹(w₀ − w_b) − Gᵀ R⁻¹ d`.
    pub fn gradient(&self, w0: &Vector) -> Result<Vector> {
        check_dim(self.dim(), w0.len())?;
        let traj = self.trajectory(w0)?;
        let s2 = self.obs.sigma_r * self.obs.sigma_r;
        let scaled: Vec<Vector> = self.innovations(&traj).iter().map(|d| d / s2).collect();
        Ok(self.bcov.apply_b_inv(&(w0 - &self.w_b))? - self.linearized_obs_adjoint(&traj, &scaled)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
