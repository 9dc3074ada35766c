use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linops::Vector;

/// Lorenz-96 on a cyclic domain, `dx_i/dt = (x_{i+1} − x_{i−2})x_{i−1} − x_i + F`,
/// integrated with classic RK4 at a fixed step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lorenz96Model {
    pub n: usize,
    pub forcing: f64,
    pub dt: f64,
    pub steps_per_window: usize,
}

/// `dx/dt` at `x`.
pub fn lorenz96_rhs(x: &Vector, forcing: f64) -> Result<Vector> {
    let n = x.len();
    if n < 4 {
        return Err(Error::Argument(format!("Lorenz-96 needs n ≥ 4, got {n}")));
    }
    Ok(rhs(x, forcing))
}

fn rhs(x: &Vector, forcing: f64) -> Vector {
    let n = x.len();
    Vector::from_fn(n, |i, _| {
        let (ip1, im1, im2) = ((i + 1) % n, (i + n - 1) % n, (i + n - 2) % n);
        (x[ip1] - x[im2]) * x[im1] - x[i] + forcing
    })
}

/// Jacobian of the right-hand side at `x` applied to `d`.
fn jac(x: &Vector, d: &Vector) -> Vector {
    let n = x.len();
    Vector::from_fn(n, |i, _| {
        let (ip1, im1, im2) = ((i + 1) % n, (i + n - 1) % n, (i + n - 2) % n);
        (d[ip1] - d[im2]) * x[im1] + (x[ip1] - x[im2]) * d[im1] - d[i]
    })
}

/// Transposed Jacobian at `x` applied to `l`.
fn jac_t(x: &Vector, l: &Vector) -> Vector {
    let n = x.len();
    Vector::from_fn(n, |j, _| {
        let (jp1, jp2, jm1, jm2) = ((j + 1) % n, (j + 2) % n, (j + n - 1) % n, (j + n - 2) % n);
        l[jp1] * (x[jp2] - x[jm1]) + l[jm1] * x[jm2] - l[jp2] * x[jp1] - l[j]
    })
}

/// States along one nonlinear run: the four RK4 stage points of every step
/// and the state at the end of every observation window.
#[derive(Clone, Debug)]
pub struct Trajectory {
    initial: Vector,
    stages: Vec<[Vector; 4]>,
    window_states: Vec<Vector>,
}

impl Trajectory {
    pub fn initial(&self) -> &Vector {
        &self.initial
    }

    /// States at `t₁, …, t_N`.
    pub fn window_states(&self) -> &[Vector] {
        &self.window_states
    }

    pub fn n_windows(&self) -> usize {
        self.window_states.len()
    }

    /// Fails unless the trajectory was computed from exactly `w0`.
    pub fn check_linearization(&self, w0: &Vector) -> Result<()> {
        if &self.initial == w0 {
            Ok(())
        } else {
            Err(Error::StaleTrajectory)
        }
    }
}

impl Lorenz96Model {
    pub fn new(n: usize, forcing: f64, dt: f64, steps_per_window: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::Argument(format!("Lorenz-96 needs n ≥ 4, got {n}")));
        }
        if !(dt > 0.0 && dt.is_finite()) || steps_per_window == 0 {
            return Err(Error::Argument("dt must be positive and steps_per_window at least 1".into()));
        }
        Ok(Self { n, forcing, dt, steps_per_window })
    }

    pub fn window_length(&self) -> f64 {
        self.dt * self.steps_per_window as f64
    }

    fn stage_points(&self, x: &Vector) -> ([Vector; 4], Vector) {
        let h = self.dt;
        let k1 = rhs(x, self.forcing);
        let p2 = x + &k1 * (h / 2.0);
        let k2 = rhs(&p2, self.forcing);
        let p3 = x + &k2 * (h / 2.0);
        let k3 = rhs(&p3, self.forcing);
        let p4 = x + &k3 * h;
        let k4 = rhs(&p4, self.forcing);
        let next = x + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
        ([x.clone(), p2, p3, p4], next)
    }

    pub fn step(&self, x: &Vector) -> Vector {
        self.stage_points(x).1
    }

    /// Advances `steps` RK4 steps.
    pub fn advance(&self, x: &Vector, steps: usize) -> Vector {
        (0..steps).fold(x.clone(), |acc, _| self.step(&acc))
    }

    /// State at time `t_target` starting from `w0` at time 0. The target must
    /// be an integer number of steps.
    pub fn integrate(&self, w0: &Vector, t_target: f64) -> Result<Vector> {
        check_dim(self.n, w0.len())?;
        let steps = t_target / self.dt;
        let rounded = steps.round();
        if !(t_target >= 0.0) || (steps - rounded).abs() > 1e-9 * steps.max(1.0) {
            return Err(Error::Argument(format!("t = {t_target} is not on the step grid of dt = {}", self.dt)));
        }
        Ok(self.advance(w0, rounded as usize))
    }

    pub fn trajectory(&self, w0: &Vector, n_windows: usize) -> Result<Trajectory> {
        check_dim(self.n, w0.len())?;
        let mut stages = Vec::with_capacity(n_windows * self.steps_per_window);
        let mut window_states = Vec::with_capacity(n_windows);
        let mut x = w0.clone();
        for _ in 0..n_windows {
            for _ in 0..self.steps_per_window {
                let (st, next) = self.stage_points(&x);
                stages.push(st);
                x = next;
            }
            window_states.push(x.clone());
        }
        Ok(Trajectory { initial: w0.clone(), stages, window_states })
    }

    fn tlm_step(&self, st: &[Vector; 4], d: &Vector) -> Vector {
        let h = self.dt;
        let dk1 = jac(&st[0], d);
        let dk2 = jac(&st[1], &(d + &dk1 * (h / 2.0)));
        let dk3 = jac(&st[2], &(d + &dk2 * (h / 2.0)));
        let dk4 = jac(&st[3], &(d + &dk3 * h));
        d + (dk1 + (dk2 + dk3) * 2.0 + dk4) * (h / 6.0)
    }

    fn adjoint_step(&self, st: &[Vector; 4], l: &Vector) -> Vector {
        let h = self.dt;
        let mut lx = l.clone();
        let lk1 = l * (h / 6.0);
        let mut lk2 = l * (h / 3.0);
        let mut lk3 = l * (h / 3.0);
        let lk4 = l * (h / 6.0);
        let mu = jac_t(&st[3], &lk4);
        lx += &mu;
        lk3.axpy(h, &mu, 1.0);
        let mu = jac_t(&st[2], &lk3);
        lx += &mu;
        lk2.axpy(h / 2.0, &mu, 1.0);
        let mu = jac_t(&st[1], &lk2);
        lx += &mu;
        let lk1 = lk1 + &mu * (h / 2.0);
        lx += jac_t(&st[0], &lk1);
        lx
    }

    /// Tangent-linear propagation of `s`: the perturbation at each window end.
    pub fn tlm(&self, traj: &Trajectory, s: &Vector) -> Result<Vec<Vector>> {
        check_dim(self.n, s.len())?;
        let mut out = Vec::with_capacity(traj.n_windows());
        let mut d = s.clone();
        for w in traj.stages.chunks(self.steps_per_window) {
            for st in w {
                d = self.tlm_step(st, &d);
            }
            out.push(d.clone());
        }
        Ok(out)
    }

    /// Transpose of [`Self::tlm`]: `Σ_i M_iᵀ λ_i` for forcings `λ_i` at each
    /// window end.
    pub fn adjoint(&self, traj: &Trajectory, forcings: &[Vector]) -> Result<Vector> {
        check_dim(traj.n_windows(), forcings.len())?;
        for f in forcings {
            check_dim(self.n, f.len())?;
        }
        let mut l = Vector::zeros(self.n);
        for (w, f) in traj.stages.chunks(self.steps_per_window).zip(forcings).rev() {
            l += f;
            for st in w.iter().rev() {
                l = self.adjoint_step(st, &l);
            }
        }
        Ok(l)
    }
}
