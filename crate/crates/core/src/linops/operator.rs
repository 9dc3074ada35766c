use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::Vector;
use crate::error::{check_dim, Error, Result};

type ApplyFn = dyn Fn(&Vector) -> Vector + Send + Sync;

/// A matrix-free symmetric operator `v ↦ Av` with a shared matvec counter.
///
/// Cloning is cheap and the clone shares both the action and the counter, so
/// an operator can be wrapped into composite operators (for example `UᵀAU`)
/// while every product with `A` is still charged to `A`'s label.
#[derive(Clone)]
pub struct LinearOperator {
    dim: usize,
    label: String,
    action: Arc<ApplyFn>,
    counter: Arc<AtomicUsize>,
}

impl LinearOperator {
    pub fn new<F>(label: impl Into<String>, dim: usize, action: F) -> Self
    where
        F: Fn(&Vector) -> Vector + Send + Sync + 'static,
    {
        Self { dim, label: label.into(), action: Arc::new(action), counter: Arc::new(AtomicUsize::new(0)) }
    }

    pub fn identity(label: impl Into<String>, dim: usize) -> Self {
        Self::new(label, dim, |v| v.clone())
    }

    /// Wraps a dense matrix. No SPD check is made here.
    pub fn from_dense(label: impl Into<String>, matrix: DMatrix<f64>) -> Self {
        assert_eq!(matrix.nrows(), matrix.ncols(), "operator matrix must be square");
        let dim = matrix.nrows();
        Self::new(label, dim, move |v| &matrix * v)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Applies the operator and charges one matvec.
    ///
    /// Panics if `v` has the wrong length.
    pub fn apply(&self, v: &Vector) -> Vector {
        assert_eq!(v.len(), self.dim, "operator `{}`: dimension mismatch", self.label);
        self.counter.fetch_add(1, Ordering::Relaxed);
        (self.action)(v)
    }

    pub fn try_apply(&self, v: &Vector) -> Result<Vector> {
        check_dim(self.dim, v.len())?;
        Ok(self.apply(v))
    }

    /// Applies the operator without charging the counter. Reserved for
    /// diagnostics (oracle energy errors, probes) that are not part of an
    /// algorithm's cost.
    pub fn apply_uncounted(&self, v: &Vector) -> Vector {
        assert_eq!(v.len(), self.dim, "operator `{}`: dimension mismatch", self.label);
        (self.action)(v)
    }

    pub fn matvec_count(&self) -> usize {
        self.counter.load(Ordering::Relaxed)
    }

    pub fn counter(&self) -> MatvecCounter {
        MatvecCounter { label: self.label.clone(), count: Arc::clone(&self.counter) }
    }

    /// Materializes the operator column by column (uncounted).
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim;
        let mut out = DMatrix::zeros(n, n);
        let mut e = Vector::zeros(n);
        for j in 0..n {
            e[j] = 1.0;
            out.set_column(j, &self.apply_uncounted(&e));
            e[j] = 0.0;
        }
        out
    }

    /// Probe-based SPD validation: checks linearity, symmetry and positivity
    /// on `probes` random vectors. Probes are not charged to the counter.
    pub fn check_spd(&self, probes: usize, seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || Vector::from_iterator(self.dim, (0..self.dim).map(|_| StandardNormal.sample(&mut rng)));
        for _ in 0..probes {
            let u = draw();
            let v = draw();
            let au = self.apply_uncounted(&u);
            let av = self.apply_uncounted(&v);
            let scale = u.norm() * v.norm();

            let sym = (u.dot(&av) - v.dot(&au)).abs();
            if sym > 1e-12 * scale * (1.0 + au.norm() / u.norm()) {
                return Err(Error::NotSpd(format!("operator `{}` fails the symmetry probe ({sym:e})", self.label)));
            }
            let (alpha, beta) = (0.7, -1.3);
            let lhs = self.apply_uncounted(&(&u * alpha + &v * beta));
            let lin = (lhs - au.clone() * alpha - av * beta).norm();
            if lin > 1e-12 * (u.norm() + v.norm()) * (1.0 + au.norm() / u.norm()) {
                return Err(Error::NotSpd(format!("operator `{}` fails the linearity probe ({lin:e})", self.label)));
            }
            if u.dot(&au) <= 0.0 {
                return Err(Error::NotSpd(format!(
                    "operator `{}` has a non-positive quadratic form on a probe",
                    self.label
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Debug for LinearOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearOperator")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("matvecs", &self.matvec_count())
            .finish()
    }
}

/// Handle onto an operator's matvec counter.
#[derive(Clone, Debug)]
pub struct MatvecCounter {
    label: String,
    count: Arc<AtomicUsize>,
}

impl MatvecCounter {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn get(&self) -> usize {
        self.count.load(Ordering::Relaxed)
    }
}

/// A set of counters sampled together, keyed by operator label.
#[derive(Clone, Debug, Default)]
pub struct MatvecLedger {
    counters: Vec<MatvecCounter>,
}

impl MatvecLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn watch(&mut self, counter: MatvecCounter) {
        if !self.counters.iter().any(|c| Arc::ptr_eq(&c.count, &counter.count)) {
            self.counters.push(counter);
        }
    }

    pub fn with(mut self, counter: MatvecCounter) -> Self {
        self.watch(counter);
        self
    }

    pub fn snapshot(&self) -> BTreeMap<String, usize> {
        self.counters.iter().map(|c| (c.label.clone(), c.get())).collect()
    }
}

/// `sqrt(vᵀAv)`, charging exactly one matvec.
pub fn energy_norm(a: &LinearOperator, v: &Vector) -> Result<f64> {
    check_dim(a.dim(), v.len())?;
    let q = v.dot(&a.apply(v));
    let vv = v.norm_squared();
    if q < -1e-12 * vv {
        return Err(Error::NotSpd(format!("negative quadratic form {q:e} for operator `{}`", a.label())));
    }
    Ok(q.max(0.0).sqrt())
}
