use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linops::Vector;

/// Observed components and values at the end of each window, with
/// uncorrelated errors of standard deviation `sigma_r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationSet {
    pub n: usize,
    pub indices: Vec<Vec<usize>>,
    #[serde(with = "crate::linops::flat::list")]
    pub values: Vec<Vector>,
    pub sigma_r: f64,
}

/// `m` evenly spread components out of `n`.
pub fn uniform_indices(n: usize, m: usize) -> Result<Vec<usize>> {
    if m > n {
        return Err(Error::Argument(format!("cannot observe {m} of {n} components")));
    }
    Ok((0..m).map(|i| i * n / m).collect())
}

impl ObservationSet {
    pub fn new(n: usize, indices: Vec<Vec<usize>>, values: Vec<Vector>, sigma_r: f64) -> Result<Self> {
        check_dim(indices.len(), values.len())?;
        if !(sigma_r > 0.0 && sigma_r.is_finite()) {
            return Err(Error::Argument(format!("sigma_r must be positive, got {sigma_r}")));
        }
        for (idx, y) in indices.iter().zip(&values) {
            check_dim(idx.len(), y.len())?;
            if idx.windows(2).any(|w| w[0] >= w[1]) || idx.last().is_some_and(|&i| i >= n) {
                return Err(Error::Argument("observation indices must be strictly increasing and below n".into()));
            }
        }
        Ok(Self { n, indices, values, sigma_r })
    }

    pub fn n_windows(&self) -> usize {
        self.indices.len()
    }

    /// Total number of observations `m = Σ m_i`.
    pub fn total(&self) -> usize {
        self.indices.iter().map(Vec::len).sum()
    }

    /// `H_i x`.
    pub fn select(&self, window: usize, x: &Vector) -> Vector {
        Vector::from_iterator(self.indices[window].len(), self.indices[window].iter().map(|&i| x[i]))
    }

    /// `H_iᵀ y`.
    pub fn scatter(&self, window: usize, y: &Vector) -> Vector {
        let mut out = Vector::zeros(self.n);
        for (&i, v) in self.indices[window].iter().zip(y.iter()) {
            out[i] += v;
        }
        out
    }
}
