use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::krylov::{fmt_f64, RitzPairs};
use crate::linops::{EigDecomposition, Vector};

const ORTHONORMALITY_TOL: f64 = 1e-8;

/// `k` approximate eigenpairs: orthonormal columns `S_k` with decreasing
/// positive values `Λ_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralBasis {
    vectors: DMatrix<f64>,
    values: Vec<f64>,
}

impl SpectralBasis {
    pub fn new(vectors: DMatrix<f64>, values: Vec<f64>) -> Result<Self> {
        if vectors.ncols() != values.len() {
            return Err(Error::Basis(format!("{} columns but {} values", vectors.ncols(), values.len())));
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::Basis(format!("values must be positive and finite, found {v}")));
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::Basis("values must be non-increasing".into()));
        }
        if vectors.iter().any(|x| !x.is_finite()) {
            return Err(Error::Basis("vectors have non-finite entries".into()));
        }
        let k = values.len();
        if k > 0 {
            let dev = (vectors.tr_mul(&vectors) - DMatrix::<f64>::identity(k, k)).amax();
            if dev > ORTHONORMALITY_TOL {
                return Err(Error::Basis(format!("columns are not orthonormal (max |SᵀS − I| = {dev:e})")));
            }
        }
        Ok(Self { vectors, values })
    }

    pub fn empty(n: usize) -> Self {
        Self { vectors: DMatrix::zeros(n, 0), values: Vec::new() }
    }

    /// The `k` leading eigenpairs of an exact decomposition.
    pub fn from_eig(eig: &EigDecomposition, k: usize) -> Result<Self> {
        if k > eig.dim() {
            return Err(Error::Basis(format!("k = {k} exceeds n = {}", eig.dim())));
        }
        Self::new(eig.vectors.columns(0, k).into_owned(), eig.values.iter().take(k).copied().collect())
    }

    pub fn from_ritz(pairs: &RitzPairs) -> Result<Self> {
        Self::new(pairs.vectors.clone(), pairs.values.clone())
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn k(&self) -> usize {
        self.values.len()
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Smallest stored value `λ_k`.
    pub fn lambda_k(&self) -> Option<f64> {
        self.values.last().copied()
    }

    /// `S_kᵀ v`.
    pub fn coefficients(&self, v: &Vector) -> Result<Vector> {
        check_dim(self.dim(), v.len())?;
        Ok(self.vectors.tr_mul(v))
    }

    /// `v + S_k diag(c) S_kᵀ v`.
    pub(crate) fn rank_k_update(&self, v: &Vector, c: &[f64]) -> Vector {
        let mut eta = self.vectors.tr_mul(v);
        for (e, ci) in eta.iter_mut().zip(c) {
            *e *= ci;
        }
        let mut out = v.clone();
        out.gemv(1.0, &self.vectors, &eta, 1.0);
        out
    }

    /// `S_k diag(c) S_kᵀ v`.
    pub(crate) fn rank_k_apply(&self, v: &Vector, c: &[f64]) -> Vector {
        let mut eta = self.vectors.tr_mul(v);
        for (e, ci) in eta.iter_mut().zip(c) {
            *e *= ci;
        }
        &self.vectors * eta
    }

    /// Text form: a `n k` header line, the `k` values on one line, then the
    /// `k` columns, one per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.dim(), self.k());
        let vals: Vec<String> = self.values.iter().map(|&v| fmt_f64(v)).collect();
        let _ = writeln!(s, "{}", vals.join(" "));
        for col in self.vectors.column_iter() {
            let row: Vec<String> = col.iter().map(|&v| fmt_f64(v)).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let mut header = [0usize; 2];
        for (slot, what) in header.iter_mut().zip(["n", "k"]) {
            let t = tokens.next().ok_or_else(|| Error::Parse(format!("missing {what}")))?;
            *slot = t.parse().map_err(|e| Error::Parse(format!("bad {what} `{t}`: {e}")))?;
        }
        let [n, k] = header;
        let nums: Vec<f64> = tokens
            .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("bad number `{t}`: {e}"))))
            .collect::<Result<_>>()?;
        if nums.len() != k + n * k {
            return Err(Error::Parse(format!("expected {} numbers after header, found {}", k + n * k, nums.len())));
        }
        let values = nums[..k].to_vec();
        let vectors = DMatrix::from_column_slice(n, k, &nums[k..]);
        Self::new(vectors, values)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}
