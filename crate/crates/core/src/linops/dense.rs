//! Dense SPD oracles. Everything here is O(n³) and intended for desk-scale
//! problems: reference solutions, exact spectra and symmetric square roots.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{LinearOperator, Vector};
use crate::error::{check_dim, Error, Result};

/// Largest dimension accepted by [`dense_eig`].
pub const DENSE_EIG_MAX_DIM: usize = 5000;

/// A validated dense symmetric positive-definite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseSpdMatrix {
    m: DMatrix<f64>,
}

impl DenseSpdMatrix {
    /// Validates symmetry (1e-14 relative, max-norm) and positive
    /// definiteness (Cholesky).
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::Argument(format!(
                "expected a non-empty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let scale = m.amax();
        let asym = (&m - m.transpose()).amax();
        if asym > 1e-14 * scale {
            return Err(Error::Argument(format!("matrix is not symmetric (max |A - A^T| = {asym:e})")));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::Argument("matrix has non-finite entries".into()));
        }
        if m.clone().cholesky().is_none() {
            return Err(Error::NotSpd("Cholesky factorization failed".into()));
        }
        Ok(Self { m })
    }

    /// Symmetrizes `(m + mᵀ)/2` before validating.
    pub fn symmetrized(m: DMatrix<f64>) -> Result<Self> {
        let s = (&m + m.transpose()) * 0.5;
        Self::new(s)
    }

    pub fn from_diagonal(values: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&Vector::from_column_slice(values)))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.m
    }

    pub fn to_operator(&self, label: impl Into<String>) -> LinearOperator {
        LinearOperator::from_dense(label, self.m.clone())
    }
}

/// Spectral decomposition `A = S Λ Sᵀ` with `λ₁ ≥ … ≥ λ_n > 0`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigDecomposition {
    pub values: Vector,
    /// Orthogonal matrix whose columns are the eigenvectors, in the order of
    /// `values`.
    pub vectors: DMatrix<f64>,
}

impl EigDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn condition_number(&self) -> f64 {
        self.values[0] / self.values[self.values.len() - 1]
    }

    /// Components `η = Sᵀr` of `r` in the eigenbasis.
    pub fn coefficients(&self, r: &Vector) -> Vector {
        self.vectors.tr_mul(r)
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.vectors * DMatrix::from_diagonal(&self.values) * self.vectors.transpose()
    }
}

/// Eigenvalues and eigenvectors of a symmetric matrix, sorted decreasing.
/// No definiteness check.
pub fn symmetric_eig_sorted(m: &DMatrix<f64>) -> (Vector, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m.clone());
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = Vector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(m.nrows(), n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn dense_eig(a: &DenseSpdMatrix) -> Result<EigDecomposition> {
    if a.dim() > DENSE_EIG_MAX_DIM {
        return Err(Error::Argument(format!(
            "dense eigendecomposition limited to n <= {DENSE_EIG_MAX_DIM}, got {}",
            a.dim()
        )));
    }
    let (values, vectors) = symmetric_eig_sorted(a.matrix());
    let smallest = values[values.len() - 1];
    if smallest <= 0.0 {
        return Err(Error::NotSpd(format!("smallest eigenvalue {smallest:e} is not positive")));
    }
    Ok(EigDecomposition { values, vectors })
}

pub fn direct_solve(a: &DenseSpdMatrix, b: &Vector) -> Result<Vector> {
    check_dim(a.dim(), b.len())?;
    let chol = a.matrix().clone().cholesky().ok_or_else(|| Error::NotSpd("Cholesky factorization failed".into()))?;
    Ok(chol.solve(b))
}

/// Symmetric square root `L = S Λ^{1/2} Sᵀ`, so that `L L = A` and `L = Lᵀ`.
pub fn symmetric_sqrt(a: &DenseSpdMatrix) -> Result<DenseSpdMatrix> {
    let eig = dense_eig(a)?;
    let roots = eig.values.map(f64::sqrt);
    let l = &eig.vectors * DMatrix::from_diagonal(&roots) * eig.vectors.transpose();
    DenseSpdMatrix::symmetrized(l)
}

/// Parses the plain-text matrix format: a first line `n`, then `n` rows of
/// `n` whitespace-separated decimal numbers.
pub fn parse_dense_text(text: &str) -> Result<DMatrix<f64>> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let n: usize = header.parse().map_err(|_| Error::Parse(format!("bad dimension line `{header}`")))?;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let row = lines.next().ok_or_else(|| Error::Parse(format!("expected {n} rows, found {i}")))?;
        let vals: Vec<f64> = row
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{t}` in row {i}"))))
            .collect::<Result<_>>()?;
        if vals.len() != n {
            return Err(Error::Parse(format!("row {i} has {} entries, expected {n}", vals.len())));
        }
        for (j, v) in vals.into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    if lines.next().is_some() {
        return Err(Error::Parse("trailing content after matrix rows".into()));
    }
    Ok(m)
}

pub fn format_dense_text(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", m.nrows());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:.16e}", m[(i, j)])).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn read_dense(path: &Path) -> Result<DMatrix<f64>> {
    parse_dense_text(&std::fs::read_to_string(path)?)
}

pub fn write_dense(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    std::fs::write(path, format_dense_text(m))?;
    Ok(())
}
