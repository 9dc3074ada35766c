//! Random test instances with known spectra.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{DenseSpdMatrix, EigDecomposition, Vector};

pub fn random_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vector {
    Vector::from_iterator(n, (0..n).map(|_| StandardNormal.sample(&mut *rng)))
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the
/// sign of `diag(R)` fixed).
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut *rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Decreasing spectrum drawn log-uniformly from `[lo, hi]`, with both
/// endpoints included when `n ≥ 2`.
pub fn log_uniform_spectrum<R: Rng + ?Sized>(n: usize, lo: f64, hi: f64, rng: &mut R) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let mut v: Vec<f64> = (0..n).map(|_| (a + (b - a) * rng.random::<f64>()).exp()).collect();
    if n >= 2 {
        v[0] = hi;
        v[n - 1] = lo;
    }
    v.sort_by(|x, y| y.total_cmp(x));
    v
}

/// An SPD matrix together with the exact decomposition it was built from.
#[derive(Clone, Debug)]
pub struct SpdInstance {
    pub matrix: DenseSpdMatrix,
    pub eig: EigDecomposition,
}

pub fn spd_from_spectrum(values: &[f64], q: DMatrix<f64>) -> SpdInstance {
    let vals = Vector::from_column_slice(values);
    let m = &q * DMatrix::from_diagonal(&vals) * q.transpose();
    let matrix = DenseSpdMatrix::symmetrized(m).expect("spectrum must be positive");
    SpdInstance { matrix, eig: EigDecomposition { values: vals, vectors: q } }
}

pub fn random_spd_instance<R: Rng + ?Sized>(n: usize, lo: f64, hi: f64, rng: &mut R) -> SpdInstance {
    let values = log_uniform_spectrum(n, lo, hi, rng);
    let q = random_orthogonal(n, rng);
    spd_from_spectrum(&values, q)
}

pub fn random_spd<R: Rng + ?Sized>(n: usize, lo: f64, hi: f64, rng: &mut R) -> DenseSpdMatrix {
    random_spd_instance(n, lo, hi, rng).matrix
}
