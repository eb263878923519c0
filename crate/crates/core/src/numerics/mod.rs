//! Shared numerical kernels.

pub mod quadrature;
pub mod sparse;
pub mod tridiag;

pub use quadrature::{
    adaptive_gauss_legendre, gauss_legendre, gauss_legendre_on, integrate_samples, linspace,
    simpson_weights, trapezoid_weights,
};
pub use sparse::{
    csr_smallest_eigenpairs, sparse_smallest_eigenpairs, sparse_smallest_eigenpairs_with,
    BandedCholesky, ConjugateGradient, CsrMatrix, EigenOptions, KroneckerSum, ShiftedSolver,
    SymmetricOperator,
};
pub use tridiag::{tridiag_smallest_eigenpairs, tridiag_smallest_eigenvalues, TridiagonalOperator};

/// An eigenvalue with its unit-norm eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Flip `v` so that its largest-magnitude component is positive.
pub(crate) fn normalize_sign(v: &mut [f64]) {
    let mut peak = 0.0f64;
    for &x in v.iter() {
        if x.abs() > peak.abs() {
            peak = x;
        }
    }
    if peak < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}
