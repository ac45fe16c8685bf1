//! Shared eigenvalue and quadrature kernels.
//!
//! Everything one-dimensional in the crate reduces to a symmetric tridiagonal
//! matrix and goes through [`eig_tridiag`]. Two-dimensional strip problems go
//! through [`eig_sparse_lowest`], a shift-invert Lanczos iteration on a banded
//! Cholesky factorization.

mod banded;
mod dense;
mod lanczos;
mod quadrature;
mod sparse;
mod tridiag;

pub use banded::BandedCholesky;
pub use dense::jacobi_eigen;
pub use lanczos::{eig_sparse_lowest, SparseEigOptions};
pub use quadrature::{gauss_legendre, quad_interval, QuadResult, QuadRule};
pub use sparse::SparseSym;
pub(crate) use sparse::max_asymmetry as max_asymmetry_map;
pub use tridiag::{eig_tridiag, eig_tridiag_values, TridiagSystem};

/// Default relative tolerance for tridiagonal solves.
pub const TRIDIAG_TOL: f64 = 1e-10;
/// Default relative tolerance for sparse iterative solves.
pub const SPARSE_TOL: f64 = 1e-8;

/// Eigenpairs in ascending order with post-hoc residuals.
///
/// `residual_norms[i]` is `‖A v − λ B v‖ / ‖v‖`, recomputed from the returned
/// pair. Convergence is judged relative to `operator_norm`, the ∞-norm of the
/// pencil, so the acceptance condition is
/// `residual_norms[i] <= tolerance * max(1, operator_norm)`.
#[derive(Debug, Clone)]
pub struct EigResult {
    pub values: Vec<f64>,
    pub vectors: Option<Vec<Vec<f64>>>,
    pub residual_norms: Vec<f64>,
    pub operator_norm: f64,
    pub iterations: usize,
    pub tolerance: f64,
}

impl EigResult {
    pub fn residuals_within_tolerance(&self) -> bool {
        let bound = self.tolerance * self.operator_norm.max(1.0);
        self.residual_norms.iter().all(|r| *r <= bound)
    }
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
