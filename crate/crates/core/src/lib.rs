//! Numerical spectral toolkit for the Dirichlet Laplacian on twisted strips.
//!
//! A strip of width `2ε` is swept along a curve `Γ` in `ℝⁿ⁺¹` by a unit
//! normal field `N_Θ = Σ Θ_j N_j` built from a relatively parallel frame.
//! For purely twisted strips the Laplacian, pulled back to `ℝ × (−1, 1)`,
//! depends on the twist rate `|Θ′|` alone, which is what this crate exploits:
//!
//! - [`geometry`]: twist profiles, slowdown profiles `β`, frame transport and
//!   the immersion `(s, t) ↦ Γ(s) + N_Θ(s) ε t`.
//! - [`eigen`]: tridiagonal bisection, shift-invert Lanczos on sparse
//!   symmetric pencils, Gauss–Legendre quadrature.
//! - [`fiber`]: the transverse operators `D_ε(p)`, band functions and the
//!   essential-spectrum threshold `λ_{ε,1}(0)`.
//! - [`strip`]: finite-difference quadratic forms on a truncated strip and
//!   detection of eigenvalues below the threshold.
//! - [`certificates`]: Rayleigh-gap certificates for the explicit trial
//!   functions `φ(s) u⁰(t)`.
//! - [`thin`]: the thin-strip limit, with upper and lower eigenvalue bounds
//!   through one-dimensional effective operators.
//! - [`cli`]: configuration, CSV/JSON output and run manifests used by the
//!   `twistband` binary.

pub mod certificates;
pub mod cli;
pub mod eigen;
pub mod error;
pub mod fiber;
pub mod geometry;
pub mod interp;
pub mod strip;
pub mod thin;

pub use error::{Error, Result};
