use rayon::prelude::*;
use serde::Serialize;

use super::upper::{chi1, chi1_prime};
use crate::eigen::{eig_tridiag_values, gauss_legendre, TridiagSystem};
use crate::{Error, Result};

/// Interior nodes of the coarse grid for `S_ε`; Richardson adds `2m + 1`.
pub const DEFAULT_SIGMA_NODES: usize = 2000;

/// `δ(x) = −∫ t (1 + x t²)^{−1/2} χ₁′ χ₁ dt`.
pub fn delta_coefficient(x: f64) -> Result<f64> {
    if !(x > -1.0) || !x.is_finite() {
        return Err(Error::invalid("x", format!("need x > -1, got {x}")));
    }
    let (t, w) = gauss_legendre(40);
    Ok(-t.iter().zip(&w).map(|(&t, &w)| w * t * chi1_prime(t) * chi1(t) / (1.0 + x * t * t).sqrt()).sum::<f64>())
}

/// Symmetrized matrix `D^{−1/2} K D^{−1/2}` of
/// `S_ε v = −v″ − (εt/(1 + εt²)) v′` in `L²((−1, 1), ρ dt)`, `ρ = √(1 + εt²)`.
pub fn sigma_matrix(eps: f64, m: usize) -> Result<TridiagSystem> {
    if m < 2 {
        return Err(Error::invalid("m", "need at least 2 nodes"));
    }
    let h = 2.0 / (m + 1) as f64;
    let rho = |t: f64| (1.0 + eps * t * t).sqrt();
    let node = |j: usize| -1.0 + j as f64 * h;
    let mass: Vec<f64> = (1..=m).map(|j| rho(node(j))).collect();
    if let Some(j) = mass.iter().position(|d| !(*d > 0.0)) {
        return Err(Error::Breakdown { detail: format!("mass matrix not positive at node {}", j + 1) });
    }
    let stiff_mid: Vec<f64> = (0..=m).map(|j| rho(node(j) + 0.5 * h) / (h * h)).collect();
    let diag = (0..m).map(|i| (stiff_mid[i] + stiff_mid[i + 1]) / mass[i]).collect();
    let off = (0..m - 1).map(|i| -stiff_mid[i + 1] / (mass[i] * mass[i + 1]).sqrt()).collect();
    TridiagSystem::new(diag, off)
}

/// `Σ(ε)`, the first eigenvalue of `S_ε`, extrapolated from `m` and `2m + 1`.
pub fn sigma(eps: f64, m: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::invalid("eps", format!("need 0 <= eps < 1, got {eps}")));
    }
    let c = eig_tridiag_values(&sigma_matrix(eps, m)?, 1)?[0];
    let f = eig_tridiag_values(&sigma_matrix(eps, 2 * m + 1)?, 1)?[0];
    Ok(f + (f - c) / 3.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationCoeffs {
    pub eps_list: Vec<f64>,
    pub sigma: Vec<f64>,
    pub delta: Vec<f64>,
    /// `Σ(ε) − (π/2)² − δ(ε) ε`.
    pub residual: Vec<f64>,
    /// `max |residual| / ε²` over nonzero `ε`.
    pub c_fit: f64,
    /// Least-squares slope of `log |residual|` against `log ε`.
    pub fit_exponent: Option<f64>,
}

pub fn perturbation_coeffs(eps_list: &[f64]) -> Result<PerturbationCoeffs> {
    perturbation_coeffs_with(eps_list, DEFAULT_SIGMA_NODES)
}

pub fn perturbation_coeffs_with(eps_list: &[f64], m: usize) -> Result<PerturbationCoeffs> {
    if eps_list.is_empty() {
        return Err(Error::invalid("eps_list", "must not be empty"));
    }
    let rows: Vec<(f64, f64)> = eps_list
        .par_iter()
        .map(|&e| Ok((sigma(e, m)?, delta_coefficient(e)?)))
        .collect::<Result<_>>()?;
    let q = std::f64::consts::FRAC_PI_2.powi(2);
    let residual: Vec<f64> = eps_list.iter().zip(&rows).map(|(&e, (s, d))| s - q - d * e).collect();
    let c_fit = eps_list
        .iter()
        .zip(&residual)
        .filter(|(e, _)| **e > 0.0)
        .map(|(e, r)| r.abs() / (e * e))
        .fold(0.0, f64::max);
    let pts: Vec<(f64, f64)> = eps_list
        .iter()
        .zip(&residual)
        .filter(|(e, r)| **e > 0.0 && **r != 0.0)
        .map(|(e, r)| (e.ln(), r.abs().ln()))
        .collect();
    Ok(PerturbationCoeffs {
        eps_list: eps_list.to_vec(),
        sigma: rows.iter().map(|r| r.0).collect(),
        delta: rows.iter().map(|r| r.1).collect(),
        residual,
        c_fit,
        fit_exponent: log_slope(&pts),
    })
}

/// Least-squares slope through `(x, y)` pairs; `None` below two points.
pub fn log_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_at_zero() {
        assert!((delta_coefficient(0.0).unwrap() - 0.5).abs() < 1e-13);
    }

    #[test]
    fn delta_near_half() {
        for e in [0.1, 0.3, 0.6, 0.95] {
            let d = delta_coefficient(e).unwrap();
            assert!((d - 0.5).abs() <= e / 2.0, "{e}: {d}");
        }
    }

    #[test]
    fn sigma_at_zero_is_dirichlet() {
        let s = sigma(0.0, 400).unwrap();
        assert!((s - std::f64::consts::FRAC_PI_2.powi(2)).abs() < 1e-9);
    }

    #[test]
    fn second_order_residual() {
        let pc = perturbation_coeffs(&[0.1, 0.05, 0.025]).unwrap();
        assert!(pc.fit_exponent.unwrap() >= 1.8, "{pc:?}");
    }
}
