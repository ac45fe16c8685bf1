use serde::Serialize;

use super::effective::{check_inputs, DEFAULT_STEP};
use super::family::MollifiedFamily;
use super::sl::{self, Coefficients};
use crate::eigen::{gauss_legendre, TridiagSystem};
use crate::geometry::{metric_factor_rate, TwistJet, TwistProfile};
use crate::{Error, Result};

/// Gauss points per `t`-integral.
pub const T_QUAD_ORDER: usize = 32;

/// `χ₁(t) = cos(πt/2)`, normalized in `L²(−1, 1)`.
pub fn chi1(t: f64) -> f64 {
    (std::f64::consts::FRAC_PI_2 * t).cos()
}

pub fn chi1_prime(t: f64) -> f64 {
    -std::f64::consts::FRAC_PI_2 * (std::f64::consts::FRAC_PI_2 * t).sin()
}

/// `W_ε(s, t)` from the twist jet at `s`.
pub fn w_potential(jet: &TwistJet, eps: f64, t: f64) -> f64 {
    let [n1, n2, _] = jet.norms();
    let d12 = jet.d1_dot_d2();
    let d13 = jet.d1_dot_d3();
    let f = metric_factor_rate(n1, eps, t);
    let f2 = f * f;
    let e2t2 = eps * eps * t * t;
    -7.0 * d12 * d12 * e2t2 * e2t2 / (4.0 * f2 * f2 * f2)
        + (2.0 * n2 * n2 + 2.0 * d13 - 3.0 * n1.powi(4)) * e2t2 / (4.0 * f2 * f2)
        + n1 * n1 / (2.0 * f2)
}

/// `A_ε(s) = ∫χ₁²/f̃²` and `B_ε(s) = ∫W_ε χ₁²`.
pub struct UpperCoefficients {
    profile: TwistProfile,
    eps: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl UpperCoefficients {
    pub fn new(profile: TwistProfile, eps: f64) -> Self {
        let (nodes, weights) = gauss_legendre(T_QUAD_ORDER);
        Self { profile, eps, nodes, weights }
    }

    pub fn a_coeff(&self, s: f64) -> f64 {
        let rate = self.profile.dnorm1(s);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| {
                let f = metric_factor_rate(rate, self.eps, t);
                w * chi1(t).powi(2) / (f * f)
            })
            .sum()
    }

    pub fn b_coeff(&self, s: f64) -> f64 {
        let jet = self.profile.jet(s);
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * w_potential(&jet, self.eps, t) * chi1(t).powi(2)).sum()
    }

    /// `lim_{|s|→∞} B_ε(s)` for eventually constant rates.
    pub fn floor(&self) -> Option<f64> {
        self.profile.asymptotic_rate()?;
        let s = support(&self.profile) + 1.0;
        Some(self.b_coeff(s).min(self.b_coeff(-s)))
    }
}

impl Coefficients for UpperCoefficients {
    fn a(&self, s: f64) -> f64 {
        self.a_coeff(s)
    }
    fn b(&self, s: f64) -> f64 {
        self.b_coeff(s)
    }
}

fn support(tp: &TwistProfile) -> f64 {
    tp.breakpoints().iter().fold(0.0, |m, s| m.max(s.abs()))
}

fn check_jet(tp: &TwistProfile, s: f64) -> Result<()> {
    let j = tp.jet(s);
    if j.d1.iter().chain(&j.d2).chain(&j.d3).all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { what: format!("twist derivatives at s = {s}") })
    }
}

/// Tridiagonal matrix of `M_ε = −(A_ε w′)′ + B_ε w` on `(−R, R)` with
/// `2R/step` intervals.
pub fn upper_operator_m(eps: f64, mf: &MollifiedFamily, r: f64, step: f64) -> Result<TridiagSystem> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::invalid("R", "must be positive"));
    }
    check_inputs(step, 1)?;
    let tp = mf.member(eps)?;
    check_jet(&tp, 0.0)?;
    let c = UpperCoefficients::new(tp, eps);
    sl::assemble(&c, r, ((2.0 * r / step).round() as usize).max(4))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpperSpectrum {
    pub eps: f64,
    pub values: Vec<f64>,
    pub raw: Vec<f64>,
    pub error_estimates: Vec<f64>,
    pub capped: Vec<bool>,
    pub doubling_shift: Vec<f64>,
    pub half_length: f64,
    pub floor: Option<f64>,
}

/// The `k` lowest min-max values of `M_ε`.
pub fn upper_spectrum(eps: f64, mf: &MollifiedFamily, k: usize) -> Result<UpperSpectrum> {
    upper_spectrum_with(eps, mf, k, DEFAULT_STEP)
}

pub fn upper_spectrum_with(eps: f64, mf: &MollifiedFamily, k: usize, step: f64) -> Result<UpperSpectrum> {
    check_inputs(step, k)?;
    let tp = mf.member(eps)?;
    let sup = support(&tp);
    check_jet(&tp, 0.0)?;
    let c = UpperCoefficients::new(tp, eps);
    let floor = c.floor();
    let r = sl::initial_half_length(&c, sup, floor.is_some(), step, k)?;
    let t = sl::solve_truncated(&c, floor, r, false, step, k)?;
    Ok(UpperSpectrum {
        eps,
        values: t.values,
        raw: t.raw,
        error_estimates: t.errors,
        capped: t.capped,
        doubling_shift: t.doubling_shift,
        half_length: t.half_length,
        floor,
    })
}

/// `sup_s,t |W_ε − |Θ_ε′|²/2|` over `s_grid` and the quadrature nodes.
pub fn w_deviation(eps: f64, mf: &MollifiedFamily, s_grid: &[f64]) -> Result<f64> {
    let tp = mf.member(eps)?;
    let (t_nodes, _) = gauss_legendre(T_QUAD_ORDER);
    let mut sup: f64 = 0.0;
    for &s in s_grid {
        let jet = tp.jet(s);
        let half = 0.5 * jet.norms()[0].powi(2);
        for &t in t_nodes.iter().chain(&[1.0, -1.0]) {
            sup = sup.max((w_potential(&jet, eps, t) - half).abs());
        }
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::eig_tridiag_values;

    #[test]
    fn untwisted_coefficients() {
        let c = UpperCoefficients::new(TwistProfile::untwisted(2).unwrap(), 0.1);
        assert!((c.a_coeff(0.3) - 1.0).abs() < 1e-14);
        assert_eq!(c.b_coeff(0.3), 0.0);
    }

    #[test]
    fn constant_rate_potential_at_centre() {
        let tp = TwistProfile::constant(1.7, 2).unwrap();
        let w = w_potential(&tp.jet(0.4), 0.1, 0.0);
        assert!((w - 1.7 * 1.7 / 2.0).abs() < 1e-14);
    }

    #[test]
    fn constant_rate_w_matches_fiber_potential() {
        let tp = TwistProfile::constant(1.3, 2).unwrap();
        for t in [-0.7, 0.2, 1.0] {
            let w = w_potential(&tp.jet(0.9), 0.2, t);
            let y = crate::fiber::twisted_potential(1.3, 0.2, t);
            assert!((w - y).abs() < 1e-13);
        }
    }

    #[test]
    fn matrix_shape() {
        let mf = MollifiedFamily::square_twist(0.25).unwrap();
        let m = upper_operator_m(0.05, &mf, 5.0, 0.05).unwrap();
        assert_eq!(m.dim(), 199);
        let v = eig_tridiag_values(&m, 1).unwrap()[0];
        assert!((v - std::f64::consts::SQRT_2).abs() < 0.2);
    }
}
