use serde::Serialize;

use super::sl::{self, Coefficients};
use crate::geometry::TwistProfile;
use crate::{Error, Result};

/// Default finite-difference step in `s`; Richardson uses `h` and `h/2`.
pub const DEFAULT_STEP: f64 = 0.01;

/// `−d²/ds² + |Θ′(s)|²/2` on the line.
#[derive(Debug, Clone)]
pub struct EffectiveOperator {
    pub profile: TwistProfile,
    /// Fixed truncation; `None` picks `R` adaptively.
    pub half_length: Option<f64>,
    pub step: f64,
}

struct EffCoeffs<'a>(&'a TwistProfile);

impl Coefficients for EffCoeffs<'_> {
    fn a(&self, _: f64) -> f64 {
        1.0
    }
    fn b(&self, s: f64) -> f64 {
        let r = self.0.dnorm1(s);
        0.5 * r * r
    }
}

impl EffectiveOperator {
    pub fn new(profile: TwistProfile) -> Self {
        Self { profile, half_length: None, step: DEFAULT_STEP }
    }

    pub fn with_half_length(mut self, r: f64) -> Self {
        self.half_length = Some(r);
        self
    }

    pub fn with_step(mut self, h: f64) -> Self {
        self.step = h;
        self
    }

    pub fn potential(&self, s: f64) -> f64 {
        EffCoeffs(&self.profile).b(s)
    }

    /// Bottom of the essential spectrum, `lim |Θ′|²/2`, when it is finite.
    pub fn floor(&self) -> Option<f64> {
        self.profile.asymptotic_rate().map(|r| 0.5 * r * r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectiveSpectrum {
    /// Min-max values `λ_j`; capped at the floor when `capped[j]`.
    pub values: Vec<f64>,
    /// Dirichlet eigenvalues on `(−R, R)` before capping.
    pub raw: Vec<f64>,
    pub error_estimates: Vec<f64>,
    pub capped: Vec<bool>,
    pub doubling_shift: Vec<f64>,
    pub half_length: f64,
    pub floor: Option<f64>,
}

impl EffectiveSpectrum {
    /// Number of values strictly below `level`.
    pub fn count_below(&self, level: f64) -> usize {
        self.values.iter().filter(|v| **v < level).count()
    }
}

fn check_step(step: f64, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid("k", "must be positive"));
    }
    if !(step > 0.0 && step <= 0.5) {
        return Err(Error::invalid("step", format!("need 0 < step <= 0.5, got {step}")));
    }
    Ok(())
}

/// The `k` lowest min-max values of the effective operator.
pub fn effective_spectrum(eo: &EffectiveOperator, k: usize) -> Result<EffectiveSpectrum> {
    check_step(eo.step, k)?;
    let c = EffCoeffs(&eo.profile);
    let floor = eo.floor();
    let support = eo.profile.breakpoints().iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let (r, fixed) = match eo.half_length {
        Some(r) if r > 0.0 && r.is_finite() => (r, true),
        Some(r) => return Err(Error::invalid("R", format!("must be positive, got {r}"))),
        None => (sl::initial_half_length(&c, support, floor.is_some(), eo.step, k)?, false),
    };
    let t = sl::solve_truncated(&c, floor, r, fixed, eo.step, k)?;
    Ok(EffectiveSpectrum {
        values: t.values,
        raw: t.raw,
        error_estimates: t.errors,
        capped: t.capped,
        doubling_shift: t.doubling_shift,
        half_length: t.half_length,
        floor,
    })
}

pub(crate) fn check_inputs(step: f64, k: usize) -> Result<()> {
    check_step(step, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    #[test]
    fn harmonic_oscillator() {
        let es = effective_spectrum(&EffectiveOperator::new(TwistProfile::square()), 3).unwrap();
        for (j, v) in es.values.iter().enumerate() {
            let exact = SQRT_2 * (2 * j + 1) as f64;
            assert!((v - exact).abs() < 1e-7, "{v} vs {exact}");
        }
        assert!(es.capped.iter().all(|c| !c));
    }

    #[test]
    fn constant_rate_sits_at_floor() {
        let tp = TwistProfile::constant(1.5, 2).unwrap();
        let es = effective_spectrum(&EffectiveOperator::new(tp.clone()), 1).unwrap();
        assert_eq!(es.values[0], 1.125);
        assert!(es.raw[0] > 1.125);
        let fixed = EffectiveOperator::new(tp).with_half_length(10.0);
        let r10 = sl::solve(&EffCoeffs(&fixed.profile), 10.0, 0.01, 1).unwrap().values[0];
        let r20 = sl::solve(&EffCoeffs(&fixed.profile), 20.0, 0.01, 1).unwrap().values[0];
        assert!(r10 > r20 && r20 > 1.125);
    }

    #[test]
    fn mollified_values_increase_to_the_limit() {
        let mut prev = [0.0; 2];
        for eps in [0.1, 0.05, 0.025, 0.0125] {
            let tp = TwistProfile::mollified_square(f64::powf(eps, -0.25)).unwrap();
            let es = effective_spectrum(&EffectiveOperator::new(tp), 2).unwrap();
            for j in 0..2 {
                assert!(es.values[j] >= prev[j] - 1e-9);
                assert!(es.values[j] <= SQRT_2 * (2 * j + 1) as f64 + 1e-7);
                prev[j] = es.values[j];
            }
        }
    }
}
