use std::sync::Arc;

use super::SlowdownBeta;
use crate::interp::CubicSpline;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TwistKind {
    ConstantRate,
    BetaSlowdown,
    ClosedForm,
    Table,
}

/// `Θ` with its first three derivatives at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistJet {
    pub theta: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub d3: Vec<f64>,
}

impl TwistJet {
    /// `Θ′·Θ″`
    pub fn d1_dot_d2(&self) -> f64 {
        dot(&self.d1, &self.d2)
    }

    /// `Θ′·Θ‴`
    pub fn d1_dot_d3(&self) -> f64 {
        dot(&self.d1, &self.d3)
    }

    pub fn norms(&self) -> [f64; 3] {
        [norm(&self.d1), norm(&self.d2), norm(&self.d3)]
    }
}

#[derive(Debug, Clone)]
enum Repr {
    /// `(cos γs, sin γs, 0, …)`; `γ = 0` is the untwisted profile `e₁`.
    Constant { gamma: f64, n: usize },
    Beta(SlowdownBeta),
    /// `(cos s², sin s²)`.
    Square,
    /// `(cos α, sin α)` with `α = s²` on `|s| < corner`, continued linearly.
    MollifiedSquare { corner: f64 },
    Table(Arc<TableTwist>),
}

/// A unit twisting vector `Θ: ℝ → ℝⁿ` together with `|Θ′|, |Θ″|, |Θ‴|`.
///
/// The two-dimensional closed forms are phase profiles `(cos α, sin α)`;
/// their derivatives come from `α′, α″, α‴` analytically.
#[derive(Debug, Clone)]
pub struct TwistProfile {
    repr: Repr,
}

/// Step of the centered differences used for table profiles.
pub const TABLE_FD_STEP: f64 = 1e-3;

#[derive(Debug)]
struct TableTwist {
    n: usize,
    components: Vec<CubicSpline>,
}

impl TwistProfile {
    /// `Θ(s) = (cos γs, sin γs, 0, …, 0) ∈ ℝⁿ`.
    pub fn constant(gamma: f64, n: usize) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::invalid("gamma", format!("must be positive, got {gamma}")));
        }
        if n < 2 {
            return Err(Error::invalid("n", "a non-zero twist rate needs n >= 2"));
        }
        Ok(Self { repr: Repr::Constant { gamma, n } })
    }

    /// The constant unit vector `e₁ ∈ ℝⁿ`.
    pub fn untwisted(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::invalid("n", "must be positive"));
        }
        Ok(Self { repr: Repr::Constant { gamma: 0.0, n } })
    }

    /// `Θ = (cos ψ, sin ψ)` with `ψ(s) = ∫₀ˢ (γ − β)`.
    pub fn from_beta(beta: SlowdownBeta) -> Result<Self> {
        for s in beta.knots() {
            if beta.gamma() - beta.eval(s) < 0.0 {
                return Err(Error::invalid("beta", format!("gamma - beta < 0 at s = {s}")));
            }
        }
        Ok(Self { repr: Repr::Beta(beta) })
    }

    pub fn square() -> Self {
        Self { repr: Repr::Square }
    }

    /// Square twist with the phase continued linearly beyond `|s| = corner`,
    /// so that `|Θ′| = min(2|s|, 2·corner)`.
    pub fn mollified_square(corner: f64) -> Result<Self> {
        if !(corner > 0.0) || !corner.is_finite() {
            return Err(Error::invalid("corner", "must be positive and finite"));
        }
        Ok(Self { repr: Repr::MollifiedSquare { corner } })
    }

    /// Sampled `Θ` (each row a vector in `ℝⁿ`) interpolated by natural cubic
    /// splines and renormalized pointwise. Derivatives use centered
    /// differences with step [`TABLE_FD_STEP`].
    pub fn table(s: Vec<f64>, theta: Vec<Vec<f64>>) -> Result<Self> {
        if s.len() < 4 || theta.len() != s.len() {
            return Err(Error::invalid("table", "need at least four samples and matching lengths"));
        }
        let n = theta[0].len();
        if n == 0 || theta.iter().any(|v| v.len() != n) {
            return Err(Error::invalid("table", "all samples must have the same positive dimension"));
        }
        for v in &theta {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !norm.is_finite() || (norm - 1.0).abs() > 1e-6 {
                return Err(Error::invalid("table", "samples must be unit vectors"));
            }
        }
        let components = (0..n)
            .map(|j| CubicSpline::natural(s.clone(), theta.iter().map(|v| v[j]).collect()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { repr: Repr::Table(Arc::new(TableTwist { n, components })) })
    }

    pub fn dim(&self) -> usize {
        match &self.repr {
            Repr::Constant { n, .. } => *n,
            Repr::Table(t) => t.n,
            _ => 2,
        }
    }

    pub fn kind(&self) -> TwistKind {
        match &self.repr {
            Repr::Constant { .. } => TwistKind::ConstantRate,
            Repr::Beta(_) => TwistKind::BetaSlowdown,
            Repr::Square | Repr::MollifiedSquare { .. } => TwistKind::ClosedForm,
            Repr::Table(_) => TwistKind::Table,
        }
    }

    pub fn beta(&self) -> Option<&SlowdownBeta> {
        match &self.repr {
            Repr::Beta(b) => Some(b),
            _ => None,
        }
    }

    /// `lim_{|s|→∞} |Θ′(s)|` when the rate is eventually constant.
    pub fn asymptotic_rate(&self) -> Option<f64> {
        match &self.repr {
            Repr::Constant { gamma, .. } => Some(*gamma),
            Repr::Beta(b) => Some(b.gamma()),
            Repr::MollifiedSquare { corner } => Some(2.0 * corner),
            Repr::Square | Repr::Table(_) => None,
        }
    }

    /// `(α, α′, α″, α‴)` for phase profiles.
    fn phase(&self, s: f64) -> Option<[f64; 4]> {
        match &self.repr {
            Repr::Constant { gamma, n: 2 } => Some([gamma * s, *gamma, 0.0, 0.0]),
            Repr::Beta(b) => Some([
                b.gamma() * s - b.antiderivative(s),
                b.gamma() - b.eval(s),
                -b.derivative(s),
                0.0,
            ]),
            Repr::Square => Some([s * s, 2.0 * s, 2.0, 0.0]),
            Repr::MollifiedSquare { corner } => {
                let c = *corner;
                Some(if s >= c {
                    [2.0 * c * s - c * c, 2.0 * c, 0.0, 0.0]
                } else if s <= -c {
                    [-2.0 * c * s - c * c, -2.0 * c, 0.0, 0.0]
                } else {
                    [s * s, 2.0 * s, 2.0, 0.0]
                })
            }
            _ => None,
        }
    }

    pub fn theta(&self, s: f64) -> Vec<f64> {
        if let Some([a, ..]) = self.phase(s) {
            return vec![a.cos(), a.sin()];
        }
        match &self.repr {
            Repr::Constant { gamma, n } => {
                let mut v = vec![0.0; *n];
                v[0] = (gamma * s).cos();
                if *n > 1 {
                    v[1] = (gamma * s).sin();
                }
                v
            }
            Repr::Table(t) => {
                let mut v: Vec<f64> = t.components.iter().map(|c| c.eval(s)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.iter_mut().for_each(|x| *x /= norm);
                v
            }
            _ => unreachable!("phase profiles handled above"),
        }
    }

    pub fn jet(&self, s: f64) -> TwistJet {
        if let Some([a, a1, a2, a3]) = self.phase(s) {
            let (sn, cs) = a.sin_cos();
            let e = [cs, sn];
            let f = [-sn, cs];
            let comb = |x: f64, y: f64| vec![x * e[0] + y * f[0], x * e[1] + y * f[1]];
            return TwistJet {
                theta: e.to_vec(),
                d1: comb(0.0, a1),
                d2: comb(-a1 * a1, a2),
                d3: comb(-3.0 * a1 * a2, a3 - a1 * a1 * a1),
            };
        }
        match &self.repr {
            Repr::Constant { gamma, n } => {
                let g = *gamma;
                let (sn, cs) = (g * s).sin_cos();
                let mk = |x: f64, y: f64| {
                    let mut v = vec![0.0; *n];
                    v[0] = x;
                    if *n > 1 {
                        v[1] = y;
                    }
                    v
                };
                TwistJet {
                    theta: mk(cs, sn),
                    d1: mk(-g * sn, g * cs),
                    d2: mk(-g * g * cs, -g * g * sn),
                    d3: mk(g * g * g * sn, -g * g * g * cs),
                }
            }
            Repr::Table(_) => {
                let h = TABLE_FD_STEP;
                let p2 = self.theta(s + 2.0 * h);
                let p1 = self.theta(s + h);
                let z = self.theta(s);
                let m1 = self.theta(s - h);
                let m2 = self.theta(s - 2.0 * h);
                let n = z.len();
                let d1 = (0..n).map(|j| (p1[j] - m1[j]) / (2.0 * h)).collect();
                let d2 = (0..n).map(|j| (p1[j] - 2.0 * z[j] + m1[j]) / (h * h)).collect();
                let d3 = (0..n)
                    .map(|j| (p2[j] - 2.0 * p1[j] + 2.0 * m1[j] - m2[j]) / (2.0 * h * h * h))
                    .collect();
                TwistJet { theta: z, d1, d2, d3 }
            }
            _ => unreachable!(),
        }
    }

    /// `|Θ′(s)|`. For slowdown profiles this is `γ − β(s)` verbatim.
    pub fn dnorm1(&self, s: f64) -> f64 {
        match &self.repr {
            Repr::Beta(b) => b.gamma() - b.eval(s),
            Repr::Constant { gamma, .. } => *gamma,
            _ => match self.phase(s) {
                Some([_, a1, _, _]) => a1.abs(),
                None => norm(&self.jet(s).d1),
            },
        }
    }

    pub fn dnorm2(&self, s: f64) -> f64 {
        norm(&self.jet(s).d2)
    }

    pub fn dnorm3(&self, s: f64) -> f64 {
        norm(&self.jet(s).d3)
    }

    /// `d/ds |Θ′(s)|` (right derivative at kinks).
    pub fn dnorm1_prime(&self, s: f64) -> f64 {
        match &self.repr {
            Repr::Beta(b) => -b.derivative(s),
            Repr::Constant { .. } => 0.0,
            _ => match self.phase(s) {
                Some([_, a1, a2, _]) => {
                    if a1 > 0.0 {
                        a2
                    } else if a1 < 0.0 {
                        -a2
                    } else {
                        0.0
                    }
                }
                None => {
                    let j = self.jet(s);
                    let n1 = norm(&j.d1);
                    if n1 == 0.0 {
                        0.0
                    } else {
                        dot(&j.d1, &j.d2) / n1
                    }
                }
            },
        }
    }

    /// Points where derivatives of the rate jump; quadrature panels should
    /// break there.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Beta(b) => b.knots(),
            Repr::MollifiedSquare { corner } => vec![-corner, *corner],
            _ => Vec::new(),
        }
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Constant-rate profile `(cos γs, sin γs, 0, …)`.
pub fn make_constant_twist(gamma: f64, n: usize) -> Result<TwistProfile> {
    TwistProfile::constant(gamma, n)
}

pub fn make_twist_from_beta(b: SlowdownBeta) -> Result<TwistProfile> {
    TwistProfile::from_beta(b)
}

pub fn make_square_twist() -> TwistProfile {
    TwistProfile::square()
}

/// `f_ε(s, t) = √(1 + |Θ′(s)|² ε² t²)`.
pub fn metric_factor(tp: &TwistProfile, eps: f64, s: f64, t: f64) -> f64 {
    metric_factor_rate(tp.dnorm1(s), eps, t)
}

/// [`metric_factor`] for a given twist rate.
#[inline]
pub fn metric_factor_rate(rate: f64, eps: f64, t: f64) -> f64 {
    let x = rate * eps * t;
    (1.0 + x * x).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{triangle_beta, BetaShape};

    #[test]
    fn constant_twist_basics() {
        let p = make_constant_twist(1.0, 2).unwrap();
        assert_eq!(p.theta(0.0), vec![1.0, 0.0]);
        assert_eq!(p.dnorm1(0.3), 1.0);
        let p = make_constant_twist(2.0, 2).unwrap();
        for s in [0.0, 0.7, -3.1] {
            assert!((p.dnorm2(s) - 4.0).abs() < 1e-14);
            assert!((p.dnorm3(s) - 8.0).abs() < 1e-13);
        }
        assert!(make_constant_twist(0.0, 2).is_err());
        assert!(make_constant_twist(1.0, 1).is_err());
        assert_eq!(make_constant_twist(1.0, 4).unwrap().theta(0.0).len(), 4);
    }

    #[test]
    fn square_twist_derivatives() {
        let p = make_square_twist();
        assert_eq!(p.theta(0.0), vec![1.0, 0.0]);
        assert_eq!(p.dnorm1(0.0), 0.0);
        assert_eq!(p.dnorm1(3.0), 6.0);
        assert!((p.dnorm2(1.0) - 20f64.sqrt()).abs() < 1e-14);
        // Θ′·Θ‴ = α′(α‴ − α′³) = −16 at s = 1
        let j = p.jet(1.0);
        assert!((dot(&j.d1, &j.d3) + 16.0).abs() < 1e-12);
    }

    #[test]
    fn phase_derivatives_match_finite_differences() {
        let p = make_square_twist();
        let s = 0.83;
        let h = 1e-5;
        let j = p.jet(s);
        let jp = p.jet(s + h);
        let jm = p.jet(s - h);
        for k in 0..2 {
            let fd1 = (jp.theta[k] - jm.theta[k]) / (2.0 * h);
            let fd2 = (jp.d1[k] - jm.d1[k]) / (2.0 * h);
            let fd3 = (jp.d2[k] - jm.d2[k]) / (2.0 * h);
            assert!((fd1 - j.d1[k]).abs() < 1e-8);
            assert!((fd2 - j.d2[k]).abs() < 1e-7);
            assert!((fd3 - j.d3[k]).abs() < 1e-6);
        }
    }

    #[test]
    fn beta_profile_rate_is_gamma_minus_beta() {
        let p = make_twist_from_beta(triangle_beta(1.0).unwrap()).unwrap();
        assert_eq!(p.kind(), TwistKind::BetaSlowdown);
        assert_eq!(p.dnorm1(0.0), 0.0);
        assert_eq!(p.dnorm1(0.5), 0.5);
        assert_eq!(p.dnorm1(5.0), 1.0);
        // ψ(s) = s − ∫₀ˢβ; at s = 2, ψ = 2 − 0.5
        let th = p.theta(2.0);
        assert!((th[0] - 1.5f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn zero_beta_is_rotation() {
        let b = SlowdownBeta::new(1.0, BetaShape::Zero { s0: 1.0 }).unwrap();
        let p = make_twist_from_beta(b).unwrap();
        for s in [-2.0, 0.1, 4.0] {
            let th = p.theta(s);
            assert!((th[0] - s.cos()).abs() < 1e-15 && (th[1] - s.sin()).abs() < 1e-15);
            assert_eq!(p.dnorm1(s), 1.0);
        }
    }

    #[test]
    fn mollified_square_caps_rate() {
        let p = TwistProfile::mollified_square(2.0).unwrap();
        assert_eq!(p.dnorm1(1.0), 2.0);
        assert_eq!(p.dnorm1(10.0), 4.0);
        assert_eq!(p.dnorm1(-10.0), 4.0);
        assert_eq!(p.asymptotic_rate(), Some(4.0));
        // C¹ phase at the corner
        let a = p.theta(2.0 - 1e-9);
        let b = p.theta(2.0 + 1e-9);
        assert!((a[0] - b[0]).abs() < 1e-7);
    }

    #[test]
    fn table_profile_approximates_closed_form() {
        let s: Vec<f64> = (0..=400).map(|i| -2.0 + 0.01 * i as f64).collect();
        let th: Vec<Vec<f64>> = s.iter().map(|x| vec![(0.7 * x).cos(), (0.7 * x).sin()]).collect();
        let p = TwistProfile::table(s, th).unwrap();
        assert_eq!(p.kind(), TwistKind::Table);
        assert!((p.dnorm1(0.3) - 0.7).abs() < 1e-5);
        assert!((p.dnorm2(0.3) - 0.49).abs() < 1e-4);
    }

    #[test]
    fn metric_factor_values() {
        let p = make_constant_twist(2.0, 2).unwrap();
        assert_eq!(metric_factor(&p, 0.1, 0.3, 0.0), 1.0);
        assert!((metric_factor(&p, 0.1, 0.3, 1.0) - 1.04f64.sqrt()).abs() < 1e-15);
        let u = TwistProfile::untwisted(2).unwrap();
        assert_eq!(metric_factor(&u, 0.4, 1.0, 1.0), 1.0);
    }
}
