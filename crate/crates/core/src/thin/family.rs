use serde::Serialize;

use crate::geometry::{TwistProfile, TwistKind};
use crate::{Error, Result};

/// `K` used for the registered square-twist family.
///
/// The phase continuation has `|Θ_ε″| ≈ 4ε^{−2a}` and `|Θ_ε‴| ≈ 8ε^{−3a}`
/// near the corners, so the bounds of condition (VI) need `K ≈ 9` at
/// `ε = 0.1`; [`validate_family`] reports the smallest admissible `K`.
pub const REGISTERED_K: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "base")]
pub enum FamilyBase {
    /// `Θ(s) = (cos s², sin s²)`, mollified by continuing the phase linearly
    /// beyond `|s| = ε^{−a}`.
    SquareTwist,
    /// `Θ_ε = Θ = (cos γs, sin γs)` for every `ε`.
    ConstantRate { gamma: f64 },
}

/// A family `Θ_ε` approximating a base twist with `|Θ′| → ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MollifiedFamily {
    pub base: FamilyBase,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub k: f64,
}

impl MollifiedFamily {
    pub fn new(base: FamilyBase, a: f64, b: f64, c: f64, k: f64) -> Result<Self> {
        if !(a > 0.0 && a < 1.0 / 3.0) {
            return Err(Error::invalid("a", format!("need 0 < a < 1/3, got {a}")));
        }
        if !(b < 1.0) || !b.is_finite() {
            return Err(Error::invalid("b", format!("need b < 1, got {b}")));
        }
        if !(a + c < 2.0) || !c.is_finite() {
            return Err(Error::invalid("c", format!("need a + c < 2, got a + c = {}", a + c)));
        }
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::invalid("K", "must be positive"));
        }
        if let FamilyBase::ConstantRate { gamma } = base {
            if !(gamma > 0.0) || !gamma.is_finite() {
                return Err(Error::invalid("gamma", "must be positive"));
            }
        }
        Ok(Self { base, a, b, c, k })
    }

    /// Square-twist family with `b = 2a`, `c = 3a`, `K =` [`REGISTERED_K`].
    pub fn square_twist(a: f64) -> Result<Self> {
        Self::new(FamilyBase::SquareTwist, a, 2.0 * a, 3.0 * a, REGISTERED_K)
    }

    pub fn constant_rate(gamma: f64, a: f64) -> Result<Self> {
        Self::new(FamilyBase::ConstantRate { gamma }, a, 2.0 * a, 3.0 * a, REGISTERED_K)
    }

    pub fn base_profile(&self) -> TwistProfile {
        match self.base {
            FamilyBase::SquareTwist => TwistProfile::square(),
            FamilyBase::ConstantRate { gamma } => {
                TwistProfile::constant(gamma, 2).expect("gamma validated in constructor")
            }
        }
    }

    /// `ε^{−a}`, where the square-twist phase switches to linear growth.
    pub fn corner(&self, eps: f64) -> f64 {
        eps.powf(-self.a)
    }

    pub fn member(&self, eps: f64) -> Result<TwistProfile> {
        check_eps(eps)?;
        match self.base {
            FamilyBase::SquareTwist => TwistProfile::mollified_square(self.corner(eps)),
            FamilyBase::ConstantRate { .. } => Ok(self.base_profile()),
        }
    }

    /// `d = min{4 − 2(a+b), 2 − 2b, 2 − (a+c), 2 − 4a}`.
    pub fn d_exponent(&self) -> f64 {
        let (a, b, c) = (self.a, self.b, self.c);
        (4.0 - 2.0 * (a + b)).min(2.0 - 2.0 * b).min(2.0 - (a + c)).min(2.0 - 4.0 * a)
    }

    /// `ν₁ < 0 < ν₂` with `|Θ′(νᵢ)| = ε^{−a}`, by bisection on the base profile.
    pub fn nu(&self, eps: f64) -> Result<(f64, f64)> {
        check_eps(eps)?;
        let base = self.base_profile();
        let target = self.corner(eps);
        let root = |sign: f64| -> Result<f64> {
            let g = |s: f64| base.dnorm1(sign * s) - target;
            if g(0.0) >= 0.0 {
                return Err(Error::RootFinding {
                    detail: format!("|Theta'(0)| already exceeds eps^-a = {target}"),
                });
            }
            let mut hi = 1.0;
            while g(hi) < 0.0 {
                hi *= 2.0;
                if hi > 1e8 {
                    return Err(Error::RootFinding {
                        detail: format!("|Theta'| never reaches eps^-a = {target}"),
                    });
                }
            }
            let mut lo = 0.0;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if g(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-15 * hi {
                    break;
                }
            }
            Ok(sign * 0.5 * (lo + hi))
        };
        Ok((root(-1.0)?, root(1.0)?))
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("eps", format!("need 0 < eps < 1, got {eps}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub condition: &'static str,
    pub pass: bool,
    /// First sample where the condition fails.
    pub first_violation: Option<f64>,
    pub detail: String,
}

impl ConditionCheck {
    fn from_samples(condition: &'static str, samples: &[f64], ok: impl Fn(f64) -> bool, detail: &str) -> Self {
        let first_violation = samples.iter().copied().find(|&s| !ok(s));
        Self { condition, pass: first_violation.is_none(), first_violation, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsConditions {
    pub eps: f64,
    pub nu: Option<(f64, f64)>,
    pub checks: Vec<ConditionCheck>,
    /// Smallest `K` for the three bounds of condition (VI) on the samples.
    pub k_required: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyReport {
    pub family: MollifiedFamily,
    /// Conditions (I) and (II) on the base profile.
    pub base_checks: Vec<ConditionCheck>,
    pub per_eps: Vec<EpsConditions>,
    pub k_required: f64,
    pub notes: Vec<String>,
}

impl FamilyReport {
    /// Whether `condition` passes everywhere it was checked.
    pub fn passes(&self, condition: &str) -> bool {
        self.base_checks
            .iter()
            .chain(self.per_eps.iter().flat_map(|e| e.checks.iter()))
            .filter(|c| c.condition == condition)
            .all(|c| c.pass)
    }

    pub fn all_pass(&self) -> bool {
        ["I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX"].iter().all(|c| self.passes(c))
    }

    /// Rows `eps,condition,pass,first_violation`.
    pub fn rows(&self) -> Vec<(Option<f64>, &'static str, bool, Option<f64>)> {
        let mut out: Vec<_> = self.base_checks.iter().map(|c| (None, c.condition, c.pass, c.first_violation)).collect();
        for e in &self.per_eps {
            for c in &e.checks {
                out.push((Some(e.eps), c.condition, c.pass, c.first_violation));
            }
        }
        out
    }
}

/// Default samples: 4001 equispaced points covering `1.5 ×` the widest
/// corner, plus the corners themselves.
pub fn default_sample_grid(mf: &MollifiedFamily, eps_list: &[f64]) -> Vec<f64> {
    let eps_min = eps_list.iter().copied().fold(1.0, f64::min);
    let span = 1.5 * mf.corner(eps_min) + 2.0;
    let mut s: Vec<f64> = (0..=4000).map(|i| -span + 2.0 * span * i as f64 / 4000.0).collect();
    for &e in eps_list {
        if e > 0.0 && e < 1.0 {
            s.push(mf.corner(e));
            s.push(-mf.corner(e));
        }
    }
    s.sort_by(f64::total_cmp);
    s.dedup();
    s
}

const TOL: f64 = 1e-12;

/// Checks conditions (I)–(IX) on sample grids.
pub fn validate_family(mf: &MollifiedFamily, eps_list: &[f64], sample_grid: Option<&[f64]>) -> Result<FamilyReport> {
    if eps_list.is_empty() {
        return Err(Error::invalid("eps_list", "must not be empty"));
    }
    for &e in eps_list {
        check_eps(e)?;
    }
    let default;
    let samples = match sample_grid {
        Some(g) if !g.is_empty() => g,
        Some(_) => return Err(Error::invalid("sample_grid", "must not be empty")),
        None => {
            default = default_sample_grid(mf, eps_list);
            &default
        }
    };
    let base = mf.base_profile();
    let mut notes = Vec::new();

    // (I): |Θ′| along s = ±R·2^j must grow without bound.
    let r0 = samples.iter().fold(1.0f64, |m, s| m.max(s.abs()));
    let radii: Vec<f64> = (0..12).map(|j| r0 * 2f64.powi(j)).collect();
    let grows = |sign: f64| {
        let v: Vec<f64> = radii.iter().map(|r| base.dnorm1(sign * r)).collect();
        v.windows(2).all(|w| w[1] > w[0]) && v[v.len() - 1] >= 100.0 * v[0].max(1.0)
    };
    let cond_i = ConditionCheck {
        condition: "I",
        pass: grows(1.0) && grows(-1.0),
        first_violation: if grows(1.0) && grows(-1.0) { None } else { Some(radii[radii.len() - 1]) },
        detail: format!("|Theta'| sampled at |s| = {r0:.3e} * 2^j, j < 12"),
    };
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let cond_ii = monotone_check("II", &sorted, |s| base.dnorm1(s), true, "strict monotonicity of |Theta'| on each half-line");
    let base_checks = vec![cond_i, cond_ii];

    let members: Vec<TwistProfile> = eps_list.iter().map(|&e| mf.member(e)).collect::<Result<_>>()?;
    let mut per_eps = Vec::new();
    let mut k_required: f64 = 0.0;
    for (idx, &eps) in eps_list.iter().enumerate() {
        let m = &members[idx];
        let nu = mf.nu(eps);
        let mut checks = Vec::new();
        match &nu {
            Ok((n1, n2)) => {
                let inside: Vec<f64> = sorted.iter().copied().filter(|s| s > n1 && s < n2).collect();
                checks.push(ConditionCheck::from_samples(
                    "III",
                    &inside,
                    |s| {
                        let (x, y) = (m.theta(s), base.theta(s));
                        x.iter().zip(&y).all(|(p, q)| (p - q).abs() <= TOL)
                    },
                    "Theta_eps = Theta on I_eps = (nu1, nu2)",
                ));
            }
            Err(e) => checks.push(ConditionCheck {
                condition: "III",
                pass: false,
                first_violation: None,
                detail: format!("I_eps undefined: {e}"),
            }),
        }
        checks.push(ConditionCheck::from_samples(
            "IV",
            &sorted,
            |s| m.dnorm1(s) <= base.dnorm1(s) * (1.0 + TOL) + TOL,
            "|Theta_eps'| <= |Theta'|",
        ));
        checks.push(monotone_check("V", &sorted, |s| m.dnorm1(s), false, "|Theta_eps'| monotone on each half-line"));

        let k_at = |s: f64| {
            let [n1, n2, n3] = m.jet(s).norms();
            (n1 * eps.powf(mf.a)).max(n2 * eps.powf(mf.b)).max(n3 * eps.powf(mf.c))
        };
        let k_eps = sorted.iter().map(|&s| k_at(s)).fold(0.0, f64::max);
        k_required = k_required.max(k_eps);
        checks.push(ConditionCheck::from_samples(
            "VI",
            &sorted,
            |s| k_at(s) <= mf.k,
            &format!("derivative bounds with K = {}; smallest admissible K here {k_eps:.6}", mf.k),
        ));

        let smaller: Vec<&TwistProfile> =
            eps_list.iter().zip(&members).filter(|(e, _)| **e < eps).map(|(_, p)| p).collect();
        checks.push(ConditionCheck::from_samples(
            "VII",
            &sorted,
            |s| smaller.iter().all(|p| m.dnorm1(s) <= p.dnorm1(s) * (1.0 + TOL) + TOL),
            "|Theta_eps'| <= |Theta_eps''| for eps > eps'",
        ));
        checks.push(ConditionCheck::from_samples(
            "VIII",
            &sorted,
            |s| (m.theta(s).iter().map(|x| x * x).sum::<f64>() - 1.0).abs() <= TOL,
            "unit norm",
        ));
        checks.push(ConditionCheck {
            condition: "IX",
            pass: true,
            first_violation: None,
            detail: "straight base curve: k_eps = 0".into(),
        });
        per_eps.push(EpsConditions { eps, nu: nu.ok(), checks, k_required: k_eps });
    }
    if matches!(base.kind(), TwistKind::ClosedForm) {
        notes.push(
            "Theta_eps agrees with Theta on |s| < eps^-a, a superset of I_eps = (nu1, nu2) where |Theta'| = eps^-a".into(),
        );
    }
    notes.push("global injectivity of the immersion is not checked".into());
    Ok(FamilyReport { family: *mf, base_checks, per_eps, k_required, notes })
}

fn monotone_check(
    condition: &'static str,
    sorted: &[f64],
    f: impl Fn(f64) -> f64,
    strict: bool,
    detail: &str,
) -> ConditionCheck {
    let mut first = None;
    for w in sorted.windows(2) {
        let (s0, s1) = (w[0], w[1]);
        let (v0, v1) = (f(s0), f(s1));
        let ok = if s1 <= 0.0 {
            if strict { v1 < v0 } else { v1 <= v0 * (1.0 + TOL) + TOL }
        } else if s0 >= 0.0 {
            if strict { v1 > v0 } else { v1 * (1.0 + TOL) + TOL >= v0 }
        } else {
            true
        };
        if !ok {
            first = Some(s1);
            break;
        }
    }
    ConditionCheck { condition, pass: first.is_none(), first_violation: first, detail: detail.into() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nu_for_square_twist() {
        let mf = MollifiedFamily::square_twist(0.25).unwrap();
        for eps in [0.1, 0.05, 0.025] {
            let (n1, n2) = mf.nu(eps).unwrap();
            let exact = 0.5 * eps.powf(-0.25);
            assert!((n2 - exact).abs() < 1e-12);
            assert!((n1 + exact).abs() < 1e-12);
        }
        assert_eq!(mf.d_exponent(), 1.0);
    }

    #[test]
    fn registered_family_passes() {
        let mf = MollifiedFamily::square_twist(0.25).unwrap();
        let r = validate_family(&mf, &[0.1, 0.05, 0.025], None).unwrap();
        assert!(r.all_pass(), "{r:#?}");
        assert!(r.k_required > 2.0 && r.k_required <= REGISTERED_K);
    }

    #[test]
    fn constant_base_fails_condition_one() {
        let mf = MollifiedFamily::constant_rate(1.0, 0.25).unwrap();
        let r = validate_family(&mf, &[0.1], None).unwrap();
        assert!(!r.passes("I"));
        assert!(mf.nu(0.1).is_err());
    }

    #[test]
    fn exponent_constraints() {
        assert!(MollifiedFamily::square_twist(0.4).is_err());
        assert!(MollifiedFamily::new(FamilyBase::SquareTwist, 0.25, 1.0, 0.75, 2.0).is_err());
        assert!(MollifiedFamily::new(FamilyBase::SquareTwist, 0.25, 0.5, 1.8, 2.0).is_err());
    }
}
