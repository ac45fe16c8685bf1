use crate::{Error, Result};

/// Registered slowdown shapes. All of them are piecewise linear.
#[derive(Debug, Clone, PartialEq)]
pub enum BetaShape {
    /// `β ≡ 0`, with an explicit support half-length.
    Zero { s0: f64 },
    /// Tent of the given height on `[−half_width, half_width]`.
    Triangle { height: f64, half_width: f64 },
    /// Flat top on `[−plateau, plateau]` with linear ramps of width `ramp`.
    Plateau { height: f64, plateau: f64, ramp: f64 },
    /// Tent of height `a` on `[−base, 0]` followed by a tent of depth `b` on `[0, base]`.
    SignedTriangles { a: f64, b: f64, base: f64 },
    /// Linear interpolation through `(s, β)` knots, zero outside.
    Table { knots: Vec<(f64, f64)> },
}

/// A compactly supported slowdown `β` of an asymptotic twist rate `γ`,
/// so that `|Θ′| = γ − β`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlowdownBeta {
    gamma: f64,
    shape: BetaShape,
    knots: Vec<(f64, f64)>,
    /// ∫ β from the leftmost knot up to each knot.
    cumulative: Vec<f64>,
    s0: f64,
    beta_prime_bound: f64,
}

impl SlowdownBeta {
    pub fn new(gamma: f64, shape: BetaShape) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::invalid("gamma", "must be positive and finite"));
        }
        let knots = match &shape {
            BetaShape::Zero { s0 } => {
                positive("s0", *s0)?;
                vec![(-s0, 0.0), (*s0, 0.0)]
            }
            BetaShape::Triangle { height, half_width } => {
                positive("half_width", *half_width)?;
                finite("height", *height)?;
                vec![(-half_width, 0.0), (0.0, *height), (*half_width, 0.0)]
            }
            BetaShape::Plateau { height, plateau, ramp } => {
                positive("plateau", *plateau)?;
                positive("ramp", *ramp)?;
                finite("height", *height)?;
                let e = plateau + ramp;
                vec![(-e, 0.0), (-plateau, *height), (*plateau, *height), (e, 0.0)]
            }
            BetaShape::SignedTriangles { a, b, base } => {
                positive("base", *base)?;
                finite("a", *a)?;
                finite("b", *b)?;
                vec![(-base, 0.0), (-0.5 * base, *a), (0.0, 0.0), (0.5 * base, -b), (*base, 0.0)]
            }
            BetaShape::Table { knots } => {
                if knots.len() < 2 {
                    return Err(Error::invalid("beta table", "needs at least two knots"));
                }
                if knots.iter().any(|(s, v)| !s.is_finite() || !v.is_finite()) {
                    return Err(Error::NonFinite { what: "beta table".into() });
                }
                if knots.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return Err(Error::invalid("beta table", "abscissae must be strictly increasing"));
                }
                if knots[0].1 != 0.0 || knots[knots.len() - 1].1 != 0.0 {
                    return Err(Error::invalid("beta table", "end values must be zero"));
                }
                knots.clone()
            }
        };
        let s0 = knots[0].0.abs().max(knots[knots.len() - 1].0.abs());
        let mut cumulative = vec![0.0; knots.len()];
        let mut slope_max: f64 = 0.0;
        for i in 1..knots.len() {
            let (s_a, b_a) = knots[i - 1];
            let (s_b, b_b) = knots[i];
            cumulative[i] = cumulative[i - 1] + 0.5 * (b_a + b_b) * (s_b - s_a);
            slope_max = slope_max.max(((b_b - b_a) / (s_b - s_a)).abs());
        }
        // γ − β is piecewise linear, so checking knots checks everywhere.
        if let Some((s, b)) = knots.iter().find(|(_, b)| gamma - b < 0.0) {
            return Err(Error::invalid(
                "beta",
                format!("gamma - beta = {} < 0 at s = {s}", gamma - b),
            ));
        }
        Ok(Self { gamma, shape, knots, cumulative, s0, beta_prime_bound: slope_max })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn shape(&self) -> &BetaShape {
        &self.shape
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn beta_prime_bound(&self) -> f64 {
        self.beta_prime_bound
    }

    /// Breakpoints of the piecewise-linear profile, including `±s0`.
    pub fn knots(&self) -> Vec<f64> {
        let mut k: Vec<f64> = self.knots.iter().map(|(s, _)| *s).collect();
        if k[0] > -self.s0 {
            k.insert(0, -self.s0);
        }
        if k[k.len() - 1] < self.s0 {
            k.push(self.s0);
        }
        k
    }

    pub fn is_zero(&self) -> bool {
        self.knots.iter().all(|(_, b)| *b == 0.0)
    }

    fn segment(&self, s: f64) -> Option<usize> {
        let n = self.knots.len();
        if s < self.knots[0].0 || s >= self.knots[n - 1].0 {
            return None;
        }
        Some(self.knots.partition_point(|(x, _)| *x <= s) - 1)
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self.segment(s) {
            None => 0.0,
            Some(i) => {
                let (s_a, b_a) = self.knots[i];
                let (s_b, b_b) = self.knots[i + 1];
                b_a + (b_b - b_a) * (s - s_a) / (s_b - s_a)
            }
        }
    }

    /// Right derivative `β′(s+)`.
    pub fn derivative(&self, s: f64) -> f64 {
        match self.segment(s) {
            None => 0.0,
            Some(i) => {
                let (s_a, b_a) = self.knots[i];
                let (s_b, b_b) = self.knots[i + 1];
                (b_b - b_a) / (s_b - s_a)
            }
        }
    }

    fn cumulative_at(&self, s: f64) -> f64 {
        let n = self.knots.len();
        if s <= self.knots[0].0 {
            return 0.0;
        }
        if s >= self.knots[n - 1].0 {
            return self.cumulative[n - 1];
        }
        let i = self.segment(s).unwrap_or(n - 2);
        let (s_a, b_a) = self.knots[i];
        self.cumulative[i] + 0.5 * (b_a + self.eval(s)) * (s - s_a)
    }

    /// `∫₀ˢ β`, exact for the piecewise-linear profile.
    pub fn antiderivative(&self, s: f64) -> f64 {
        self.cumulative_at(s) - self.cumulative_at(0.0)
    }

    /// `∫ β`, exact.
    pub fn integral(&self) -> f64 {
        self.cumulative[self.knots.len() - 1]
    }

    /// `∫ β²`, exact.
    pub fn integral_sq(&self) -> f64 {
        self.knots
            .windows(2)
            .map(|w| {
                let (s_a, a) = w[0];
                let (s_b, b) = w[1];
                (s_b - s_a) * (a * a + a * b + b * b) / 3.0
            })
            .sum()
    }

    /// `∫ (|Θ′|² − γ²) = ∫ (β² − 2γβ)`, exact.
    pub fn rate_defect_integral(&self) -> f64 {
        self.integral_sq() - 2.0 * self.gamma * self.integral()
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be positive and finite, got {v}")))
    }
}

fn finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { what: name.into() })
    }
}

/// Tent of height 1 on `[−1, 1]`.
pub fn triangle_beta(gamma: f64) -> Result<SlowdownBeta> {
    SlowdownBeta::new(gamma, BetaShape::Triangle { height: 1.0, half_width: 1.0 })
}

/// Signed pair with `∫(β² − 2γβ) = 0` for `γ = 1`: heights `1` and `(√17 − 3)/2`
/// on tents of base 2.
pub fn signed_zero_mean_beta() -> Result<SlowdownBeta> {
    SlowdownBeta::new(
        1.0,
        BetaShape::SignedTriangles { a: 1.0, b: (17f64.sqrt() - 3.0) / 2.0, base: 2.0 },
    )
}
