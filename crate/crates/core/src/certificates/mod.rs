//! Rayleigh-gap certificates for the trial functions `φ(s) u⁰(t)`.
//!
//! `φ` equals `1` (or `1 + ηβ`) on `[−s0, s0]` and decays like
//! `e^{−δ(|s| − s0)}` outside. Outside the support of `β` the rate is `γ`, so
//! only the kinetic term survives in the tails and is integrated in closed
//! form. On the core, the gap is the sum of
//!
//! - `T1 = ∫ φ′² u² / f²`
//! - `T2 = ¼ ∫ (∂_s f)² / f⁴ φ² u²`
//! - `T3 = −∫ ∂_s f / f³ φ φ′ u²`
//! - `T4 = ∫ (V_ε − Y⁰_ε) φ² u²`
//!
//! computed by tensor Gauss quadrature.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::eigen::{gauss_legendre, SparseSym};
use crate::fiber::{potential_y, threshold, twisted_potential, GroundState};
use crate::geometry::{metric_factor_rate, SlowdownBeta, TwistProfile};
use crate::interp::CubicSpline;
use crate::strip::{assemble_c, StripDiscretization};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrialKind {
    PsiDelta,
    PsiDeltaEta,
}

#[derive(Debug, Clone)]
pub struct TrialFunction {
    pub kind: TrialKind,
    pub delta: f64,
    pub eta: f64,
    pub profile: TwistProfile,
    pub ground: GroundState,
}

impl TrialFunction {
    pub fn psi_delta(delta: f64, profile: TwistProfile, ground: GroundState) -> Result<Self> {
        Self::new(TrialKind::PsiDelta, delta, 0.0, profile, ground)
    }

    pub fn psi_delta_eta(delta: f64, eta: f64, profile: TwistProfile, ground: GroundState) -> Result<Self> {
        Self::new(TrialKind::PsiDeltaEta, delta, eta, profile, ground)
    }

    pub fn new(kind: TrialKind, delta: f64, eta: f64, profile: TwistProfile, ground: GroundState) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::invalid("delta", format!("must be positive, got {delta}")));
        }
        if !(eta >= 0.0) || !eta.is_finite() {
            return Err(Error::invalid("eta", format!("must be non-negative, got {eta}")));
        }
        if kind == TrialKind::PsiDelta && eta != 0.0 {
            return Err(Error::invalid("eta", "psi-delta trial functions have eta = 0"));
        }
        let beta = profile
            .beta()
            .ok_or_else(|| Error::invalid("profile", "certificates need a beta-slowdown profile"))?;
        if beta.gamma() != ground.gamma {
            return Err(Error::invalid(
                "ground",
                format!("ground state gamma {} does not match profile gamma {}", ground.gamma, beta.gamma()),
            ));
        }
        // 1 + ηβ is piecewise linear: knots suffice.
        if let Some(s) = beta.knots().into_iter().find(|&s| 1.0 + eta * beta.eval(s) <= 0.0) {
            return Err(Error::invalid("eta", format!("1 + eta * beta <= 0 at s = {s}")));
        }
        Ok(Self { kind, delta, eta, profile, ground })
    }

    fn beta(&self) -> &SlowdownBeta {
        self.profile.beta().expect("validated in constructor")
    }

    /// `φ(s)` and `φ′(s)`.
    pub fn phi(&self, s: f64) -> (f64, f64) {
        let b = self.beta();
        let s0 = b.s0();
        if s > s0 {
            let e = (-self.delta * (s - s0)).exp();
            (e, -self.delta * e)
        } else if s < -s0 {
            let e = (self.delta * (s + s0)).exp();
            (e, self.delta * e)
        } else {
            (1.0 + self.eta * b.eval(s), self.eta * b.derivative(s))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub kind: TrialKind,
    pub delta: f64,
    pub eta: f64,
    pub eps: f64,
    /// `c_ε(ψ) − λ_{ε,1}(0) ‖ψ‖²`.
    pub gap: f64,
    pub norm2: f64,
    pub normalized_gap: f64,
    /// `ε → 0` limit of `gap`.
    pub prediction_raw: f64,
    /// `ε → 0` limit of `normalized_gap`.
    pub prediction_normalized: f64,
    /// `(δ/2) ∫(|Θ′|² − γ²)` for `ψ_δ`, `−δη ∫ β²(2γ − β)` for `ψ_{δ,η}`.
    pub leading_term: f64,
    pub quad_error: f64,
    /// `[T1, T2, T3, T4]`.
    pub terms: [f64; 4],
    /// `ε⁻² ∫ u′² + ∫ Y⁰ u² − λ` for the interpolated ground state.
    pub eigen_residual: f64,
}

/// Quadrature resolution for [`evaluate_certificate_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateQuadrature {
    pub s_order: usize,
    /// Subpanels per `β` linear piece.
    pub s_panels: usize,
    /// Gauss points per ground-state spline cell.
    pub t_order: usize,
}

impl Default for CertificateQuadrature {
    fn default() -> Self {
        Self { s_order: 8, s_panels: 8, t_order: 4 }
    }
}

impl CertificateQuadrature {
    fn coarse(&self) -> Self {
        Self {
            s_order: self.s_order.max(3) - 2,
            s_panels: (self.s_panels / 2).max(1),
            t_order: self.t_order.max(3) - 1,
        }
    }
}

struct TRule {
    t: Vec<f64>,
    w_u2: Vec<f64>,
}

/// Gauss nodes on each spline cell; weights pre-multiplied by `u²` after
/// renormalizing `∫ u² = 1` under this rule. Also returns the eigen residual.
fn t_rule(g: &GroundState, u: &CubicSpline, order: usize) -> (TRule, f64) {
    let (x, w) = gauss_legendre(order);
    let mut t = Vec::new();
    let mut wu2 = Vec::new();
    let mut kin = 0.0;
    let mut pot = 0.0;
    for cell in g.t.windows(2) {
        let (a, b) = (cell[0], cell[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (xi, wi) in x.iter().zip(&w) {
            let ti = mid + half * xi;
            let ui = u.eval(ti);
            let di = u.derivative(ti);
            t.push(ti);
            wu2.push(wi * half * ui * ui);
            kin += wi * half * di * di;
            pot += wi * half * potential_y(g.eps, g.gamma, 0.0, ti) * ui * ui;
        }
    }
    let n2: f64 = wu2.iter().sum();
    wu2.iter_mut().for_each(|v| *v /= n2);
    let residual = (kin / (g.eps * g.eps) + pot) / n2 - g.lambda1_0;
    (TRule { t, w_u2: wu2 }, residual)
}

/// `(∫u²/f², ∫(∂_s f)²/f⁴ u², ∫ ∂_s f/f³ u², ∫ (V − Y⁰) u²)` at one `s`.
fn t_moments(tp: &TwistProfile, gamma: f64, eps: f64, s: f64, rule: &TRule) -> [f64; 4] {
    let rate = tp.dnorm1(s);
    let rate_p = tp.dnorm1_prime(s);
    let mut m = [0.0; 4];
    for (&t, &w) in rule.t.iter().zip(&rule.w_u2) {
        let f = metric_factor_rate(rate, eps, t);
        let f2 = f * f;
        let df = rate * rate_p * eps * eps * t * t / f;
        m[0] += w / f2;
        m[1] += w * df * df / (f2 * f2);
        m[2] += w * df / (f2 * f);
        m[3] += w * (twisted_potential(rate, eps, t) - twisted_potential(gamma, eps, t));
    }
    m
}

/// Gauss nodes and weights over `[−s0, s0]`, split at the knots of `β`.
fn s_rule(beta: &SlowdownBeta, order: usize, panels: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let knots: Vec<f64> = beta.knots().into_iter().filter(|s| s.abs() <= beta.s0()).collect();
    let mut out = Vec::new();
    for seg in knots.windows(2) {
        let h = (seg[1] - seg[0]) / panels as f64;
        for p in 0..panels {
            let mid = seg[0] + (p as f64 + 0.5) * h;
            for (xi, wi) in x.iter().zip(&w) {
                out.push((mid + 0.5 * h * xi, 0.5 * h * wi));
            }
        }
    }
    out
}

struct Raw {
    terms: [f64; 4],
    core_norm: f64,
    residual: f64,
}

fn evaluate_raw(tf: &TrialFunction, eps: f64, q: &CertificateQuadrature) -> Result<Raw> {
    let beta = tf.beta();
    let gamma = beta.gamma();
    let spline = tf.ground.interpolant()?;
    let (rule, residual) = t_rule(&tf.ground, &spline, q.t_order);
    let mut terms = [0.0; 4];
    let mut core_norm = 0.0;
    for (s, ws) in s_rule(beta, q.s_order, q.s_panels) {
        let (phi, dphi) = tf.phi(s);
        let m = t_moments(&tf.profile, gamma, eps, s, &rule);
        terms[0] += ws * dphi * dphi * m[0];
        terms[1] += ws * 0.25 * phi * phi * m[1];
        terms[2] -= ws * phi * dphi * m[2];
        terms[3] += ws * phi * phi * m[3];
        core_norm += ws * phi * phi;
    }
    // Tails: ∫ φ′² = δ over both tails, rate γ so f = h_ε.
    let tail_m = t_moments(&tf.profile, gamma, eps, beta.s0() + 1.0, &rule);
    terms[0] += tf.delta * tail_m[0];
    if terms.iter().any(|v| !v.is_finite()) {
        return Err(Error::Quadrature { detail: "non-finite certificate term".into() });
    }
    Ok(Raw { terms, core_norm, residual })
}

/// Gap, norm and limits of one trial function at one `ε`.
pub fn evaluate_certificate(tf: &TrialFunction, eps: f64) -> Result<Certificate> {
    evaluate_certificate_with(tf, eps, &CertificateQuadrature::default())
}

pub fn evaluate_certificate_with(tf: &TrialFunction, eps: f64, q: &CertificateQuadrature) -> Result<Certificate> {
    if eps != tf.ground.eps {
        return Err(Error::invalid(
            "eps",
            format!("ground state computed for eps = {}, requested {eps}", tf.ground.eps),
        ));
    }
    let fine = evaluate_raw(tf, eps, q)?;
    let coarse = evaluate_raw(tf, eps, &q.coarse())?;
    let gap: f64 = fine.terms.iter().sum();
    let gap_coarse: f64 = coarse.terms.iter().sum();
    let norm2 = fine.core_norm + 1.0 / tf.delta;
    let lim = limit_prediction(tf);
    Ok(Certificate {
        kind: tf.kind,
        delta: tf.delta,
        eta: tf.eta,
        eps,
        gap,
        norm2,
        normalized_gap: gap / norm2,
        prediction_raw: lim.raw,
        prediction_normalized: lim.normalized,
        leading_term: lim.leading,
        quad_error: (gap - gap_coarse).abs() + norm2 * fine.residual.abs(),
        terms: fine.terms,
        eigen_residual: fine.residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitPrediction {
    pub raw: f64,
    pub normalized: f64,
    pub leading: f64,
    /// `‖ψ‖²` in the limit.
    pub norm2: f64,
    /// `δ²/(2 s0 δ + 1)`: the tail kinetic energy per unit norm.
    pub tail_term: f64,
}

/// `ε → 0` limits of the gap:
/// `δ + η² ∫β′² + ½ ∫ (β² − 2γβ)(1 + ηβ)²`, and its normalized value.
pub fn limit_prediction(tf: &TrialFunction) -> LimitPrediction {
    let beta = tf.beta();
    let gamma = beta.gamma();
    let eta = tf.eta;
    let delta = tf.delta;
    // Polynomial integrands on linear pieces: exact with 8 Gauss points.
    let mut kin = 0.0;
    let mut pot = 0.0;
    let mut core = 0.0;
    let mut shape = 0.0;
    for (s, w) in s_rule(beta, 8, 1) {
        let b = beta.eval(s);
        let db = beta.derivative(s);
        let phi = 1.0 + eta * b;
        kin += w * eta * eta * db * db;
        pot += w * 0.5 * (b * b - 2.0 * gamma * b) * phi * phi;
        core += w * phi * phi;
        shape += w * b * b * (2.0 * gamma - b);
    }
    let raw = delta + kin + pot;
    let norm2 = core + 1.0 / delta;
    let leading = match tf.kind {
        TrialKind::PsiDelta => 0.5 * delta * beta.rate_defect_integral(),
        TrialKind::PsiDeltaEta => -delta * eta * shape,
    };
    LimitPrediction {
        raw,
        normalized: raw / norm2,
        leading,
        norm2,
        tail_term: delta * delta / (2.0 * beta.s0() * delta + 1.0),
    }
}

/// Normalized gap of the same trial function measured by the assembled
/// `c_ε` matrix: `ψᵀAψ / ψᵀψ − λ_disc`, where `λ_disc` is the threshold of
/// the same transverse grid.
pub fn assembled_normalized_gap(tf: &TrialFunction, sd: &StripDiscretization) -> Result<f64> {
    let a: SparseSym = assemble_c(sd)?;
    let u = tf.ground.interpolant()?;
    let t = sd.t_nodes();
    let ut: Vec<f64> = t.iter().map(|&x| u.eval(x)).collect();
    let mut psi = vec![0.0; sd.dim()];
    for (i, &s) in sd.s_nodes().iter().enumerate() {
        let (phi, _) = tf.phi(s);
        for (j, &uj) in ut.iter().enumerate() {
            psi[sd.index(i, j)] = phi * uj;
        }
    }
    let num = a.quadratic_form(&psi);
    let den: f64 = psi.iter().map(|x| x * x).sum();
    let thr = crate::fiber::threshold_on_grid(sd.eps, sd.gamma(), sd.nt)?;
    Ok(num / den - thr)
}

/// How `η` is chosen for `ψ_{δ,η}` in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "rule", content = "value")]
pub enum EtaRule {
    Zero,
    SqrtDelta,
    Fixed(f64),
}

impl EtaRule {
    pub fn eta(&self, delta: f64) -> f64 {
        match self {
            EtaRule::Zero => 0.0,
            EtaRule::SqrtDelta => delta.sqrt(),
            EtaRule::Fixed(v) => *v,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    pub delta: f64,
    pub eta: f64,
    pub eps: f64,
    pub certificate: Option<Certificate>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub kind: TrialKind,
    pub cells: Vec<SweepCell>,
}

/// Certificates on a `δ × ε` grid. Failed cells are recorded and the sweep
/// continues.
pub fn certificate_sweep(
    profile: &TwistProfile,
    delta_grid: &[f64],
    eps_grid: &[f64],
    kind: TrialKind,
    eta_rule: EtaRule,
) -> Result<SweepTable> {
    if delta_grid.is_empty() || eps_grid.is_empty() {
        return Err(Error::invalid("grid", "delta and eps grids must be nonempty"));
    }
    let gamma = profile
        .beta()
        .ok_or_else(|| Error::invalid("profile", "certificates need a beta-slowdown profile"))?
        .gamma();
    let grounds: Vec<std::result::Result<GroundState, String>> =
        eps_grid.par_iter().map(|&e| threshold(e, gamma).map_err(|x| x.to_string())).collect();
    let pairs: Vec<(usize, f64)> = delta_grid
        .iter()
        .flat_map(|&d| (0..eps_grid.len()).map(move |i| (i, d)))
        .collect();
    let cells = pairs
        .par_iter()
        .map(|&(i, delta)| {
            let eps = eps_grid[i];
            let eta = match kind {
                TrialKind::PsiDelta => 0.0,
                TrialKind::PsiDeltaEta => eta_rule.eta(delta),
            };
            let result = grounds[i].clone().and_then(|g| {
                TrialFunction::new(kind, delta, eta, profile.clone(), g)
                    .and_then(|tf| evaluate_certificate(&tf, eps))
                    .map_err(|e| e.to_string())
            });
            let (certificate, error) = match result {
                Ok(c) => (Some(c), None),
                Err(e) => (None, Some(e)),
            };
            SweepCell { delta, eta, eps, certificate, error }
        })
        .collect();
    Ok(SweepTable { kind, cells })
}

#[derive(Debug, Clone, Serialize)]
pub struct TrendRow {
    pub delta: f64,
    /// `|normalized_gap − prediction_normalized|` ordered by decreasing `ε`.
    pub deviations: Vec<(f64, f64)>,
    /// Whether the deviation shrinks as `ε` decreases.
    pub converging: bool,
}

impl SweepTable {
    pub fn certificates(&self) -> impl Iterator<Item = &Certificate> {
        self.cells.iter().filter_map(|c| c.certificate.as_ref())
    }

    pub fn negative_rows(&self) -> usize {
        self.certificates().filter(|c| c.normalized_gap < 0.0).count()
    }

    pub fn trend(&self) -> Vec<TrendRow> {
        let mut deltas: Vec<f64> = self.cells.iter().map(|c| c.delta).collect();
        deltas.sort_by(f64::total_cmp);
        deltas.dedup();
        deltas
            .into_iter()
            .map(|d| {
                let mut dev: Vec<(f64, f64)> = self
                    .certificates()
                    .filter(|c| c.delta == d)
                    .map(|c| (c.eps, (c.normalized_gap - c.prediction_normalized).abs()))
                    .collect();
                dev.sort_by(|a, b| b.0.total_cmp(&a.0));
                let converging = dev.windows(2).all(|w| w[1].1 <= w[0].1);
                TrendRow { delta: d, deviations: dev, converging }
            })
            .collect()
    }

    /// CSV `delta,eta,eps,gap,norm2,normalized_gap,prediction_raw,prediction_normalized,quad_error`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "delta,eta,eps,gap,norm2,normalized_gap,prediction_raw,prediction_normalized,quad_error")?;
        for c in self.certificates() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                c.delta,
                c.eta,
                c.eps,
                c.gap,
                c.norm2,
                c.normalized_gap,
                c.prediction_raw,
                c.prediction_normalized,
                c.quad_error
            )?;
        }
        Ok(())
    }
}
