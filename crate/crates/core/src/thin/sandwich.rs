use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::effective::{effective_spectrum, EffectiveOperator, EffectiveSpectrum};
use super::family::MollifiedFamily;
use super::perturbation::delta_coefficient;
use super::upper::{upper_spectrum, w_deviation, UpperSpectrum, T_QUAD_ORDER};
use crate::eigen::gauss_legendre;
use crate::fiber::threshold;
use crate::geometry::metric_factor_rate;
use crate::strip::SpectrumResult;
use crate::{Error, Result};

/// Caveat attached to every count.
pub const THRESHOLD_CAVEAT: &str =
    "essential threshold approximated by the constant-rate fiber threshold with the asymptotic rate of the member";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountResult {
    pub eps: f64,
    /// `lim |Θ_ε′|`.
    pub gamma_eps: f64,
    /// `λ_{ε,1}(0)` at `γ_ε`.
    pub threshold: f64,
    /// `(π/2ε)²`.
    pub box_value: f64,
    /// `threshold − box_value`.
    pub gap: f64,
    pub n: usize,
    pub effective: EffectiveSpectrum,
}

/// `N(ε)`: effective eigenvalues of `Θ_ε` strictly below the shifted threshold.
pub fn count_below_threshold(eps: f64, mf: &MollifiedFamily) -> Result<CountResult> {
    let member = mf.member(eps)?;
    let gamma_eps = member.asymptotic_rate().ok_or_else(|| {
        Error::invalid("family", "twist rate is not eventually constant; the threshold is not available")
    })?;
    let thr = threshold(eps, gamma_eps)?;
    let box_value = (std::f64::consts::FRAC_PI_2 / eps).powi(2);
    let gap = thr.lambda1_0 - box_value;
    let eo = EffectiveOperator::new(member);
    let mut k = 8;
    loop {
        let es = effective_spectrum(&eo, k)?;
        let n = es.count_below(gap);
        if n < k {
            return Ok(CountResult { eps, gamma_eps, threshold: thr.lambda1_0, box_value, gap, n, effective: es });
        }
        k *= 2;
    }
}

/// `(4 / (h_t² ε²)) sin²(π / (2(nt + 1)))`, the lowest eigenvalue of
/// `−ε⁻² ∂_t²` on the transverse grid.
pub fn discrete_box_value(eps: f64, nt: usize) -> f64 {
    let ht = 2.0 / (nt + 1) as f64;
    4.0 / (ht * ht * eps * eps) * (std::f64::consts::PI / (2.0 * (nt + 1) as f64)).sin().powi(2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichRow {
    pub j: usize,
    pub lambda_eff: f64,
    pub lambda_m: f64,
    pub lambda_2d_minus_box: Option<f64>,
    /// Smallest `K` with `λ_M ≤ λ_eff + K ε^d`.
    pub k_upper_required: f64,
    /// Smallest `K` with `λ_M ≥ λ_eff (1 − K ε^{1−a}) − K ε^{2−4a}`.
    pub k_lower_required: f64,
    /// Lower bound with the family constant `K`.
    pub lower_bound: f64,
    pub lower_ok: bool,
    /// `λ_2d − box ≤ λ_M` within margins, when a 2D result is supplied.
    pub upper_2d_ok: Option<bool>,
    pub lower_2d_ok: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichReport {
    pub eps: f64,
    pub d: f64,
    pub rows: Vec<SandwichRow>,
    pub effective: EffectiveSpectrum,
    pub upper: UpperSpectrum,
    /// `sup |rate² δ(ε² rate²) f̃ − rate²/2| / ε^{1−3a}`.
    pub delta_k: f64,
    /// `sup |W_ε − rate²/2|` divided by the sum of the four powers of `ε`.
    pub w_k: f64,
    pub box_value_2d: Option<f64>,
}

fn s_samples(mf: &MollifiedFamily, eps: f64) -> Vec<f64> {
    let span = 1.5 * mf.corner(eps) + 2.0;
    let mut s: Vec<f64> = (0..=2000).map(|i| -span + 2.0 * span * i as f64 / 2000.0).collect();
    s.push(mf.corner(eps));
    s.push(-mf.corner(eps));
    s
}

fn delta_k(eps: f64, mf: &MollifiedFamily) -> Result<f64> {
    let tp = mf.member(eps)?;
    let (t, _) = gauss_legendre(T_QUAD_ORDER);
    let mut sup: f64 = 0.0;
    for s in s_samples(mf, eps) {
        let r = tp.dnorm1(s);
        let r2 = r * r;
        let d = delta_coefficient(eps * eps * r2)?;
        for &tj in t.iter().chain(&[1.0]) {
            let f = metric_factor_rate(r, eps, tj);
            sup = sup.max((r2 * d * f - 0.5 * r2).abs());
        }
    }
    Ok(sup / eps.powf(1.0 - 3.0 * mf.a))
}

fn w_k(eps: f64, mf: &MollifiedFamily) -> Result<f64> {
    let (a, b, c) = (mf.a, mf.b, mf.c);
    let scale = eps.powf(4.0 - 2.0 * (a + b)) + eps.powf(2.0 - 2.0 * b) + eps.powf(2.0 - (a + c)) + eps.powf(2.0 - 4.0 * a);
    Ok(w_deviation(eps, mf, &s_samples(mf, eps))? / scale)
}

/// Relative slack allowed on top of the reported error estimates.
const MARGIN_REL: f64 = 1e-6;

/// Upper and lower bounds for the `k` lowest shifted eigenvalues.
///
/// Without `two_d` only `λ_M` against the effective values is checked. A
/// supplied 2D result must use the member `Θ_ε` on its own grid; its values
/// are shifted by the discrete transverse box value of that grid.
pub fn sandwich_check(eps: f64, mf: &MollifiedFamily, k: usize, two_d: Option<&SpectrumResult>) -> Result<SandwichReport> {
    if k == 0 {
        return Err(Error::invalid("k", "must be positive"));
    }
    let member = mf.member(eps)?;
    let (eff, upper) = rayon::join(
        || effective_spectrum(&EffectiveOperator::new(member.clone()), k),
        || upper_spectrum(eps, mf, k),
    );
    let (eff, upper) = (eff?, upper?);
    if let Some(td) = two_d {
        if (td.grid.eps - eps).abs() > 1e-15 * eps {
            return Err(Error::invalid("two_d", format!("computed at eps = {}, expected {eps}", td.grid.eps)));
        }
    }
    let d = mf.d_exponent();
    let p_lower = eps.powf(1.0 - mf.a);
    let q_lower = eps.powf(2.0 - 4.0 * mf.a);
    let box2d = two_d.map(|td| discrete_box_value(eps, td.grid.nt));
    let mut rows = Vec::with_capacity(k);
    for j in 0..k {
        let le = eff.values[j];
        let lm = upper.values[j];
        let err = eff.error_estimates[j] + upper.error_estimates[j] + MARGIN_REL * lm.abs().max(1.0);
        let lower_bound = le * (1.0 - mf.k * p_lower) - mf.k * q_lower;
        let two = two_d.filter(|td| j < td.eigenvalues.len());
        let l2 = two.zip(box2d).map(|(td, b)| td.eigenvalues[j] - b);
        let margin2d = two
            .map(|td| td.truncation_margin + td.grid_errors.get(j).copied().filter(|e| e.is_finite()).unwrap_or(0.0))
            .unwrap_or(0.0);
        let upper_2d_ok = l2.map(|v| v <= lm + err + margin2d);
        if upper_2d_ok == Some(false) {
            return Err(Error::BoundViolation {
                detail: format!(
                    "eps = {eps}, j = {}: shifted 2D value {} exceeds lambda_M = {lm} beyond margin {}",
                    j + 1,
                    l2.unwrap_or(f64::NAN),
                    err + margin2d
                ),
            });
        }
        rows.push(SandwichRow {
            j: j + 1,
            lambda_eff: le,
            lambda_m: lm,
            lambda_2d_minus_box: l2,
            k_upper_required: (lm - le).max(0.0) / eps.powf(d),
            k_lower_required: (le - lm).max(0.0) / (p_lower * le.abs() + q_lower),
            lower_bound,
            lower_ok: lm >= lower_bound - err,
            upper_2d_ok,
            lower_2d_ok: l2.map(|v| v >= lower_bound - err - margin2d),
        });
    }
    if let Some(r) = rows.iter().find(|r| !r.lower_ok) {
        return Err(Error::BoundViolation {
            detail: format!(
                "eps = {eps}, j = {}: lambda_M = {} below the effective lower bound {}",
                r.j, r.lambda_m, r.lower_bound
            ),
        });
    }
    Ok(SandwichReport {
        eps,
        d,
        rows,
        effective: eff,
        upper,
        delta_k: delta_k(eps, mf)?,
        w_k: w_k(eps, mf)?,
        box_value_2d: box2d,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantFit {
    /// Required constant per `ε`, in the order of the study.
    pub per_eps: Vec<f64>,
    pub max: f64,
    /// No value exceeds twice its predecessor at larger `ε` (up to `1e-9`).
    pub stable: bool,
}

impl ConstantFit {
    fn new(per_eps: Vec<f64>) -> Self {
        let stable = per_eps.windows(2).all(|w| w[1] <= 2.0 * w[0] + 1e-9);
        let max = per_eps.iter().copied().fold(0.0, f64::max);
        Self { per_eps, max, stable }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThinStudy {
    pub family: MollifiedFamily,
    /// Decreasing.
    pub eps_list: Vec<f64>,
    pub k: usize,
    pub reports: Vec<SandwichReport>,
    pub counts: Vec<CountResult>,
    /// Per `j`, the required upper and lower constants across `ε`.
    pub k_upper: Vec<ConstantFit>,
    pub k_lower: Vec<ConstantFit>,
    pub delta_k: ConstantFit,
    pub w_k: ConstantFit,
    pub caveats: Vec<String>,
}

impl ThinStudy {
    /// Bounds bracket consistently: the required constants stay bounded.
    pub fn consistent(&self) -> bool {
        self.k_upper.iter().chain(&self.k_lower).all(|f| f.stable)
    }

    /// `|λ_j(M_ε) − target_j|` per `ε` (rows) and `j` (columns).
    pub fn upper_deviation(&self, target: impl Fn(usize) -> f64) -> Vec<Vec<f64>> {
        self.reports.iter().map(|r| r.rows.iter().map(|row| (row.lambda_m - target(row.j)).abs()).collect()).collect()
    }

    /// `eps,j,lambda_eff,lambda_M,lambda_2d_minus_box,gap,N`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "eps,j,lambda_eff,lambda_M,lambda_2d_minus_box,gap,N")?;
        for (r, c) in self.reports.iter().zip(&self.counts) {
            for row in &r.rows {
                let l2 = row.lambda_2d_minus_box.map_or_else(String::new, |v| format!("{v:.16e}"));
                writeln!(
                    w,
                    "{:.16e},{},{:.16e},{:.16e},{l2},{:.16e},{}",
                    r.eps, row.j, row.lambda_eff, row.lambda_m, c.gap, c.n
                )?;
            }
        }
        Ok(())
    }

    /// `eps,gamma_eps,threshold,gap,N`.
    pub fn write_counts_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "eps,gamma_eps,threshold,gap,N")?;
        for c in &self.counts {
            writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e},{}", c.eps, c.gamma_eps, c.threshold, c.gap, c.n)?;
        }
        Ok(())
    }
}

/// Sandwich checks and counts over `eps_list`, sorted into decreasing order.
/// `two_d` supplies an optional 2D result per `ε`.
pub fn thin_study(
    mf: &MollifiedFamily,
    eps_list: &[f64],
    k: usize,
    two_d: impl Fn(f64) -> Option<Result<SpectrumResult>> + Sync,
) -> Result<ThinStudy> {
    if eps_list.is_empty() {
        return Err(Error::invalid("eps_list", "must not be empty"));
    }
    let mut eps: Vec<f64> = eps_list.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    eps.dedup();
    let pairs: Vec<(SandwichReport, CountResult)> = eps
        .par_iter()
        .map(|&e| {
            let td = two_d(e).transpose()?;
            Ok((sandwich_check(e, mf, k, td.as_ref())?, count_below_threshold(e, mf)?))
        })
        .collect::<Result<_>>()?;
    let (reports, counts): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    let col = |f: &dyn Fn(&SandwichRow) -> f64| -> Vec<ConstantFit> {
        (0..k).map(|j| ConstantFit::new(reports.iter().map(|r| f(&r.rows[j])).collect())).collect()
    };
    let k_upper = col(&|r| r.k_upper_required);
    let k_lower = col(&|r| r.k_lower_required);
    let delta_fit = ConstantFit::new(reports.iter().map(|r| r.delta_k).collect());
    let wk = ConstantFit::new(reports.iter().map(|r| r.w_k).collect());
    Ok(ThinStudy {
        family: *mf,
        eps_list: eps,
        k,
        reports,
        counts,
        k_upper,
        k_lower,
        delta_k: delta_fit,
        w_k: wk,
        caveats: vec![
            THRESHOLD_CAVEAT.into(),
            "min-max values at or above the bottom of the essential spectrum are reported as that bottom".into(),
            "all constants are fitted, not proven".into(),
        ],
    })
}
