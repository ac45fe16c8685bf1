//! Finite-difference quadratic forms on the truncated strip `(−L, L) × (−1, 1)`.
//!
//! Both forms are assembled edge by edge from the quadratic form itself, so
//! the matrices are symmetric to the last bit, and the mass matrix is the
//! identity after dividing by the cell area `h_s h_t`. Nodes are ordered with
//! `t` fastest, which keeps the bandwidth at `nt`.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::eigen::{eig_sparse_lowest, SparseEigOptions, SparseSym, SPARSE_TOL};
use crate::fiber::{fiber_matrix, fiber_nodes, threshold_on_grid, twisted_potential, FiberProblem};
use crate::geometry::{metric_factor_rate, TwistProfile};
use crate::{Error, Result};

pub const MIN_STRIP_NODES: usize = 32;
pub const DEFAULT_NT: usize = 64;
/// Nodes per unit length in `s` for the default grid.
pub const DEFAULT_S_DENSITY: usize = 12;

#[derive(Debug, Clone)]
pub struct StripDiscretization {
    pub eps: f64,
    pub profile: TwistProfile,
    /// Truncation half-length.
    pub l: f64,
    pub ns: usize,
    pub nt: usize,
}

impl StripDiscretization {
    pub fn new(eps: f64, profile: TwistProfile, l: f64, ns: usize, nt: usize) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::invalid("eps", "must be positive"));
        }
        if profile.asymptotic_rate().is_none() {
            return Err(Error::invalid("profile", "strip forms need an eventually constant twist rate"));
        }
        let s0 = support_radius(&profile);
        if !(l > s0 + 5.0) || !l.is_finite() {
            return Err(Error::invalid("L", format!("need L > s0 + 5 = {}", s0 + 5.0)));
        }
        if ns < MIN_STRIP_NODES || nt < MIN_STRIP_NODES {
            return Err(Error::invalid("ns", format!("ns and nt must be at least {MIN_STRIP_NODES}")));
        }
        Ok(Self { eps, profile, l, ns, nt })
    }

    /// `L = max(40, s0 + 20)`, `h_s = 1/12`, `nt = 64`.
    pub fn with_defaults(eps: f64, profile: TwistProfile) -> Result<Self> {
        let s0 = support_radius(&profile);
        let l = (s0 + 20.0).max(40.0).ceil();
        Self::new(eps, profile, l, default_ns(l), DEFAULT_NT)
    }

    /// Same grid spacing on `(−L′, L′)`; the grids nest when `L′/L` is an integer.
    pub fn with_half_length(&self, l: f64) -> Result<Self> {
        let ns = ((self.ns + 1) as f64 * l / self.l).round() as usize - 1;
        Self::new(self.eps, self.profile.clone(), l, ns, self.nt)
    }

    /// `lim_{|s|→∞} |Θ′(s)|`.
    pub fn gamma(&self) -> f64 {
        self.profile.asymptotic_rate().unwrap_or(0.0)
    }

    pub fn hs(&self) -> f64 {
        2.0 * self.l / (self.ns + 1) as f64
    }

    pub fn ht(&self) -> f64 {
        2.0 / (self.nt + 1) as f64
    }

    pub fn dim(&self) -> usize {
        self.ns * self.nt
    }

    pub fn s_nodes(&self) -> Vec<f64> {
        let h = self.hs();
        (1..=self.ns).map(|i| -self.l + i as f64 * h).collect()
    }

    pub fn t_nodes(&self) -> Vec<f64> {
        fiber_nodes(self.nt)
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.nt + j
    }

    pub fn meta(&self) -> GridMeta {
        GridMeta { eps: self.eps, l: self.l, ns: self.ns, nt: self.nt, hs: self.hs(), ht: self.ht() }
    }
}

/// Radius outside which the twist rate is constant.
fn support_radius(profile: &TwistProfile) -> f64 {
    match profile.beta() {
        Some(b) => b.s0(),
        None => profile.breakpoints().iter().fold(0.0, |m, s| m.max(s.abs())),
    }
}

/// `ns = 24 L − 1`, i.e. `h_s = 1/12`.
pub fn default_ns(l: f64) -> usize {
    (2.0 * DEFAULT_S_DENSITY as f64 * l).round() as usize - 1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridMeta {
    pub eps: f64,
    pub l: f64,
    pub ns: usize,
    pub nt: usize,
    pub hs: f64,
    pub ht: f64,
}

struct FormGrid {
    l: f64,
    ns: usize,
    nt: usize,
    eps: f64,
}

/// Edge-by-edge assembly of
/// `Σ w |D_s ψ − g ψ̄|² + ε⁻² |D_t ψ|² + V ψ²`, divided by the cell area.
/// `edge(s, t)` returns `(w, g)` at an `s`-edge midpoint; `pot(s, t)` is
/// evaluated at nodes.
fn assemble_form<E, P>(grid: &FormGrid, edge: E, pot: P) -> Vec<(usize, usize, f64)>
where
    E: Fn(f64, f64) -> (f64, f64),
    P: Fn(f64, f64) -> f64,
{
    let FormGrid { l, ns, nt, eps } = *grid;
    let hs = 2.0 * l / (ns + 1) as f64;
    let ht = 2.0 / (nt + 1) as f64;
    let t = fiber_nodes(nt);
    let idx = |i: usize, j: usize| i * nt + j;
    let mut trip = Vec::with_capacity(ns * nt * 7);

    // s-edges e = 0..=ns join node e − 1 and node e (out-of-range nodes are
    // the Dirichlet boundary).
    for e in 0..=ns {
        let s_mid = -l + (e as f64 + 0.5) * hs;
        for (j, &tj) in t.iter().enumerate() {
            let (w, g) = edge(s_mid, tj);
            let c_right = 1.0 / hs - 0.5 * g;
            let c_left = -1.0 / hs - 0.5 * g;
            let left = (e > 0).then(|| idx(e - 1, j));
            let right = (e < ns).then(|| idx(e, j));
            if let Some(r) = right {
                trip.push((r, r, w * c_right * c_right));
            }
            if let Some(lft) = left {
                trip.push((lft, lft, w * c_left * c_left));
            }
            if let (Some(lft), Some(r)) = (left, right) {
                let v = w * c_left * c_right;
                trip.push((lft, r, v));
                trip.push((r, lft, v));
            }
        }
    }
    let kt = 1.0 / (eps * eps * ht * ht);
    for i in 0..ns {
        for e in 0..=nt {
            let down = (e > 0).then(|| idx(i, e - 1));
            let up = (e < nt).then(|| idx(i, e));
            for n in [down, up].into_iter().flatten() {
                trip.push((n, n, kt));
            }
            if let (Some(d), Some(u)) = (down, up) {
                trip.push((d, u, -kt));
                trip.push((u, d, -kt));
            }
        }
    }
    for i in 0..ns {
        let s = -l + (i + 1) as f64 * hs;
        for (j, &tj) in t.iter().enumerate() {
            trip.push((idx(i, j), idx(i, j), pot(s, tj)));
        }
    }
    trip
}

fn check_finite(trip: &[(usize, usize, f64)]) -> Result<()> {
    match trip.iter().find(|(_, _, v)| !v.is_finite()) {
        Some((r, c, _)) => Err(Error::NonFinite { what: format!("strip coefficient at ({r}, {c})") }),
        None => Ok(()),
    }
}

/// Full triplet list of the `c_ε` form.
pub fn assemble_c_triplets(sd: &StripDiscretization) -> Result<Vec<(usize, usize, f64)>> {
    if sd.profile.asymptotic_rate().is_none() {
        return Err(Error::invalid("profile", "c_eps assembly needs an eventually constant twist rate"));
    }
    let tp = &sd.profile;
    let eps = sd.eps;
    let grid = FormGrid { l: sd.l, ns: sd.ns, nt: sd.nt, eps };
    let trip = assemble_form(
        &grid,
        |s, t| {
            let rate = tp.dnorm1(s);
            let f = metric_factor_rate(rate, eps, t);
            let df = rate * tp.dnorm1_prime(s) * eps * eps * t * t / f;
            (1.0 / (f * f), df / (2.0 * f))
        },
        |s, t| twisted_potential(tp.dnorm1(s), eps, t),
    );
    check_finite(&trip)?;
    Ok(trip)
}

/// The form
/// `∫ f⁻² |∂_sψ − (∂_s f / 2f) ψ|² + ε⁻² |∂_tψ|² + V_ε |ψ|²`.
pub fn assemble_c(sd: &StripDiscretization) -> Result<SparseSym> {
    SparseSym::from_full_triplets(sd.dim(), &assemble_c_triplets(sd)?)
}

pub fn assemble_d_triplets(eps: f64, gamma: f64, l: f64, ns: usize, nt: usize) -> Result<Vec<(usize, usize, f64)>> {
    if !(eps > 0.0) || !(gamma >= 0.0) || !(l > 0.0) {
        return Err(Error::invalid("eps", "need eps > 0, gamma >= 0, L > 0"));
    }
    if ns < 2 || nt < 2 {
        return Err(Error::invalid("ns", "need at least two nodes per direction"));
    }
    let grid = FormGrid { l, ns, nt, eps };
    let trip = assemble_form(
        &grid,
        |_, t| {
            let h = metric_factor_rate(gamma, eps, t);
            (1.0 / (h * h), 0.0)
        },
        |_, t| twisted_potential(gamma, eps, t),
    );
    check_finite(&trip)?;
    Ok(trip)
}

/// The form `∫ h⁻² |∂_sψ|² + ε⁻² |∂_tψ|² + Y⁰_ε |ψ|²`.
pub fn assemble_d(eps: f64, gamma: f64, l: f64, ns: usize, nt: usize) -> Result<SparseSym> {
    SparseSym::from_full_triplets(ns * nt, &assemble_d_triplets(eps, gamma, l, ns, nt)?)
}

/// `max |A − Aᵀ|` of a full triplet list.
pub fn triplet_asymmetry(trip: &[(usize, usize, f64)]) -> f64 {
    let mut full: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for &(r, c, v) in trip {
        *full.entry((r, c)).or_insert(0.0) += v;
    }
    crate::eigen::max_asymmetry_map(&full)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StripForm {
    /// The twisted form `c_ε` of a profile with eventually constant rate.
    C,
    /// The untwisted-reference form `d_ε` with constant rate `γ`.
    D,
}

#[derive(Debug, Clone)]
pub struct StripSolveOptions {
    pub k: usize,
    pub tol: f64,
    pub seed: u64,
    /// Repeat on the grid with halved `(ns, nt)` to estimate discretization error.
    pub grid_check: bool,
}

impl Default for StripSolveOptions {
    fn default() -> Self {
        Self { k: 4, tol: SPARSE_TOL, seed: 0, grid_check: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumResult {
    pub form: StripForm,
    pub eigenvalues: Vec<f64>,
    pub residual_norms: Vec<f64>,
    /// Extrapolated `λ_{ε,1}(0)`.
    pub threshold: f64,
    /// `λ_{ε,1}(0)` of the transverse grid in use, the bottom of the
    /// essential spectrum of the discrete operator on the full line.
    pub threshold_discrete: f64,
    /// Indices `j` with `λ_j < threshold_discrete − truncation_margin`.
    pub below_threshold: Vec<usize>,
    /// `threshold_discrete − truncation_margin − λ_j`.
    pub margins: Vec<f64>,
    pub truncation_margin: f64,
    /// `λ₁(L) − λ₁(2L)` of the beta-free problem on the same grid spacing.
    pub truncation_shift: f64,
    /// Estimated discretization error of `threshold_discrete − λ_j`.
    pub gap_grid_error: f64,
    /// Estimated discretization error of each `λ_j`.
    pub grid_errors: Vec<f64>,
    pub grid: GridMeta,
    pub iterations: usize,
}

impl SpectrumResult {
    /// CSV with header `j,lambda,below_threshold`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "j,lambda,below_threshold")?;
        for (j, v) in self.eigenvalues.iter().enumerate() {
            writeln!(w, "{},{v:.16e},{}", j + 1, self.below_threshold.contains(&j))?;
        }
        Ok(())
    }
}

/// Lowest eigenvalue of the beta-free problem on `(−L, L)` with `ns`, `nt`
/// interior nodes. The problem separates: it is the transverse matrix with
/// `p²` replaced by the lowest discrete `−∂_s²` eigenvalue.
pub fn beta_free_ground(eps: f64, gamma: f64, l: f64, ns: usize, nt: usize) -> Result<f64> {
    let hs = 2.0 * l / (ns + 1) as f64;
    let mu = 4.0 / (hs * hs) * (std::f64::consts::PI / (2.0 * (ns + 1) as f64)).sin().powi(2);
    let fp = FiberProblem::new(eps, gamma, mu.sqrt(), nt)?;
    Ok(crate::eigen::eig_tridiag(&fiber_matrix(&fp)?, 1)?.values[0])
}

struct RawSolve {
    values: Vec<f64>,
    residuals: Vec<f64>,
    threshold_discrete: f64,
    iterations: usize,
}

fn shift_hint(sd: &StripDiscretization, form: StripForm, thr: f64) -> f64 {
    let gamma = sd.gamma();
    let depth = match (form, sd.profile.beta()) {
        (StripForm::C, Some(b)) => b
            .knots()
            .iter()
            .map(|&s| {
                let v = b.eval(s);
                (v * v - 2.0 * gamma * v).abs()
            })
            .fold(gamma * gamma, f64::max),
        (StripForm::C, None) => gamma * gamma,
        _ => 0.0,
    };
    thr - 1.0 - depth
}

fn raw_solve(sd: &StripDiscretization, form: StripForm, opts: &StripSolveOptions) -> Result<RawSolve> {
    let gamma = sd.gamma();
    let a = match form {
        StripForm::C => assemble_c(sd)?,
        StripForm::D => assemble_d(sd.eps, gamma, sd.l, sd.ns, sd.nt)?,
    };
    let threshold_discrete = threshold_on_grid(sd.eps, gamma, sd.nt)?;
    let eopts = SparseEigOptions {
        tol: opts.tol,
        seed: opts.seed,
        shift: Some(shift_hint(sd, form, threshold_discrete)),
        want_vectors: false,
        ..Default::default()
    };
    let r = eig_sparse_lowest(&a, None, opts.k, &eopts)?;
    Ok(RawSolve {
        values: r.values,
        residuals: r.residual_norms,
        threshold_discrete,
        iterations: r.iterations,
    })
}

/// The `k` lowest eigenvalues of the strip form, with below-threshold
/// detection against the transverse threshold of the same grid.
pub fn solve_strip(
    sd: &StripDiscretization,
    form: StripForm,
    threshold: f64,
    opts: &StripSolveOptions,
) -> Result<SpectrumResult> {
    if opts.k == 0 {
        return Err(Error::invalid("k", "must be positive"));
    }
    let gamma = sd.gamma();
    let coarse_sd = (sd.ns > 2 * MIN_STRIP_NODES && sd.nt >= 2 * MIN_STRIP_NODES).then(|| StripDiscretization {
        ns: (sd.ns - 1) / 2,
        nt: sd.nt / 2,
        ..sd.clone()
    });
    let (fine, coarse) = rayon::join(
        || raw_solve(sd, form, opts),
        || match (&coarse_sd, opts.grid_check) {
            (Some(c), true) => raw_solve(c, form, opts).map(Some),
            _ => Ok(None),
        },
    );
    let fine = fine?;
    let coarse = coarse?;
    if opts.grid_check && coarse.is_none() {
        return Err(Error::invalid("ns", "grid check needs ns >= 65 and nt >= 64"));
    }

    let truncation_shift = beta_free_ground(sd.eps, gamma, sd.l, sd.ns, sd.nt)?
        - beta_free_ground(sd.eps, gamma, 2.0 * sd.l, 2 * sd.ns + 1, sd.nt)?;

    let k = fine.values.len();
    let (grid_errors, gap_grid_error) = match (&coarse, &coarse_sd) {
        (Some(c), Some(csd)) => {
            let r = csd.ht() / sd.ht();
            let denom = r * r - 1.0;
            let raw: Vec<f64> = (0..k).map(|j| (fine.values[j] - c.values[j]).abs() / denom).collect();
            let gap_err = |j: usize| {
                ((fine.threshold_discrete - fine.values[j]) - (c.threshold_discrete - c.values[j])).abs() / denom
            };
            let bound: Vec<usize> = (0..k).filter(|&j| fine.values[j] < fine.threshold_discrete).collect();
            let g = if bound.is_empty() { gap_err(0) } else { bound.iter().map(|&j| gap_err(j)).fold(0.0, f64::max) };
            (raw, g)
        }
        _ => (vec![f64::NAN; k], 0.0),
    };
    let truncation_margin = truncation_shift.max(gap_grid_error);
    let margins: Vec<f64> = fine.values.iter().map(|v| fine.threshold_discrete - truncation_margin - v).collect();
    let below_threshold = (0..k).filter(|&j| margins[j] > 0.0).collect();
    Ok(SpectrumResult {
        form,
        eigenvalues: fine.values,
        residual_norms: fine.residuals,
        threshold,
        threshold_discrete: fine.threshold_discrete,
        below_threshold,
        margins,
        truncation_margin,
        truncation_shift,
        gap_grid_error,
        grid_errors,
        grid: sd.meta(),
        iterations: fine.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_twist_from_beta, triangle_beta, BetaShape, SlowdownBeta};
    use std::f64::consts::PI;

    fn zero_beta(gamma: f64) -> TwistProfile {
        make_twist_from_beta(SlowdownBeta::new(gamma, BetaShape::Zero { s0: 1.0 }).unwrap()).unwrap()
    }

    #[test]
    fn c_equals_d_without_slowdown() {
        let sd = StripDiscretization::new(0.1, zero_beta(1.0), 8.0, 40, 32).unwrap();
        let c = assemble_c(&sd).unwrap();
        let d = assemble_d(0.1, 1.0, 8.0, 40, 32).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn c_form_is_exactly_symmetric() {
        let sd = StripDiscretization::new(0.05, make_twist_from_beta(triangle_beta(1.0).unwrap()).unwrap(), 7.0, 40, 32)
            .unwrap();
        let trip = assemble_c_triplets(&sd).unwrap();
        assert_eq!(triplet_asymmetry(&trip), 0.0);
        assert_eq!(assemble_c(&sd).unwrap().bandwidth(), 32);
    }

    #[test]
    fn separable_rectangle() {
        // γ → 0 limit through the d form
        let (eps, l, ns, nt) = (0.5, 6.0, 143, 32);
        let a = assemble_d(eps, 0.0, l, ns, nt).unwrap();
        let r = eig_sparse_lowest(&a, None, 1, &SparseEigOptions::default()).unwrap();
        let exact = (PI / (2.0 * l)).powi(2) + (PI / 2.0).powi(2) / (eps * eps);
        assert!(((r.values[0] - exact) / exact).abs() < 5e-3);
        // and it equals the separable discrete value exactly
        let sep = beta_free_ground(eps, 0.0, l, ns, nt).unwrap();
        assert!((r.values[0] - sep).abs() < 1e-8 * sep);
    }

    #[test]
    fn default_grid() {
        let sd = StripDiscretization::with_defaults(0.05, make_twist_from_beta(triangle_beta(1.0).unwrap()).unwrap())
            .unwrap();
        assert_eq!(sd.l, 40.0);
        assert_eq!(sd.ns, 959);
        assert!((sd.hs() - 1.0 / 12.0).abs() < 1e-15);
        assert_eq!(sd.with_half_length(80.0).unwrap().ns, 1919);
    }

    #[test]
    fn rejects_short_truncation() {
        let p = make_twist_from_beta(triangle_beta(1.0).unwrap()).unwrap();
        assert!(StripDiscretization::new(0.1, p.clone(), 5.5, 64, 64).is_err());
        assert!(StripDiscretization::new(0.1, p, 10.0, 16, 64).is_err());
    }
}
