//! Transverse fiber operators `D_ε(p) = −ε⁻² ∂_t² + Y^p_ε` on `(−1, 1)`.
//!
//! Discretized with second-order central differences on `m` interior nodes
//! and Dirichlet ends. Eigenvalues are Richardson-extrapolated from the grids
//! with `m` and `2m + 1` interior nodes, whose spacings differ by exactly 2.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::eigen::{eig_tridiag, TridiagSystem};
use crate::interp::CubicSpline;
use crate::{Error, Result};

/// Default number of interior nodes of the coarse grid.
pub const DEFAULT_FIBER_NODES: usize = 512;
/// Smallest admissible grid.
pub const MIN_FIBER_NODES: usize = 16;

/// `Y⁰` with twist rate `rate`:
/// `−3 rate⁴ ε² t² / (4h⁴) + rate² / (2h²)`, `h = √(1 + rate² ε² t²)`.
///
/// The same expression is the potential `V_ε` of the strip form with
/// `rate = |Θ′(s)|`, so it is shared by the strip assembly.
#[inline]
pub fn twisted_potential(rate: f64, eps: f64, t: f64) -> f64 {
    let r2 = rate * rate;
    let h2 = 1.0 + r2 * eps * eps * t * t;
    -3.0 * r2 * r2 * eps * eps * t * t / (4.0 * h2 * h2) + r2 / (2.0 * h2)
}

/// `Y^p_ε(t) = p²/h² + Y⁰_ε(t)`.
#[inline]
pub fn potential_y(eps: f64, gamma: f64, p: f64, t: f64) -> f64 {
    let h2 = 1.0 + gamma * gamma * eps * eps * t * t;
    p * p / h2 + twisted_potential(gamma, eps, t)
}

/// `Y⁰_ε > 0` on `[−1, 1]` holds when `εγ < √2`.
pub fn positivity_window(eps: f64, gamma: f64) -> bool {
    eps * gamma < std::f64::consts::SQRT_2
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberProblem {
    pub eps: f64,
    pub gamma: f64,
    pub p: f64,
    pub m: usize,
}

impl FiberProblem {
    pub fn new(eps: f64, gamma: f64, p: f64, m: usize) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::invalid("eps", format!("must be positive, got {eps}")));
        }
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::invalid("gamma", format!("must be non-negative, got {gamma}")));
        }
        if !p.is_finite() {
            return Err(Error::invalid("p", "must be finite"));
        }
        if m < MIN_FIBER_NODES {
            return Err(Error::invalid("m", format!("need at least {MIN_FIBER_NODES} interior nodes")));
        }
        Ok(Self { eps, gamma, p, m })
    }

    pub fn with_nodes(&self, m: usize) -> Self {
        Self { m, ..*self }
    }

    pub fn positivity_window(&self) -> bool {
        positivity_window(self.eps, self.gamma)
    }
}

/// Interior nodes `t_j = (2j − m − 1)/(m + 1)`, symmetric by construction.
pub fn fiber_nodes(m: usize) -> Vec<f64> {
    let d = (m + 1) as f64;
    (1..=m)
        .map(|j| {
            let k = 2 * j as i64 - m as i64 - 1;
            k as f64 / d
        })
        .collect()
}

/// Central-difference matrix of `D_ε(p)` on `m` interior nodes.
pub fn fiber_matrix(fp: &FiberProblem) -> Result<TridiagSystem> {
    let m = fp.m;
    let h = 2.0 / (m + 1) as f64;
    let k = 1.0 / (h * h * fp.eps * fp.eps);
    let diag = fiber_nodes(m)
        .iter()
        .map(|&t| 2.0 * k + potential_y(fp.eps, fp.gamma, fp.p, t))
        .collect();
    TridiagSystem::new(diag, vec![-k; m - 1])
}

/// Extrapolated eigenvalues with the two raw grids they came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiberSolution {
    pub values: Vec<f64>,
    /// `|fine − coarse| / 3`, the size of the Richardson correction.
    pub error_estimates: Vec<f64>,
    pub coarse: Vec<f64>,
    pub fine: Vec<f64>,
    pub m: usize,
}

/// The `n_max` lowest eigenvalues of `D_ε(p)`.
pub fn solve_fiber(fp: &FiberProblem, n_max: usize) -> Result<FiberSolution> {
    if n_max == 0 || n_max > fp.m {
        return Err(Error::invalid("n_max", format!("need 1 <= n_max <= {}", fp.m)));
    }
    let coarse = eig_tridiag(&fiber_matrix(fp)?, n_max)?.values;
    let fine = eig_tridiag(&fiber_matrix(&fp.with_nodes(2 * fp.m + 1))?, n_max)?.values;
    let values: Vec<f64> = fine.iter().zip(&coarse).map(|(f, c)| f + (f - c) / 3.0).collect();
    let error_estimates = fine.iter().zip(&coarse).map(|(f, c)| (f - c).abs() / 3.0).collect();
    Ok(FiberSolution { values, error_estimates, coarse, fine, m: fp.m })
}

/// Lowest eigenvalue of `D_ε(0)` on one grid, without extrapolation.
///
/// This is the threshold seen by a two-dimensional discretization using the
/// same transverse grid.
pub fn threshold_on_grid(eps: f64, gamma: f64, m: usize) -> Result<f64> {
    let fp = FiberProblem::new(eps, gamma, 0.0, m)?;
    Ok(eig_tridiag(&fiber_matrix(&fp)?, 1)?.values[0])
}

/// Band functions `λ_{ε,n}(p)` on a symmetric momentum grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandTable {
    pub eps: f64,
    pub gamma: f64,
    pub p: Vec<f64>,
    /// `bands[i][n]` is `λ_{ε,n+1}(p_i)`.
    pub bands: Vec<Vec<f64>>,
    pub errors: Vec<Vec<f64>>,
    /// `min_i (λ_{ε,1}(p_i) − p_i²/(1+γ²ε²) + ε²γ⁴)`; non-negative when the
    /// lower bound holds on every sample.
    pub lower_bound_slack: f64,
}

/// The symmetric default grid: 129 points on `[−P, P]`, `P = 8/max(1, γε)`.
pub fn default_p_grid(eps: f64, gamma: f64) -> Vec<f64> {
    symmetric_grid(8.0 / (gamma * eps).max(1.0), 64)
}

/// `2 half + 1` points on `[−pmax, pmax]`, exactly symmetric.
pub fn symmetric_grid(pmax: f64, half: usize) -> Vec<f64> {
    let pos: Vec<f64> = (0..=half).map(|i| pmax * i as f64 / half as f64).collect();
    pos.iter().rev().map(|p| 0.0 - p).chain(pos.iter().skip(1).copied()).collect()
}

pub fn band_table(eps: f64, gamma: f64, p_grid: &[f64], n_max: usize, m: usize) -> Result<BandTable> {
    if p_grid.is_empty() {
        return Err(Error::invalid("p_grid", "must not be empty"));
    }
    if p_grid.iter().any(|p| !p.is_finite()) {
        return Err(Error::invalid("p_grid", "must be finite"));
    }
    let mut sorted: Vec<f64> = p_grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mirrored: Vec<f64> = sorted.iter().rev().map(|p| -p).collect();
    if sorted != mirrored {
        return Err(Error::invalid("p_grid", "must be symmetric about 0"));
    }
    let base = FiberProblem::new(eps, gamma, 0.0, m)?;
    let bound = |p: f64| p * p / (1.0 + gamma * gamma * eps * eps) - eps * eps * gamma.powi(4);
    let rows: Vec<FiberSolution> = p_grid
        .par_iter()
        .enumerate()
        .map(|(index, &p)| {
            let sol = solve_fiber(&FiberProblem { p, ..base }, n_max)
                .map_err(|e| Error::FiberFailure { index, p, source: Box::new(e) })?;
            if let Some(v) = sol.values.iter().find(|v| **v < bound(p)) {
                return Err(Error::FiberFailure {
                    index,
                    p,
                    source: Box::new(Error::Positivity {
                        detail: format!("band value {v} below the lower bound {}", bound(p)),
                    }),
                });
            }
            Ok(sol)
        })
        .collect::<Result<_>>()?;
    let lower_bound_slack = rows
        .iter()
        .zip(p_grid)
        .map(|(r, &p)| r.values[0] - bound(p))
        .fold(f64::INFINITY, f64::min);
    Ok(BandTable {
        eps,
        gamma,
        p: p_grid.to_vec(),
        errors: rows.iter().map(|r| r.error_estimates.clone()).collect(),
        bands: rows.into_iter().map(|r| r.values).collect(),
        lower_bound_slack,
    })
}

impl BandTable {
    pub fn n_bands(&self) -> usize {
        self.bands.first().map_or(0, |b| b.len())
    }

    pub fn band(&self, n: usize) -> Vec<f64> {
        self.bands.iter().map(|row| row[n]).collect()
    }

    /// Largest `|λ_n(p) − λ_n(−p)|` over mirrored pairs.
    pub fn evenness_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, p) in self.p.iter().enumerate() {
            if let Some(j) = self.p.iter().position(|q| *q == -p) {
                for n in 0..self.n_bands() {
                    worst = worst.max((self.bands[i][n] - self.bands[j][n]).abs());
                }
            }
        }
        worst
    }

    /// Whether every band is nondecreasing in `|p|` along the grid.
    pub fn monotone_in_abs_p(&self) -> bool {
        let mut idx: Vec<usize> = (0..self.p.len()).collect();
        idx.sort_by(|&a, &b| self.p[a].abs().total_cmp(&self.p[b].abs()));
        (0..self.n_bands()).all(|n| {
            idx.windows(2).all(|w| {
                let (a, b) = (w[0], w[1]);
                self.p[a].abs() == self.p[b].abs() || self.bands[b][n] >= self.bands[a][n]
            })
        })
    }

    /// Index of the grid point where band 1 is smallest.
    pub fn argmin_band1(&self) -> usize {
        (0..self.p.len())
            .min_by(|&a, &b| self.bands[a][0].total_cmp(&self.bands[b][0]))
            .unwrap_or(0)
    }

    /// Whether bands are ascending in `n` at every `p`.
    pub fn ordered(&self) -> bool {
        self.bands.iter().all(|row| row.windows(2).all(|w| w[0] <= w[1]))
    }

    /// CSV with header `p,lambda1,...,lambdaN`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = String::from("p");
        for n in 1..=self.n_bands() {
            header.push_str(&format!(",lambda{n}"));
        }
        writeln!(w, "{header}")?;
        for (p, row) in self.p.iter().zip(&self.bands) {
            write!(w, "{p:.16e}")?;
            for v in row {
                write!(w, ",{v:.16e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Whitespace-separated plot data, one column per band.
    pub fn write_dat<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# eps = {:.16e}, gamma = {:.16e}", self.eps, self.gamma)?;
        write!(w, "# p")?;
        for n in 1..=self.n_bands() {
            write!(w, " lambda{n}")?;
        }
        writeln!(w)?;
        for (p, row) in self.p.iter().zip(&self.bands) {
            write!(w, "{p:.16e}")?;
            for v in row {
                write!(w, " {v:.16e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// `λ_{ε,1}(0)` with its positive, L²-normalized eigenfunction `u⁰_{ε,1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundState {
    pub eps: f64,
    pub gamma: f64,
    pub lambda1_0: f64,
    pub error_estimate: f64,
    /// Nodes of the fine grid including the endpoints `±1`.
    pub t: Vec<f64>,
    /// `u⁰` at `t`, zero at the endpoints, `h Σ u² = 1`.
    pub u: Vec<f64>,
    pub m: usize,
}

impl GroundState {
    /// `max |u(t) − u(−t)|`.
    pub fn evenness_defect(&self) -> f64 {
        let n = self.u.len();
        (0..n).map(|i| (self.u[i] - self.u[n - 1 - i]).abs()).fold(0.0, f64::max)
    }

    /// Natural cubic spline through the nodal values.
    pub fn interpolant(&self) -> Result<CubicSpline> {
        CubicSpline::natural(self.t.clone(), self.u.clone())
    }

    /// `ε² λ_{ε,1}(0) − (π/2)²`.
    pub fn scaled_excess(&self) -> f64 {
        self.eps * self.eps * self.lambda1_0 - (std::f64::consts::PI / 2.0).powi(2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdSummary {
    pub eps: f64,
    pub gamma: f64,
    pub lambda1_0: f64,
    pub error_estimate: f64,
    pub scaled_excess: f64,
    pub positivity_window: bool,
    pub window_bound_eps: f64,
    pub m: usize,
}

impl From<&GroundState> for ThresholdSummary {
    fn from(g: &GroundState) -> Self {
        Self {
            eps: g.eps,
            gamma: g.gamma,
            lambda1_0: g.lambda1_0,
            error_estimate: g.error_estimate,
            scaled_excess: g.scaled_excess(),
            positivity_window: positivity_window(g.eps, g.gamma),
            window_bound_eps: if g.gamma > 0.0 { std::f64::consts::SQRT_2 / g.gamma } else { f64::INFINITY },
            m: g.m,
        }
    }
}

/// Essential-spectrum threshold `λ_{ε,1}(0)` with the default grid.
pub fn threshold(eps: f64, gamma: f64) -> Result<GroundState> {
    threshold_with(eps, gamma, DEFAULT_FIBER_NODES)
}

pub fn threshold_with(eps: f64, gamma: f64, m: usize) -> Result<GroundState> {
    let fp = FiberProblem::new(eps, gamma, 0.0, m)?;
    if !fp.positivity_window() {
        return Err(Error::Positivity {
            detail: format!("eps * gamma = {} is outside the window eps * gamma < sqrt(2)", eps * gamma),
        });
    }
    let sol = solve_fiber(&fp, 1)?;
    let fine = fp.with_nodes(2 * m + 1);
    let res = eig_tridiag(&fiber_matrix(&fine)?, 1)?;
    let mut v = res.vectors.and_then(|mut v| v.pop()).ok_or_else(|| Error::NonConvergence {
        detail: "missing ground-state vector".into(),
    })?;
    let sum: f64 = v.iter().sum();
    if sum < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    if let Some((j, x)) = v.iter().enumerate().find(|(_, x)| !(**x > 0.0)) {
        return Err(Error::Positivity {
            detail: format!("ground state not positive at node {j} (value {x})"),
        });
    }
    let h = 2.0 / (fine.m + 1) as f64;
    let norm = (h * v.iter().map(|x| x * x).sum::<f64>()).sqrt();
    let mut t = vec![-1.0];
    t.extend(fiber_nodes(fine.m));
    t.push(1.0);
    let mut u = vec![0.0];
    u.extend(v.iter().map(|x| x / norm));
    u.push(0.0);
    Ok(GroundState {
        eps,
        gamma,
        lambda1_0: sol.values[0],
        error_estimate: sol.error_estimates[0],
        t,
        u,
        m,
    })
}
