//! Finite differences for `−(A w′)′ + B w` on `(−R, R)`, Dirichlet ends.

use crate::eigen::{eig_tridiag_values, TridiagSystem};
use crate::{Error, Result};

/// Relative `R`-doubling shift accepted as converged.
pub const DOUBLING_TOL: f64 = 1e-7;
/// Largest half-length tried before giving up.
pub const MAX_HALF_LENGTH: f64 = 2048.0;

pub(crate) trait Coefficients: Sync {
    fn a(&self, s: f64) -> f64;
    fn b(&self, s: f64) -> f64;
}

pub(crate) fn assemble(c: &dyn Coefficients, r: f64, intervals: usize) -> Result<TridiagSystem> {
    let h = 2.0 * r / intervals as f64;
    let n = intervals - 1;
    let h2 = h * h;
    let a_mid: Vec<f64> = (0..intervals).map(|i| c.a(-r + (i as f64 + 0.5) * h)).collect();
    let diag = (0..n).map(|i| (a_mid[i] + a_mid[i + 1]) / h2 + c.b(-r + (i + 1) as f64 * h)).collect();
    let off = (1..n).map(|i| -a_mid[i] / h2).collect();
    TridiagSystem::new(diag, off)
}

/// Richardson pair on `N` and `2N` intervals.
#[derive(Debug, Clone)]
pub(crate) struct Extrapolated {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
}

pub(crate) fn solve(c: &dyn Coefficients, r: f64, step: f64, k: usize) -> Result<Extrapolated> {
    let intervals = ((2.0 * r / step).round() as usize).max(4);
    if k + 1 > intervals {
        return Err(Error::invalid("k", format!("{k} eigenvalues need a finer grid")));
    }
    let (coarse, fine) = rayon::join(
        || eig_tridiag_values(&assemble(c, r, intervals)?, k),
        || eig_tridiag_values(&assemble(c, r, 2 * intervals)?, k),
    );
    let (coarse, fine) = (coarse?, fine?);
    let values = fine.iter().zip(&coarse).map(|(f, c)| f + (f - c) / 3.0).collect();
    let errors = fine.iter().zip(&coarse).map(|(f, c)| (f - c).abs() / 3.0).collect();
    Ok(Extrapolated { values, errors })
}

#[derive(Debug, Clone)]
pub(crate) struct Truncated {
    pub values: Vec<f64>,
    pub raw: Vec<f64>,
    pub errors: Vec<f64>,
    pub capped: Vec<bool>,
    pub doubling_shift: Vec<f64>,
    pub half_length: f64,
}

/// Solves on `(−R, R)` and `(−2R, 2R)`; the pair is accepted when every
/// value moved by at most [`DOUBLING_TOL`] (relative), or when both sit at
/// or above `floor`, in which case the min-max value on the line is `floor`.
///
/// With `fixed = false` the first `R` is doubled until accepted.
pub(crate) fn solve_truncated(
    c: &dyn Coefficients,
    floor: Option<f64>,
    mut r: f64,
    fixed: bool,
    step: f64,
    k: usize,
) -> Result<Truncated> {
    let mut near = solve(c, r, step, k)?;
    loop {
        let far = solve(c, 2.0 * r, step, k)?;
        let shift: Vec<f64> = far.values.iter().zip(&near.values).map(|(f, n)| (n - f).abs()).collect();
        let capped: Vec<bool> = (0..k)
            .map(|j| floor.is_some_and(|fl| near.values[j] >= fl && far.values[j] >= fl))
            .collect();
        let ok = (0..k).all(|j| capped[j] || shift[j] <= DOUBLING_TOL * far.values[j].abs().max(1.0));
        if ok {
            let values = (0..k).map(|j| if capped[j] { floor.unwrap_or(far.values[j]) } else { far.values[j] }).collect();
            return Ok(Truncated {
                values,
                raw: far.values,
                errors: far.errors,
                capped,
                doubling_shift: shift,
                half_length: 2.0 * r,
            });
        }
        if fixed || 2.0 * r >= MAX_HALF_LENGTH {
            let worst = shift.iter().copied().fold(0.0, f64::max);
            return Err(Error::Truncation {
                detail: format!("R-doubling from R = {r} moves eigenvalues by {worst:.3e}"),
            });
        }
        near = far;
        r *= 2.0;
    }
}

/// Smallest `R = 2^j R₀` with `B(±R) ≥ 1.25 λ_k(R)`, or with `±R` past the
/// last breakpoint when `B` is bounded.
pub(crate) fn initial_half_length(
    c: &dyn Coefficients,
    support: f64,
    bounded: bool,
    step: f64,
    k: usize,
) -> Result<f64> {
    let mut r = (support + 2.0).max(4.0);
    loop {
        if bounded {
            return Ok(r);
        }
        let lk = solve(c, r, step, k)?.values[k - 1];
        if c.b(r).min(c.b(-r)) >= 1.25 * lk {
            return Ok(r);
        }
        r *= 2.0;
        if r > MAX_HALF_LENGTH {
            return Err(Error::Truncation { detail: "potential never exceeds 1.25 lambda_k".into() });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Box0;
    impl Coefficients for Box0 {
        fn a(&self, _: f64) -> f64 {
            1.0
        }
        fn b(&self, _: f64) -> f64 {
            0.0
        }
    }

    #[test]
    fn dirichlet_box() {
        let r = 1.5;
        let e = solve(&Box0, r, 0.01, 3).unwrap();
        for (j, v) in e.values.iter().enumerate() {
            let exact = ((j + 1) as f64 * std::f64::consts::PI / (2.0 * r)).powi(2);
            assert!((v - exact).abs() < 1e-8 * exact, "{v} vs {exact}");
        }
    }
}
