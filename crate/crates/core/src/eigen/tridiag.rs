use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{dot, norm2, EigResult, TRIDIAG_TOL};
use crate::{Error, Result};

/// Symmetric tridiagonal matrix `scale · T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagSystem {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
    pub scale: f64,
}

impl TridiagSystem {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        Self::with_scale(diag, offdiag, 1.0)
    }

    pub fn with_scale(diag: Vec<f64>, offdiag: Vec<f64>, scale: f64) -> Result<Self> {
        if diag.len() < 2 {
            return Err(Error::invalid("diag", "need at least 2 entries"));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::invalid(
                "offdiag",
                format!("length {} but diag has {}", offdiag.len(), diag.len()),
            ));
        }
        if !scale.is_finite() || diag.iter().chain(&offdiag).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                what: "tridiagonal entries".into(),
            });
        }
        Ok(Self {
            diag,
            offdiag,
            scale,
        })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// `y = scale · T x`
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.offdiag[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.offdiag[i] * x[i + 1];
            }
            y[i] = self.scale * acc;
        }
        y
    }

    fn inf_norm(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut r = self.diag[i].abs();
                if i > 0 {
                    r += self.offdiag[i - 1].abs();
                }
                if i + 1 < n {
                    r += self.offdiag[i].abs();
                }
                r
            })
            .fold(0.0, f64::max)
            * self.scale.abs()
    }

    /// Number of eigenvalues of the unscaled `T` strictly below `x`.
    fn sturm_count(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q == 0.0 {
            q = -tiny;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.dim() {
            let e = self.offdiag[i - 1];
            q = self.diag[i] - x - e * e / q;
            if q == 0.0 {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.offdiag[i - 1].abs();
            }
            if i + 1 < n {
                r += self.offdiag[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }
}

/// The `k` smallest eigenpairs of `sys` by Sturm bisection and inverse
/// iteration. Deterministic: the inverse-iteration start vectors come from a
/// fixed-seed generator.
pub fn eig_tridiag(sys: &TridiagSystem, k: usize) -> Result<EigResult> {
    eig_tridiag_with(sys, k, true)
}

/// Eigenvalues only; skips inverse iteration.
pub fn eig_tridiag_values(sys: &TridiagSystem, k: usize) -> Result<Vec<f64>> {
    Ok(eig_tridiag_with(sys, k, false)?.values)
}

pub(crate) fn eig_tridiag_with(sys: &TridiagSystem, k: usize, vectors: bool) -> Result<EigResult> {
    let n = sys.dim();
    if k > n {
        return Err(Error::invalid("k", format!("{k} exceeds dimension {n}")));
    }
    let (glo, ghi) = sys.gershgorin();
    let span = (ghi - glo).max(glo.abs().max(ghi.abs())).max(f64::MIN_POSITIVE);
    let mut values = Vec::with_capacity(k);
    let mut iterations = 0;
    let mut lower = glo - 1e-12 * span;
    for idx in 0..k {
        // Find x with count(x) == idx (lo) and count(x) > idx (hi).
        let mut lo = lower;
        let mut hi = ghi + 1e-12 * span;
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let tol = 2.0 * f64::EPSILON * (lo.abs().max(hi.abs())) + 1e-300;
            if hi - lo <= tol {
                break;
            }
            iterations += 1;
            if sys.sturm_count(mid) > idx {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let lam = 0.5 * (lo + hi);
        values.push(lam);
        lower = lo;
    }

    let mut vecs: Vec<Vec<f64>> = Vec::new();
    if vectors {
        let mut rng = ChaCha8Rng::seed_from_u64(0x7769_7374);
        for &lam in values.iter() {
            let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            for _ in 0..3 {
                x = solve_shifted(sys, lam, &x);
                // Orthogonalize against earlier vectors of nearby eigenvalues.
                for (j, prev) in vecs.iter().enumerate() {
                    if (values[j] - lam).abs() <= 1e-7 * span {
                        let c = dot(prev, &x);
                        for (xi, pi) in x.iter_mut().zip(prev) {
                            *xi -= c * pi;
                        }
                    }
                }
                let nx = norm2(&x);
                for xi in x.iter_mut() {
                    *xi /= nx;
                }
                iterations += 1;
            }
            vecs.push(x);
        }
    }

    let values: Vec<f64> = values.into_iter().map(|v| v * sys.scale).collect();
    let operator_norm = sys.inf_norm();
    let residual_norms = if vectors {
        vecs.iter()
            .zip(&values)
            .map(|(v, &lam)| {
                let av = sys.apply(v);
                let r: Vec<f64> = av.iter().zip(v).map(|(a, b)| a - lam * b).collect();
                norm2(&r) / norm2(v)
            })
            .collect()
    } else {
        Vec::new()
    };
    let result = EigResult {
        values,
        vectors: vectors.then_some(vecs),
        residual_norms,
        operator_norm,
        iterations,
        tolerance: TRIDIAG_TOL,
    };
    if vectors && !result.residuals_within_tolerance() {
        return Err(Error::NonConvergence {
            detail: format!(
                "tridiagonal inverse iteration residuals {:?} exceed {:e}",
                result.residual_norms, TRIDIAG_TOL
            ),
        });
    }
    Ok(result)
}

/// Solve `(T − shift I) x = b` by Gaussian elimination with partial pivoting.
fn solve_shifted(sys: &TridiagSystem, shift: f64, b: &[f64]) -> Vec<f64> {
    let n = sys.dim();
    let scale_ref = sys.diag.iter().map(|d| d.abs()).fold(0.0, f64::max).max(1e-300);
    let pivot_floor = f64::EPSILON * scale_ref;
    // Row i has entries at columns i, i+1, i+2 after pivoting.
    let mut d: Vec<f64> = sys.diag.iter().map(|x| x - shift).collect();
    let mut du: Vec<f64> = sys.offdiag.clone();
    let mut dl: Vec<f64> = sys.offdiag.clone();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut rhs = b.to_vec();
    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            if d[i].abs() < pivot_floor {
                d[i] = pivot_floor;
            }
            let f = dl[i] / d[i];
            d[i + 1] -= f * du[i];
            rhs[i + 1] -= f * rhs[i];
            dl[i] = f;
        } else {
            let f = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - f * tmp;
            du[i] = tmp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -f * du2[i];
            }
            rhs.swap(i, i + 1);
            rhs[i + 1] -= f * rhs[i];
            dl[i] = f;
        }
    }
    if d[n - 1].abs() < pivot_floor {
        d[n - 1] = pivot_floor;
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = rhs[i];
        if i + 1 < n {
            acc -= du[i] * x[i + 1];
        }
        if i + 2 < n {
            acc -= du2[i] * x[i + 2];
        }
        x[i] = acc / d[i];
    }
    x
}
