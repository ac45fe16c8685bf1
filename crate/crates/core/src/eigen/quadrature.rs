use crate::{Error, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
///
/// Newton iteration on `P_n` from the Chebyshev-like initial guess.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "gauss_legendre needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadRule {
    GaussLegendre { order: usize, panels: usize },
    CompositeSimpson { panels: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub panels: usize,
    pub evaluations: usize,
}

/// Integrates `f` over `[a, b]` with the requested rule.
pub fn quad_interval<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rule: QuadRule) -> Result<QuadResult> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::invalid("interval", "endpoints must be finite"));
    }
    let mut evaluations = 0;
    let mut eval = |x: f64| -> Result<f64> {
        evaluations += 1;
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::Quadrature { detail: format!("non-finite integrand value at x = {x}") })
        }
    };
    match rule {
        QuadRule::GaussLegendre { order, panels } => {
            if order == 0 || panels == 0 {
                return Err(Error::invalid("rule", "order and panels must be positive"));
            }
            let (x, w) = gauss_legendre(order);
            let h = (b - a) / panels as f64;
            let mut sum = 0.0;
            for p in 0..panels {
                let lo = a + p as f64 * h;
                let mid = lo + 0.5 * h;
                let mut s = 0.0;
                for (xi, wi) in x.iter().zip(&w) {
                    s += wi * eval(mid + 0.5 * h * xi)?;
                }
                sum += 0.5 * h * s;
            }
            Ok(QuadResult { value: sum, panels, evaluations })
        }
        QuadRule::CompositeSimpson { panels } => {
            if panels == 0 {
                return Err(Error::invalid("rule", "panels must be positive"));
            }
            let h = (b - a) / panels as f64;
            let mut sum = eval(a)? + eval(b)?;
            for p in 0..panels {
                let lo = a + p as f64 * h;
                sum += 4.0 * eval(lo + 0.5 * h)?;
                if p > 0 {
                    sum += 2.0 * eval(lo)?;
                }
            }
            Ok(QuadResult { value: sum * h / 6.0, panels, evaluations })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn weights_sum_to_two_and_integrate_polynomials() {
        for n in 1..40 {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13, "n={n}");
            // exact up to degree 2n-1
            let deg = 2 * n - 2;
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert!((s - 2.0 / (deg as f64 + 1.0)).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn t_sin_pi_t() {
        let rule = QuadRule::GaussLegendre { order: 10, panels: 1 };
        let r = quad_interval(|t| t * (PI * t).sin(), 0.0, 1.0, rule).unwrap();
        assert!((r.value - 1.0 / PI).abs() < 1e-13);
        assert_eq!(r.panels, 1);
        assert_eq!(r.evaluations, 10);
    }

    #[test]
    fn chi1_normalized() {
        let r = quad_interval(
            |t| (PI * t / 2.0).cos().powi(2),
            -1.0,
            1.0,
            QuadRule::CompositeSimpson { panels: 200 },
        )
        .unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn triangle_area_with_kink_on_panel_edge() {
        let tri = |s: f64| (1.0 - s.abs()).max(0.0);
        let r = quad_interval(tri, -1.0, 1.0, QuadRule::GaussLegendre { order: 3, panels: 2 }).unwrap();
        assert!((r.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn doubling_order_gains_three_digits() {
        let f = |x: f64| (3.0 * x).exp() * (x * x).cos();
        let exact = quad_interval(f, 0.0, 1.0, QuadRule::GaussLegendre { order: 60, panels: 4 })
            .unwrap()
            .value;
        let mut prev = f64::INFINITY;
        for n in [2usize, 4, 8] {
            let v = quad_interval(f, 0.0, 1.0, QuadRule::GaussLegendre { order: n, panels: 1 })
                .unwrap()
                .value;
            let err = (v - exact).abs();
            if prev.is_finite() && prev > 1e-13 {
                assert!(err <= prev / 1e3 || err < 1e-14, "n={n} err={err} prev={prev}");
            }
            prev = err;
        }
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        let r = quad_interval(|t| 1.0 / t, 0.0, 1.0, QuadRule::CompositeSimpson { panels: 4 });
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
