//! Independent oracles: closed forms, an ODE shooting solver for the fiber
//! problem, and dense symmetric eigendecomposition.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twistband::certificates::{evaluate_certificate, limit_prediction, TrialFunction};
use twistband::eigen::{eig_sparse_lowest, eig_tridiag, SparseEigOptions, SparseSym, TridiagSystem};
use twistband::fiber::{potential_y, solve_fiber, threshold, FiberProblem, DEFAULT_FIBER_NODES};
use twistband::geometry::{integrate_frame, triangle_beta, CurveSpec, TwistProfile};
use twistband::thin::{delta_coefficient, effective_spectrum, EffectiveOperator, MollifiedFamily};

/// `u(1)` for `−ε⁻² u″ + Y u = λ u`, `u(−1) = 0`, `u′(−1) = 1`, by RK4.
fn shoot(eps: f64, gamma: f64, p: f64, lambda: f64, steps: usize) -> f64 {
    let h = 2.0 / steps as f64;
    let rhs = |t: f64, u: f64, v: f64| (v, eps * eps * (potential_y(eps, gamma, p, t) - lambda) * u);
    let (mut u, mut v) = (0.0, 1.0);
    for i in 0..steps {
        let t = -1.0 + i as f64 * h;
        let k1 = rhs(t, u, v);
        let k2 = rhs(t + h / 2.0, u + h / 2.0 * k1.0, v + h / 2.0 * k1.1);
        let k3 = rhs(t + h / 2.0, u + h / 2.0 * k2.0, v + h / 2.0 * k2.1);
        let k4 = rhs(t + h, u + h * k3.0, v + h * k3.1);
        u += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        v += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
    }
    u
}

/// The `n`-th eigenvalue lies in `ε⁻²(nπ/2)² + [min Y, max Y]`, where `u(1)`
/// changes sign exactly once when the intervals are disjoint.
fn shooting_eigenvalue(eps: f64, gamma: f64, p: f64, n: usize) -> f64 {
    let ys: Vec<f64> = (0..=2000).map(|i| potential_y(eps, gamma, p, -1.0 + i as f64 / 1000.0)).collect();
    let (ymin, ymax) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
    let base = (n as f64 * FRAC_PI_2 / eps).powi(2);
    let (mut lo, mut hi) = (base + ymin - 1e-9, base + ymax + 1e-9);
    let f = |l: f64| shoot(eps, gamma, p, l, 20000);
    let flo = f(lo);
    assert!(flo * f(hi) < 0.0, "no sign change for n = {n}");
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if f(mid) * flo > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn fiber_matches_shooting() {
    for &(eps, gamma, p) in &[(0.1, 1.0, 0.0), (0.1, 1.0, 2.0), (0.5, 1.0, 1.0), (0.2, 2.0, 0.5)] {
        let fp = FiberProblem::new(eps, gamma, p, DEFAULT_FIBER_NODES).unwrap();
        let sol = solve_fiber(&fp, 3).unwrap();
        for n in 1..=3 {
            let oracle = shooting_eigenvalue(eps, gamma, p, n);
            let got = sol.values[n - 1];
            assert!((got - oracle).abs() <= 1e-7 * oracle, "eps {eps} gamma {gamma} p {p} n {n}: {got} vs {oracle}");
        }
    }
}

#[test]
fn untwisted_fiber_closed_form() {
    let fp = FiberProblem::new(0.5, 0.0, 1.0, DEFAULT_FIBER_NODES).unwrap();
    let sol = solve_fiber(&fp, 4).unwrap();
    for n in 1..=4 {
        let exact = (n as f64 * PI).powi(2) + 1.0;
        assert!((sol.values[n - 1] - exact).abs() <= 1e-9 * exact);
    }
}

fn random_sparse_spd(rng: &mut ChaCha8Rng, n: usize) -> Vec<(usize, usize, f64)> {
    let mut trip = Vec::new();
    let mut rowsum = vec![0.0; n];
    for i in 0..n {
        for d in 1..=3 {
            if i + d < n && rng.random::<f64>() < 0.7 {
                let v: f64 = rng.random_range(-1.0..1.0);
                trip.push((i, i + d, v));
                rowsum[i] += v.abs();
                rowsum[i + d] += v.abs();
            }
        }
    }
    for (i, r) in rowsum.iter().enumerate() {
        trip.push((i, i, r + rng.random_range(0.05..3.0)));
    }
    trip
}

fn dense(n: usize, upper: &[(usize, usize, f64)]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for &(i, j, v) in upper {
        m[(i, j)] += v;
        if i != j {
            m[(j, i)] += v;
        }
    }
    m
}

#[test]
fn sparse_solver_matches_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let opts = SparseEigOptions { tol: 1e-10, ..Default::default() };
    for case in 0..24 {
        let n = rng.random_range(30..=200);
        let trip = random_sparse_spd(&mut rng, n);
        let a = SparseSym::from_upper_triplets(n, &trip).unwrap();
        let generalized = case % 3 == 0;
        let (b, mut oracle) = if generalized {
            let d: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
            let s = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, d.iter().map(|x| 1.0 / x.sqrt())));
            let m = &s * dense(n, &trip) * &s;
            (Some(SparseSym::diagonal(&d)), m.symmetric_eigen().eigenvalues.as_slice().to_vec())
        } else {
            (None, dense(n, &trip).symmetric_eigen().eigenvalues.as_slice().to_vec())
        };
        oracle.sort_by(f64::total_cmp);
        let r = eig_sparse_lowest(&a, b.as_ref(), 4, &opts).unwrap();
        for j in 0..4 {
            assert!((r.values[j] - oracle[j]).abs() <= 1e-8, "case {case} (n = {n}) j {j}: {} vs {}", r.values[j], oracle[j]);
        }
    }
}

#[test]
fn tridiagonal_three_by_three() {
    let sys = TridiagSystem::new(vec![2.0, 2.0, 2.0], vec![-1.0, -1.0]).unwrap();
    let r = eig_tridiag(&sys, 3).unwrap();
    for (v, e) in r.values.iter().zip([2.0 - SQRT_2, 2.0, 2.0 + SQRT_2]) {
        assert!((v - e).abs() <= 1e-12);
    }
}

#[test]
fn circle_frame_closed_form() {
    let fp = integrate_frame(&CurveSpec::constant(&[1.0]).unwrap(), (0.0, 2.0 * PI), 1e-3).unwrap();
    for (s, f) in fp.s.iter().zip(&fp.samples) {
        let exact = [s.sin(), 1.0 - s.cos()];
        let err = (f.gamma[0] - exact[0]).hypot(f.gamma[1] - exact[1]);
        assert!(err < 1e-10, "s = {s}: {err}");
    }
}

#[test]
fn harmonic_oscillator_levels() {
    let es = effective_spectrum(&EffectiveOperator::new(TwistProfile::square()), 4).unwrap();
    for j in 1..=4 {
        let exact = SQRT_2 * (2 * j - 1) as f64;
        assert!((es.values[j - 1] - exact).abs() < 1e-7);
    }
}

#[test]
fn delta_closed_form() {
    // −∫ t χ₁′ χ₁ = ½ ∫ χ₁² = ½ by parts.
    assert!((delta_coefficient(0.0).unwrap() - 0.5).abs() < 1e-14);
}

#[test]
fn triangle_certificate_limit() {
    // β tent of height 1 on [−1, 1], γ = 1: ∫(β² − 2β) = −4/3, ‖φ‖² → 2 + 1/δ.
    let tp = TwistProfile::from_beta(triangle_beta(1.0).unwrap()).unwrap();
    for delta in [0.2, 0.05] {
        let g = threshold(0.01, 1.0).unwrap();
        let tf = TrialFunction::psi_delta(delta, tp.clone(), g).unwrap();
        let lim = limit_prediction(&tf);
        let exact = (delta - 2.0 / 3.0) / (2.0 + 1.0 / delta);
        assert!((lim.normalized - exact).abs() < 1e-12);
        assert!((lim.leading + 2.0 * delta / 3.0).abs() < 1e-12);
        let c = evaluate_certificate(&tf, 0.01).unwrap();
        assert!((c.normalized_gap - exact).abs() < 1e-4, "{} vs {exact}", c.normalized_gap);
    }
}

#[test]
fn nu_closed_form() {
    let mf = MollifiedFamily::square_twist(0.25).unwrap();
    let (_, nu2) = mf.nu(0.05).unwrap();
    assert!((nu2 - 0.5 * 0.05f64.powf(-0.25)).abs() < 1e-12);
}
