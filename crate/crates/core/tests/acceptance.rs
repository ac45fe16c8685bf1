//! End-to-end acceptance run. Prints one line per criterion and exits
//! nonzero if any fails.
//!
//!     cargo test --release --test acceptance

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twistband::certificates::{assembled_normalized_gap, evaluate_certificate, TrialFunction};
use twistband::eigen::{
    eig_sparse_lowest, eig_tridiag, quad_interval, QuadRule, SparseEigOptions, SparseSym, TridiagSystem,
};
use twistband::fiber::{
    band_table, default_p_grid, solve_fiber, threshold, FiberProblem, DEFAULT_FIBER_NODES,
};
use twistband::geometry::{
    immersion_sample, integrate_frame, signed_zero_mean_beta, triangle_beta, CurveSpec, Lattice, TwistProfile,
};
use twistband::strip::{solve_strip, StripDiscretization, StripForm, StripSolveOptions};
use twistband::thin::{
    count_below_threshold, delta_coefficient, log_slope, perturbation_coeffs, thin_study, MollifiedFamily,
};

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn num<T>(r: twistband::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn untwisted_exactness() -> Outcome {
    let eps = 0.5;
    let mut worst: f64 = 0.0;
    for p in [0.0, 1.0, 2.0] {
        let fp = num(FiberProblem::new(eps, 0.0, p, DEFAULT_FIBER_NODES))?;
        let sol = num(solve_fiber(&fp, 4))?;
        for n in 1..=4 {
            // −ε⁻²∂_t² on (−1, 1): (nπ/2ε)² = (nπ)² at ε = 1/2.
            let exact = (n as f64 * PI).powi(2) + p * p;
            worst = worst.max((sol.values[n - 1] - exact).abs() / exact);
        }
    }
    check(worst <= 1e-5, format!("max relative error {worst:.2e}"))
}

fn threshold_window() -> Outcome {
    let mut pts = Vec::new();
    let mut k_max: f64 = 0.0;
    for eps in [0.2, 0.1, 0.05, 0.025] {
        let g = num(threshold(eps, 1.0))?;
        let excess = eps * eps * g.lambda1_0 - FRAC_PI_2 * FRAC_PI_2;
        if !(excess > 0.0) {
            return Err(format!("excess {excess:.3e} not positive at eps = {eps}"));
        }
        k_max = k_max.max(excess / (eps * eps));
        pts.push((eps.ln(), excess.ln()));
    }
    let slope = log_slope(&pts).unwrap_or(f64::NAN);
    check(
        (1.8..=2.2).contains(&slope),
        format!("positive, excess <= {k_max:.4} eps^2, fit exponent {slope:.4}"),
    )
}

fn threshold_is_band_bottom() -> Outcome {
    let eps = 0.1;
    for gamma in [0.5, 1.0, 2.0] {
        let grid = default_p_grid(eps, gamma);
        let t = num(band_table(eps, gamma, &grid, 1, DEFAULT_FIBER_NODES))?;
        if t.p[t.argmin_band1()] != 0.0 || !t.monotone_in_abs_p() {
            return Err(format!("band 1 not minimal/monotone at gamma = {gamma}"));
        }
    }
    let sd = num(StripDiscretization::with_defaults(eps, num(TwistProfile::constant(1.0, 2))?))?;
    let thr = num(threshold(eps, 1.0))?;
    let opts = StripSolveOptions { k: 2, grid_check: false, ..Default::default() };
    let res = num(solve_strip(&sd, StripForm::D, thr.lambda1_0, &opts))?;
    check(
        res.below_threshold.is_empty(),
        format!(
            "band 1 minimal at 0 and monotone for gamma in {{0.5, 1, 2}}; d-form lambda_1 - thr_disc = {:+.3e}",
            res.eigenvalues[0] - res.threshold_discrete
        ),
    )
}

fn triangle_instance() -> Outcome {
    let (eps, delta) = (0.05, 0.05);
    let profile = num(TwistProfile::from_beta(num(triangle_beta(1.0))?))?;
    let g = num(threshold(eps, 1.0))?;
    let tf = num(TrialFunction::psi_delta(delta, profile.clone(), g.clone()))?;
    let cert = num(evaluate_certificate(&tf, eps))?;
    let sd = num(StripDiscretization::with_defaults(eps, profile))?;
    if (sd.l - 40.0).abs() > 0.0 {
        return Err(format!("default half-length {} instead of 40", sd.l));
    }
    let opts = StripSolveOptions { k: 2, ..Default::default() };
    let res = num(solve_strip(&sd, StripForm::C, g.lambda1_0, &opts))?;
    let trial = num(assembled_normalized_gap(&tf, &sd))?;
    let ground = res.eigenvalues[0] - res.threshold_discrete;
    let detail = format!(
        "certificate {:+.6e}, {} below threshold (margin {:+.4e}), trial {:+.4e} >= ground {:+.4e}",
        cert.normalized_gap,
        res.below_threshold.len(),
        res.margins[0],
        trial,
        ground
    );
    check(
        cert.normalized_gap < 0.0 && !res.below_threshold.is_empty() && res.margins[0] > 0.0 && trial >= ground - 1e-8,
        detail,
    )
}

fn signed_instance() -> Outcome {
    let beta = num(signed_zero_mean_beta())?;
    let knots = beta.knots();
    let profile = num(TwistProfile::from_beta(beta))?;
    let mut integral = 0.0;
    for w in knots.windows(2) {
        let q = num(quad_interval(
            |s| profile.dnorm1(s).powi(2) - 1.0,
            w[0],
            w[1],
            QuadRule::GaussLegendre { order: 8, panels: 1 },
        ))?;
        integral += q.value;
    }
    let (eps, delta) = (0.02, 0.04);
    let g = num(threshold(eps, 1.0))?;
    let tf = num(TrialFunction::psi_delta_eta(delta, delta.sqrt(), profile, g))?;
    let cert = num(evaluate_certificate(&tf, eps))?;
    check(
        integral.abs() <= 1e-8 && cert.normalized_gap < 0.0,
        format!("integral {integral:+.2e}, certificate {:+.6e}", cert.normalized_gap),
    )
}

fn thin_limit() -> Outcome {
    let mf = num(MollifiedFamily::square_twist(0.25))?;
    let study = num(thin_study(&mf, &[0.1, 0.05, 0.025], 3, |_| None))?;
    let target = |j: usize| SQRT_2 * (2 * j - 1) as f64;
    let dev = study.upper_deviation(target);
    let mut ok = study.consistent();
    let mut parts = Vec::new();
    for j in 0..3 {
        let col: Vec<f64> = dev.iter().map(|r| r[j]).collect();
        let decreasing = col.windows(2).all(|w| w[1] <= w[0]);
        let rel = col[col.len() - 1] / target(j + 1);
        ok &= decreasing && rel <= 0.1;
        parts.push(format!("j={} rel dev {rel:.3}", j + 1));
    }
    check(ok, format!("consistent = {}, {}", study.consistent(), parts.join(", ")))
}

fn perturbation() -> Outcome {
    let d0 = num(delta_coefficient(0.0))?;
    let pc = num(perturbation_coeffs(&[0.1, 0.05, 0.025]))?;
    let slope = pc.fit_exponent.unwrap_or(f64::NAN);
    check(
        (d0 - 0.5).abs() <= 1e-10 && slope >= 1.8,
        format!("delta(0) - 0.5 = {:.1e}, C = {:.4}, fit exponent {slope:.3}", d0 - 0.5, pc.c_fit),
    )
}

fn counting() -> Outcome {
    let mf = num(MollifiedFamily::square_twist(0.25))?;
    let mut n = Vec::new();
    for eps in [0.1, 0.05, 0.025] {
        n.push(num(count_below_threshold(eps, &mf))?.n);
    }
    check(n[0] >= 1 && n[0] < n[1] && n[1] < n[2], format!("N = {n:?}"))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let opts = SparseEigOptions { tol: 1e-10, ..Default::default() };
    let mut worst: f64 = 0.0;
    let cases = 24;
    for _ in 0..cases {
        let n = rng.random_range(20..=200);
        let mut trip = Vec::new();
        let mut dense = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for d in 1..=4 {
                if i + d < n && rng.random::<f64>() < 0.6 {
                    let v: f64 = rng.random_range(-1.0..1.0);
                    trip.push((i, i + d, v));
                    dense[(i, i + d)] = v;
                    dense[(i + d, i)] = v;
                }
            }
        }
        for i in 0..n {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| dense[(i, j)].abs()).sum();
            let v = off + rng.random_range(0.1..2.0);
            trip.push((i, i, v));
            dense[(i, i)] = v;
        }
        let a = num(SparseSym::from_upper_triplets(n, &trip))?;
        let r = num(eig_sparse_lowest(&a, None, 4, &opts))?;
        let mut oracle = dense.symmetric_eigen().eigenvalues.as_slice().to_vec();
        oracle.sort_by(f64::total_cmp);
        for j in 0..4 {
            worst = worst.max((r.values[j] - oracle[j]).abs());
        }
    }
    let sys = num(TridiagSystem::new(vec![2.0, 2.0, 2.0], vec![-1.0, -1.0]))?;
    let tri = num(eig_tridiag(&sys, 3))?;
    let tri_err = tri
        .values
        .iter()
        .zip([2.0 - SQRT_2, 2.0, 2.0 + SQRT_2])
        .map(|(v, e)| (v - e).abs())
        .fold(0.0, f64::max);
    check(
        worst <= 1e-8 && tri_err <= 1e-12,
        format!("{cases} sparse instances max |err| {worst:.1e}, 3x3 tridiagonal {tri_err:.1e}"),
    )
}

fn geometry() -> Outcome {
    let circle = num(CurveSpec::constant(&[1.0]))?;
    let fp = num(integrate_frame(&circle, (0.0, 2.0 * PI), 1e-3))?;
    let end = &fp.samples[fp.samples.len() - 1].gamma;
    let gram = fp.gram_deviation();
    let closure = end[0].hypot(end[1]);

    let mut min_det = f64::INFINITY;
    let cases: [(&[f64], TwistProfile); 3] = [
        (&[0.0, 0.0], num(TwistProfile::constant(1.0, 2))?),
        (&[0.5, 0.3], num(TwistProfile::constant(2.0, 2))?),
        (&[1.0, 0.0], num(TwistProfile::from_beta(num(triangle_beta(1.0))?))?),
    ];
    for (k, twist) in cases {
        let curve = num(CurveSpec::constant(k))?;
        let range = (-PI, PI);
        let fp = num(integrate_frame(&curve, range, 1e-3))?;
        let grid = num(Lattice::uniform(range, 241, 9))?;
        let imm = num(immersion_sample(&fp, &twist, 0.2, &grid))?;
        min_det = min_det.min(imm.min_det_j());
    }
    check(
        gram <= 1e-8 && closure <= 1e-6 && min_det > 0.0,
        format!("Gram deviation {gram:.1e}, closure {closure:.1e}, min det J {min_det:.4}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 10] = [
        ("untwisted exactness", untwisted_exactness, Duration::from_secs(5)),
        ("threshold window", threshold_window, Duration::from_secs(30)),
        ("threshold is the band bottom", threshold_is_band_bottom, Duration::from_secs(120)),
        ("triangle slowdown instance", triangle_instance, Duration::from_secs(300)),
        ("signed slowdown instance", signed_instance, Duration::from_secs(120)),
        ("thin-limit convergence", thin_limit, Duration::from_secs(180)),
        ("perturbation coefficients", perturbation, Duration::from_secs(30)),
        ("eigenvalue counting", counting, Duration::from_secs(60)),
        ("oracle equivalence", oracle_equivalence, Duration::from_secs(60)),
        ("geometry invariants", geometry, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (i, (name, f, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed();
        let (pass, detail) = match outcome {
            Ok(d) if took <= *budget => (true, d),
            Ok(d) => (false, format!("{d}; over the {}s budget", budget.as_secs())),
            Err(d) => (false, d),
        };
        failed += usize::from(!pass);
        println!(
            "criterion {}: {} {name}: {detail} [{:.1}s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
