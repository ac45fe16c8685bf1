use std::f64::consts::PI;
use std::io::Write;

use super::config::Params;
use super::manifest::{Outputs, RunManifest};
use super::{BandsArgs, CertifyArgs, Command, FamilyArgs, FrameArgs, Spectrum2dArgs, SurfaceArgs, ThinArgs};
use crate::certificates::{certificate_sweep, EtaRule, TrialKind};
use crate::fiber::{band_table, default_p_grid, symmetric_grid, threshold, threshold_with, ThresholdSummary, DEFAULT_FIBER_NODES};
use crate::geometry::{
    immersion_sample, integrate_frame, signed_zero_mean_beta, triangle_beta, BetaShape, CurveSpec, Lattice,
    SlowdownBeta, TwistProfile,
};
use crate::strip::{default_ns, solve_strip, StripDiscretization, StripForm, StripSolveOptions, DEFAULT_NT};
use crate::thin::{
    perturbation_coeffs, thin_study, validate_family, FamilyBase, FamilyReport, MollifiedFamily, ThinStudy,
};
use crate::{Error, Result};

pub(super) fn dispatch(cmd: &Command, p: &mut Params, seed: u64) -> Result<(RunManifest, Outputs)> {
    let mut m = RunManifest::new(cmd.name());
    let mut o = Outputs::default();
    match cmd {
        Command::Bands(a) => bands(a, p, &mut m, &mut o)?,
        Command::Spectrum2d(a) => spectrum2d(a, p, seed, &mut m, &mut o)?,
        Command::Certify(a) => certify(a, p, seed, &mut m, &mut o)?,
        Command::Thin(a) => thin(a, p, seed, &mut m, &mut o)?,
        Command::Frame(a) => frame(a, p, &mut m, &mut o)?,
        Command::ExportSurface(a) => export_surface(a, p, &mut m, &mut o)?,
        Command::ValidateFamily(a) => family(a, p, &mut m, &mut o)?,
    }
    Ok((m, o))
}

fn csv(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

pub(super) fn beta_profile(name: &str, gamma: f64) -> Result<TwistProfile> {
    let b = match name {
        "triangle" => triangle_beta(gamma)?,
        "signed" => signed_zero_mean_beta()?,
        "zero" => SlowdownBeta::new(gamma, BetaShape::Zero { s0: 1.0 })?,
        "plateau" => SlowdownBeta::new(gamma, BetaShape::Plateau { height: 0.5 * gamma, plateau: 1.0, ramp: 1.0 })?,
        other => {
            return Err(Error::invalid("profile", format!("unknown slowdown profile '{other}'")));
        }
    };
    TwistProfile::from_beta(b)
}

fn bands(a: &BandsArgs, p: &mut Params, m: &mut RunManifest, o: &mut Outputs) -> Result<()> {
    let eps: f64 = p.require("eps", a.eps)?;
    let gamma: f64 = p.or("gamma", a.gamma, 1.0)?;
    let n_bands: usize = p.or("n-bands", a.n_bands, 4)?;
    let nodes: usize = p.or("nodes", a.nodes, DEFAULT_FIBER_NODES)?;
    let half: usize = p.or("p-half", a.p_half, 64)?;
    let grid = match p.get("p-max", a.p_max)? {
        Some(pmax) => {
            if !(pmax > 0.0) {
                return Err(Error::invalid("p-max", "must be positive"));
            }
            symmetric_grid(pmax, half)
        }
        None => {
            let g = default_p_grid(eps, gamma);
            if half == 64 { g } else { symmetric_grid(g[g.len() - 1], half) }
        }
    };
    let ground = m.time("threshold", || threshold_with(eps, gamma, nodes))?;
    let table = m.time("band_table", || band_table(eps, gamma, &grid, n_bands, nodes))?;
    if !table.monotone_in_abs_p() {
        m.warnings.push("band 1 is not monotone in |p| on this grid".into());
    }
    m.fitted.insert("lambda1_0".into(), ground.lambda1_0);
    m.fitted.insert("lambda1_0_error".into(), ground.error_estimate);
    m.fitted.insert("evenness_defect".into(), table.evenness_defect());
    o.add("bands.csv", csv(|w| table.write_csv(w))?);
    o.add("bands.dat", csv(|w| table.write_dat(w))?);
    o.add_json("threshold.json", &ThresholdSummary::from(&ground))?;
    println!("lambda_1(0) = {:.12} +- {:.2e}", ground.lambda1_0, ground.error_estimate);
    Ok(())
}

fn spectrum2d(a: &Spectrum2dArgs, p: &mut Params, seed: u64, m: &mut RunManifest, o: &mut Outputs) -> Result<()> {
    let name: String = p.or("profile", a.profile.clone(), "triangle".into())?;
    let gamma: f64 = p.or("gamma", a.gamma, 1.0)?;
    let eps: f64 = p.or("eps", a.eps, 0.05)?;
    let form = match p.or("form", a.form.clone(), "c".to_string())?.as_str() {
        "c" => StripForm::C,
        "d" => StripForm::D,
        other => return Err(Error::invalid("form", format!("expected c or d, got '{other}'"))),
    };
    let profile = beta_profile(&name, gamma)?;
    let defaults = StripDiscretization::with_defaults(eps, profile.clone())?;
    let l: f64 = p.or("half-length", a.half_length, defaults.l)?;
    let ns: usize = p.or("ns", a.ns, default_ns(l))?;
    let nt: usize = p.or("nt", a.nt, DEFAULT_NT)?;
    let k: usize = p.or("k", a.k, 4)?;
    let tol: f64 = p.or("tol", a.tol, crate::eigen::SPARSE_TOL)?;
    let sd = StripDiscretization::new(eps, profile, l, ns, nt)?;
    let opts = StripSolveOptions { k, tol, seed, ..Default::default() };
    let gamma = sd.gamma();
    let thr = m.time("threshold", || threshold(eps, gamma))?;
    let res = m.time("solve_strip", || solve_strip(&sd, form, thr.lambda1_0, &opts))?;
    m.fitted.insert("truncation_margin".into(), res.truncation_margin);
    m.fitted.insert("gap_grid_error".into(), res.gap_grid_error);
    o.add("spectrum.csv", csv(|w| res.write_csv(w))?);
    o.add_json("spectrum.json", &res)?;
    for (j, v) in res.eigenvalues.iter().enumerate() {
        println!("lambda_{} = {v:.10} (margin {:+.3e})", j + 1, res.margins[j]);
    }
    println!("threshold (grid) = {:.10}, below: {:?}", res.threshold_discrete, res.below_threshold);
    Ok(())
}

fn certify(a: &CertifyArgs, p: &mut Params, seed: u64, m: &mut RunManifest, o: &mut Outputs) -> Result<()> {
    let preset: String = p.or("preset", a.preset.clone(), "triangle".into())?;
    let gamma: f64 = p.or("gamma", a.gamma, 1.0)?;
    let profile = beta_profile(&preset, gamma)?;
    let signed = preset == "signed";
    let deltas = p.list("deltas", a.deltas.clone(), &[0.2, 0.1, 0.05, 0.04, 0.02])?;
    let eps = p.list("eps", a.eps.clone(), &[0.1, 0.05, 0.02])?;
    let eta_default = if signed { "sqrt-delta" } else { "zero" };
    let eta_raw: String = p.or("eta", a.eta.clone(), eta_default.into())?;
    let eta = match eta_raw.as_str() {
        "zero" => EtaRule::Zero,
        "sqrt-delta" => EtaRule::SqrtDelta,
        v => EtaRule::Fixed(v.parse().map_err(|_| Error::Config(format!("parameter `eta`: cannot parse '{v}'")))?),
    };
    let kind = if eta == EtaRule::Zero { TrialKind::PsiDelta } else { TrialKind::PsiDeltaEta };
    let cross = p.switch("cross-check", a.cross_check)?;
    let table = m.time("certificate_sweep", || certificate_sweep(&profile, &deltas, &eps, kind, eta))?;
    for c in table.cells.iter().filter(|c| c.error.is_some()) {
        m.warnings.push(format!("delta = {}, eps = {}: {}", c.delta, c.eps, c.error.as_deref().unwrap_or("")));
    }
    if table.certificates().next().is_none() {
        return Err(Error::NonConvergence { detail: "no certificate could be evaluated".into() });
    }
    m.fitted.insert("negative_rows".into(), table.negative_rows() as f64);
    o.add("certificates.csv", csv(|w| table.write_csv(w))?);
    o.add_json("trend.json", &table.trend())?;
    println!("{} of {} certificates negative", table.negative_rows(), table.certificates().count());
    if cross {
        let e = eps.iter().copied().fold(f64::INFINITY, f64::min);
        let sd = StripDiscretization::with_defaults(e, profile.clone())?;
        let thr = threshold(e, sd.gamma())?;
        let opts = StripSolveOptions { seed, ..Default::default() };
        let res = m.time("cross_check", || solve_strip(&sd, StripForm::C, thr.lambda1_0, &opts))?;
        let best = table
            .certificates()
            .filter(|c| c.eps == e)
            .map(|c| c.normalized_gap)
            .fold(f64::INFINITY, f64::min);
        let two_d_gap = res.eigenvalues[0] - res.threshold_discrete;
        if best.is_finite() && two_d_gap > best + res.gap_grid_error {
            m.warnings.push(format!(
                "2D gap {two_d_gap:.6e} above the best Rayleigh gap {best:.6e} at eps = {e}"
            ));
        }
        m.fitted.insert("cross_check_two_d_gap".into(), two_d_gap);
        o.add("cross_check.csv", csv(|w| res.write_csv(w))?);
        o.add_json("cross_check.json", &res)?;
        println!("2D at eps = {e}: below threshold {:?}", res.below_threshold);
    }
    Ok(())
}

fn parse_family(name: &str, a: f64, gamma: f64, k: Option<f64>) -> Result<MollifiedFamily> {
    let mf = match name {
        "square-twist" => MollifiedFamily::square_twist(a)?,
        "constant" => MollifiedFamily::constant_rate(gamma, a)?,
        other => return Err(Error::invalid("family", format!("unknown family '{other}'"))),
    };
    match k {
        Some(k) => MollifiedFamily::new(mf.base, mf.a, mf.b, mf.c, k),
        None => Ok(mf),
    }
}

fn thin(a: &ThinArgs, p: &mut Params, seed: u64, m: &mut RunManifest, o: &mut Outputs) -> Result<()> {
    let name: String = p.or("family", a.family.clone(), "square-twist".into())?;
    let exp_a: f64 = p.or("a", a.a, 0.25)?;
    let gamma: f64 = p.or("gamma", a.gamma, 1.0)?;
    let eps = p.list("eps", a.eps.clone(), &[0.1, 0.05, 0.025])?;
    let k: usize = p.or("k", a.k, 3)?;
    let two_d = p.switch("two-d", a.two_d)?;
    let conditions = p.switch("check-conditions", a.check_conditions)?;
    let mf = parse_family(&name, exp_a, gamma, None)?;
    for &e in &eps {
        if !(e > 0.0 && e < 1.0) {
            return Err(Error::invalid("eps", format!("need 0 < eps < 1, got {e}")));
        }
    }
    let solve_2d = |e: f64| -> Option<Result<crate::strip::SpectrumResult>> {
        two_d.then(|| {
            let member = mf.member(e)?;
            let l = (mf.corner(e) + 14.0).ceil();
            let sd = StripDiscretization::new(e, member, l, default_ns(l), DEFAULT_NT)?;
            let thr = threshold(e, sd.gamma())?;
            let opts = StripSolveOptions { k, seed, ..Default::default() };
            solve_strip(&sd, StripForm::C, thr.lambda1_0, &opts)
        })
    };
    let study = m.time("thin_study", || thin_study(&mf, &eps, k, solve_2d))?;
    let coeffs = m.time("perturbation_coeffs", || perturbation_coeffs(&eps))?;
    record_study(&study, m);
    m.fitted.insert("perturbation_c".into(), coeffs.c_fit);
    if let Some(x) = coeffs.fit_exponent {
        m.fitted.insert("perturbation_exponent".into(), x);
    }
    o.add("thin.csv", csv(|w| study.write_csv(w))?);
    o.add("counts.csv", csv(|w| study.write_counts_csv(w))?);
    o.add(
        "effective.csv",
        csv(|w| {
            writeln!(w, "eps,j,lambda_eff,capped_eff,lambda_M,capped_M")?;
            for r in &study.reports {
                for j in 0..k {
                    writeln!(
                        w,
                        "{:.16e},{},{:.16e},{},{:.16e},{}",
                        r.eps,
                        j + 1,
                        r.effective.values[j],
                        r.effective.capped[j],
                        r.upper.values[j],
                        r.upper.capped[j]
                    )?;
                }
            }
            Ok(())
        })?,
    );
    o.add(
        "coefficients.csv",
        csv(|w| {
            writeln!(w, "eps,sigma,delta,residual")?;
            for i in 0..coeffs.eps_list.len() {
                writeln!(
                    w,
                    "{:.16e},{:.16e},{:.16e},{:.16e}",
                    coeffs.eps_list[i], coeffs.sigma[i], coeffs.delta[i], coeffs.residual[i]
                )?;
            }
            Ok(())
        })?,
    );
    o.add_json("sandwich.json", &study)?;
    if conditions {
        let report = m.time("validate_family", || validate_family(&mf, &eps, None))?;
        o.add("conditions.csv", conditions_csv(&report)?);
        print_conditions(&report);
    }
    for c in &study.counts {
        println!("N({}) = {}", c.eps, c.n);
    }
    Ok(())
}

fn record_study(study: &ThinStudy, m: &mut RunManifest) {
    let f = &study.family;
    m.fitted.insert("a".into(), f.a);
    m.fitted.insert("b".into(), f.b);
    m.fitted.insert("c".into(), f.c);
    m.fitted.insert("K".into(), f.k);
    for (j, fit) in study.k_upper.iter().enumerate() {
        m.fitted.insert(format!("k_upper_j{}", j + 1), fit.max);
    }
    for (j, fit) in study.k_lower.iter().enumerate() {
        m.fitted.insert(format!("k_lower_j{}", j + 1), fit.max);
    }
    m.fitted.insert("delta_k".into(), study.delta_k.max);
    m.fitted.insert("w_k".into(), study.w_k.max);
    m.warnings.extend(study.caveats.iter().cloned());
    if !study.consistent() {
        m.warnings.push("required sandwich constants grow by more than 2x as eps decreases".into());
    }
}

fn conditions_csv(r: &FamilyReport) -> Result<Vec<u8>> {
    csv(|w| {
        writeln!(w, "eps,condition,pass,first_violation")?;
        for (eps, cond, pass, first) in r.rows() {
            let e = eps.map_or_else(String::new, |e| format!("{e:.16e}"));
            let fv = first.map_or_else(String::new, |s| format!("{s:.16e}"));
            writeln!(w, "{e},{cond},{pass},{fv}")?;
        }
        Ok(())
    })
}

fn print_conditions(r: &FamilyReport) {
    for cond in ["I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX"] {
        println!("{cond:>5}  {}", if r.passes(cond) { "pass" } else { "FAIL" });
    }
    println!("smallest admissible K: {:.6}", r.k_required);
}

fn family(a: &FamilyArgs, p: &mut Params, m: &mut RunManifest, o: &mut Outputs) -> Result<()> {
    let name: String = p.or("family", a.family.clone(), "square-twist".into())?;
    let exp_a: f64 = p.or("a", a.a, 0.25)?;
    let gamma: f64 = p.or("gamma", a.gamma, 1.0)?;
    let k: Option<f64> = p.get("K", a.k)?;
    let eps = p.list("eps", a.eps.clone(), &[0.1, 0.05, 0.025])?;
    let mf = parse_family(&name, exp_a, gamma, k)?;
    let report = m.time("validate_family", || validate_family(&mf, &eps, None))?;
    m.fitted.insert("k_required".into(), report.k_required);
    if let FamilyBase::ConstantRate { .. } = mf.base {
        m.warnings.push("constant base: |Theta'| is bounded".into());
    }
    m.warnings.extend(report.notes.iter().cloned());
    o.add("conditions.csv", conditions_csv(&report)?);
    o.add_json("family.json", &report)?;
    print_conditions(&report);
    Ok(())
}

fn curve(p: &mut Params, flag: Option<Vec<f64>>, default: &[f64]) -> Result<CurveSpec> {
    let k = p.list("curvatures", flag, default)?;
    CurveSpec::constant(&k)
}

fn frame(a: &FrameArgs, p: &mut Params, m: &mut RunManifest, o: &mut Outputs) -> Result<()> {
    let c = curve(p, a.curvatures.clone(), &[1.0])?;
    let s0: f64 = p.or("s-start", a.s_start, 0.0)?;
    let s1: f64 = p.or("s-end", a.s_end, 2.0 * PI)?;
    let step: f64 = p.or("step", a.step, 1e-3)?;
    let stride: usize = p.or("stride", a.stride, 10)?;
    if stride == 0 {
        return Err(Error::invalid("stride", "must be positive"));
    }
    let fp = m.time("integrate_frame", || integrate_frame(&c, (s0, s1), step))?;
    let first = &fp.samples[0].gamma;
    let last = &fp.samples[fp.samples.len() - 1].gamma;
    let gap = first.iter().zip(last).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    m.fitted.insert("gram_deviation".into(), fp.gram_deviation());
    m.fitted.insert("arclength_deviation".into(), fp.arclength_deviation());
    m.fitted.insert("endpoint_gap".into(), gap);
    let dim = c.n() + 1;
    o.add(
        "frame.csv",
        csv(|w| {
            let mut header = vec!["s".to_string()];
            header.extend((1..=dim).map(|i| format!("x{i}")));
            header.extend((1..=dim).map(|i| format!("T{i}")));
            for j in 1..=c.n() {
                header.extend((1..=dim).map(|i| format!("N{j}_{i}")));
            }
            writeln!(w, "{}", header.join(","))?;
            let last = fp.s.len() - 1;
            for (i, (s, f)) in fp.s.iter().zip(&fp.samples).enumerate() {
                if i % stride != 0 && i != last {
                    continue;
                }
                let mut row = vec![format!("{s:.16e}")];
                row.extend(f.gamma.iter().chain(&f.tangent).map(|x| format!("{x:.16e}")));
                for n in &f.normals {
                    row.extend(n.iter().map(|x| format!("{x:.16e}")));
                }
                writeln!(w, "{}", row.join(","))?;
            }
            Ok(())
        })?,
    );
    println!(
        "gram deviation {:.3e}, endpoint gap {gap:.3e}",
        fp.gram_deviation()
    );
    Ok(())
}

fn export_surface(a: &SurfaceArgs, p: &mut Params, m: &mut RunManifest, o: &mut Outputs) -> Result<()> {
    let name: String = p.or("profile", a.profile.clone(), "constant".into())?;
    let gamma: f64 = p.or("gamma", a.gamma, 1.0)?;
    let tp = match name.as_str() {
        "constant" => TwistProfile::constant(gamma, 2)?,
        "untwisted" => TwistProfile::untwisted(2)?,
        "square" => TwistProfile::square(),
        "mollified" => TwistProfile::mollified_square(p.or("corner", a.corner, 2.0)?)?,
        other => beta_profile(other, gamma)?,
    };
    let eps: f64 = p.or("eps", a.eps, 0.1)?;
    let c = curve(p, a.curvatures.clone(), &vec![0.0; tp.dim()])?;
    if c.n() != tp.dim() {
        return Err(Error::invalid(
            "curvatures",
            format!("profile has {} components, curve has {} normals", tp.dim(), c.n()),
        ));
    }
    let s0: f64 = p.or("s-start", a.s_start, -5.0)?;
    let s1: f64 = p.or("s-end", a.s_end, 5.0)?;
    let ns: usize = p.or("ns", a.ns, 201)?;
    let nt: usize = p.or("nt", a.nt, 11)?;
    let step: f64 = p.or("step", a.step, 1e-3)?;
    let lattice = Lattice::uniform((s0, s1), ns, nt)?;
    let fp = m.time("integrate_frame", || integrate_frame(&c, (s0, s1), step))?;
    let imm = m.time("immersion_sample", || immersion_sample(&fp, &tp, eps, &lattice))?;
    let min_det = imm.min_det_j();
    if !(min_det > 0.0) {
        return Err(Error::Positivity { detail: format!("det J reaches {min_det:.3e}") });
    }
    m.fitted.insert("min_det_j".into(), min_det);
    m.fitted.insert("gram_deviation".into(), fp.gram_deviation());
    m.warnings.push("global injectivity of the immersion is not checked".into());
    o.add("surface.mesh", csv(|w| imm.write_mesh(w))?);
    o.add("surface.csv", csv(|w| imm.write_csv(w))?);
    println!("{} vertices, min det J = {min_det:.6e}", imm.points.len());
    Ok(())
}
