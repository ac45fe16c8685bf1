//! Rayleigh-gap certificates for the two slowdown mechanisms: a triangle
//! `β ≥ 0` with `ψ_δ`, and a sign-changing `β` with `∫(|Θ′|² − γ²) = 0`,
//! where `ψ_{δ,η}` with `η = √δ` is needed.

use twistband::certificates::{evaluate_certificate, limit_prediction, TrialFunction};
use twistband::fiber::threshold;
use twistband::geometry::{signed_zero_mean_beta, triangle_beta, TwistProfile};

fn main() -> twistband::Result<()> {
    let tri = TwistProfile::from_beta(triangle_beta(1.0)?)?;
    let eps = 0.05;
    let g = threshold(eps, 1.0)?;
    println!("triangle slowdown, eps = {eps}");
    for delta in [0.2, 0.1, 0.05] {
        let tf = TrialFunction::psi_delta(delta, tri.clone(), g.clone())?;
        let c = evaluate_certificate(&tf, eps)?;
        let lim = limit_prediction(&tf);
        println!(
            "  delta = {delta:<5} normalized gap {:+.6e}  (limit {:+.6e}, quad err {:.1e})",
            c.normalized_gap, lim.normalized, c.quad_error
        );
    }

    let signed = signed_zero_mean_beta()?;
    println!("\nsigned slowdown, integral of |Theta'|^2 - gamma^2 = {:.2e}", signed.rate_defect_integral());
    let prof = TwistProfile::from_beta(signed)?;
    let eps = 0.02;
    let g = threshold(eps, 1.0)?;
    for delta in [0.16, 0.08, 0.04] {
        let tf = TrialFunction::psi_delta_eta(delta, delta.sqrt(), prof.clone(), g.clone())?;
        let c = evaluate_certificate(&tf, eps)?;
        println!("  delta = {delta:<5} eta = {:.3}  normalized gap {:+.6e}", c.eta, c.normalized_gap);
    }
    Ok(())
}
