//! `Σ(ε) = (π/2)² + δ(ε) ε + O(ε²)` for the weighted transverse problem.

use twistband::thin::{delta_coefficient, perturbation_coeffs};

fn main() -> twistband::Result<()> {
    println!("delta(0) = {:.15}", delta_coefficient(0.0)?);
    let pc = perturbation_coeffs(&[0.2, 0.1, 0.05, 0.025])?;
    println!("{:>6} {:>18} {:>14} {:>14}", "eps", "Sigma", "delta", "residual");
    for i in 0..pc.eps_list.len() {
        println!(
            "{:>6} {:>18.12} {:>14.10} {:>14.6e}",
            pc.eps_list[i], pc.sigma[i], pc.delta[i], pc.residual[i]
        );
    }
    println!("|residual| <= {:.4} eps^2, fitted exponent {:.3}", pc.c_fit, pc.fit_exponent.unwrap_or(f64::NAN));
    Ok(())
}
