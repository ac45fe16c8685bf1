//! `ε² λ_{ε,1}(0) − (π/2)²` as `ε → 0`, with a log-log slope fit.

use std::f64::consts::FRAC_PI_2;

use twistband::fiber::threshold;
use twistband::thin::log_slope;

fn main() -> twistband::Result<()> {
    let gamma = 1.0;
    let mut pts = Vec::new();
    println!("{:>8} {:>20} {:>14}", "eps", "lambda_1(0)", "excess");
    for eps in [0.2, 0.1, 0.05, 0.025, 0.0125] {
        let g = threshold(eps, gamma)?;
        let excess = eps * eps * g.lambda1_0 - FRAC_PI_2 * FRAC_PI_2;
        println!("{eps:>8} {:>20.10} {excess:>14.6e}", g.lambda1_0);
        pts.push((f64::ln(eps), excess.ln()));
    }
    println!("fitted exponent: {:.4}", log_slope(&pts).unwrap_or(f64::NAN));
    Ok(())
}
