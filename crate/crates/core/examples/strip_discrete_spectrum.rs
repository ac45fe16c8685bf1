//! Discrete spectrum of the truncated strip: the triangle slowdown pushes an
//! eigenvalue below the threshold, the untwisted-reference form does not.

use twistband::fiber::threshold;
use twistband::geometry::{triangle_beta, TwistProfile};
use twistband::strip::{solve_strip, StripDiscretization, StripForm, StripSolveOptions};

fn main() -> twistband::Result<()> {
    let eps = 0.05;
    let profile = TwistProfile::from_beta(triangle_beta(1.0)?)?;
    let sd = StripDiscretization::with_defaults(eps, profile)?;
    let thr = threshold(eps, sd.gamma())?;
    let opts = StripSolveOptions::default();
    println!("grid {:?}", sd.meta());

    for form in [StripForm::C, StripForm::D] {
        let res = solve_strip(&sd, form, thr.lambda1_0, &opts)?;
        println!("\nform {form:?}: threshold on grid {:.8}", res.threshold_discrete);
        for (j, v) in res.eigenvalues.iter().enumerate() {
            println!("  lambda_{} = {v:.8}  margin {:+.3e}", j + 1, res.margins[j]);
        }
        println!(
            "  below threshold: {:?} (truncation margin {:.2e})",
            res.below_threshold, res.truncation_margin
        );
    }
    Ok(())
}
