//! Thin-strip limit for the square twist `|Θ′| = 2|s|`, mollified at
//! `|s| = ε^{−a}`. Shifted eigenvalues approach the harmonic-oscillator
//! values `√2(2j − 1)` and the number below the threshold grows.
//!
//! Pass `--two-d` to add the two-dimensional solve to each bound check.

use twistband::fiber::threshold;
use twistband::strip::{default_ns, solve_strip, StripDiscretization, StripForm, StripSolveOptions, DEFAULT_NT};
use twistband::thin::{thin_study, MollifiedFamily};

fn main() -> twistband::Result<()> {
    let two_d = std::env::args().any(|a| a == "--two-d");
    let mf = MollifiedFamily::square_twist(0.25)?;
    let study = thin_study(&mf, &[0.1, 0.05, 0.025], 3, |eps| {
        two_d.then(|| {
            let l = (mf.corner(eps) + 14.0).ceil();
            let sd = StripDiscretization::new(eps, mf.member(eps)?, l, default_ns(l), DEFAULT_NT)?;
            let thr = threshold(eps, sd.gamma())?;
            solve_strip(&sd, StripForm::C, thr.lambda1_0, &StripSolveOptions { k: 3, ..Default::default() })
        })
    })?;
    println!("{:>6} {:>2} {:>12} {:>12} {:>12} {:>10}", "eps", "j", "effective", "M_eps", "2D - box", "target");
    for r in &study.reports {
        for row in &r.rows {
            let target = std::f64::consts::SQRT_2 * (2 * row.j - 1) as f64;
            let l2 = row.lambda_2d_minus_box.map_or("-".to_string(), |v| format!("{v:.8}"));
            println!(
                "{:>6} {:>2} {:>12.8} {:>12.8} {:>12} {:>10.6}",
                r.eps, row.j, row.lambda_eff, row.lambda_m, l2, target
            );
        }
    }
    for c in &study.counts {
        println!("N({}) = {}  (gap {:.6})", c.eps, c.n, c.gap);
    }
    println!("bounds consistent: {}", study.consistent());
    Ok(())
}
