//! Conditions (I)-(IX) for the mollified square twist and for a constant
//! twist, which has no blow-up and fails (I).

use twistband::thin::{validate_family, MollifiedFamily};

fn main() -> twistband::Result<()> {
    let eps = [0.1, 0.05, 0.025];
    for mf in [MollifiedFamily::square_twist(0.25)?, MollifiedFamily::constant_rate(1.0, 0.25)?] {
        let r = validate_family(&mf, &eps, None)?;
        println!("{:?}, K = {}", mf.base, mf.k);
        for cond in ["I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX"] {
            println!("  {cond:>4}: {}", if r.passes(cond) { "pass" } else { "fail" });
        }
        println!("  smallest K on samples: {:.4}", r.k_required);
        for e in &r.per_eps {
            if let Some((n1, n2)) = e.nu {
                println!("  eps = {}: I_eps = ({n1:.6}, {n2:.6})", e.eps);
            }
        }
    }
    Ok(())
}
