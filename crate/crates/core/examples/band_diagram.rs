//! Band functions of the transverse operators `D_ε(p)` and the essential
//! threshold. Writes `band_diagram.dat` for plotting.
//!
//!     cargo run --release --example band_diagram -- 0.1 1.0

use std::fs::File;

use twistband::fiber::{band_table, default_p_grid, threshold, DEFAULT_FIBER_NODES};

fn main() -> twistband::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let eps = args.first().copied().unwrap_or(0.1);
    let gamma = args.get(1).copied().unwrap_or(1.0);

    let ground = threshold(eps, gamma)?;
    println!("eps = {eps}, gamma = {gamma}");
    println!("lambda_1(0) = {:.10} (+- {:.1e})", ground.lambda1_0, ground.error_estimate);
    println!("eps^2 lambda_1(0) - (pi/2)^2 = {:.6e}", ground.scaled_excess());

    let grid = default_p_grid(eps, gamma);
    let table = band_table(eps, gamma, &grid, 4, DEFAULT_FIBER_NODES)?;
    println!("band 1 minimal at p = {}", table.p[table.argmin_band1()]);
    println!("band 1 nondecreasing in |p|: {}", table.monotone_in_abs_p());
    println!("evenness defect: {:.1e}", table.evenness_defect());
    table.write_dat(File::create("band_diagram.dat")?)?;
    println!("wrote band_diagram.dat");
    Ok(())
}
