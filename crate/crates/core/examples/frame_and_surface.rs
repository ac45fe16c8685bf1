//! Relatively parallel frame along a circle, then the twisted strip around it
//! exported as a quad mesh (`strip.mesh`) and a point cloud (`strip.csv`).

use std::f64::consts::PI;
use std::fs::File;

use twistband::geometry::{immersion_sample, integrate_frame, CurveSpec, Lattice, TwistProfile};

fn main() -> twistband::Result<()> {
    let circle = CurveSpec::constant(&[1.0])?;
    let fp = integrate_frame(&circle, (0.0, 2.0 * PI), 1e-3)?;
    let end = &fp.samples[fp.samples.len() - 1].gamma;
    println!("circle: Gram deviation {:.2e}, closure gap {:.2e}", fp.gram_deviation(), end[0].hypot(end[1]));

    // k = (1, 0) in R^3: a planar circle with a normal plane to twist in.
    let curve = CurveSpec::constant(&[1.0, 0.0])?;
    let fp = integrate_frame(&curve, (0.0, 2.0 * PI), 1e-3)?;
    let twist = TwistProfile::constant(2.0, 2)?;
    let grid = Lattice::uniform((0.0, 2.0 * PI), 241, 9)?;
    let imm = immersion_sample(&fp, &twist, 0.2, &grid)?;
    println!("strip: {} vertices, min det J = {:.4}", imm.points.len(), imm.min_det_j());
    imm.write_mesh(File::create("strip.mesh")?)?;
    imm.write_csv(File::create("strip.csv")?)?;
    println!("wrote strip.mesh, strip.csv");
    Ok(())
}
