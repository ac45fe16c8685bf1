use std::io::Write;

use super::{metric_factor, FramePath, TwistProfile};
use crate::{Error, Result};

/// A tensor lattice of `(s, t)` values.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub s: Vec<f64>,
    pub t: Vec<f64>,
}

impl Lattice {
    /// `ns × nt` equispaced nodes on `[s_a, s_b] × [−1, 1]`.
    pub fn uniform(s_range: (f64, f64), ns: usize, nt: usize) -> Result<Self> {
        if ns < 2 || nt < 2 {
            return Err(Error::invalid("lattice", "need at least two nodes in each direction"));
        }
        let lin = |a: f64, b: f64, n: usize| -> Vec<f64> {
            (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
        };
        Ok(Self { s: lin(s_range.0, s_range.1, ns), t: lin(-1.0, 1.0, nt) })
    }
}

/// Sampled strip surface `L_ε(s, t) = Γ(s) + N_Θ(s) ε t`, stored row-major in
/// `(s, t)`.
#[derive(Debug, Clone)]
pub struct Immersion {
    pub eps: f64,
    pub lattice: Lattice,
    pub points: Vec<Vec<f64>>,
    /// `det J_ε = ε f_ε(s, t)` at each vertex.
    pub det_j: Vec<f64>,
}

impl Immersion {
    pub fn min_det_j(&self) -> f64 {
        self.det_j.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.lattice.t.len() + j
    }

    /// Quad mesh with `v x1 … x_{n+1}` vertex lines and 1-based `f i j k l` faces.
    pub fn write_mesh<W: Write>(&self, mut w: W) -> Result<()> {
        for p in &self.points {
            write!(w, "v")?;
            for x in p {
                write!(w, " {x:.16e}")?;
            }
            writeln!(w)?;
        }
        let (ns, nt) = (self.lattice.s.len(), self.lattice.t.len());
        for i in 0..ns - 1 {
            for j in 0..nt - 1 {
                writeln!(
                    w,
                    "f {} {} {} {}",
                    self.idx(i, j) + 1,
                    self.idx(i + 1, j) + 1,
                    self.idx(i + 1, j + 1) + 1,
                    self.idx(i, j + 1) + 1
                )?;
            }
        }
        Ok(())
    }

    /// CSV with header `s,t,x1,…,x{n+1},detJ`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let d = self.points.first().map_or(0, |p| p.len());
        let mut header = String::from("s,t");
        for k in 1..=d {
            header.push_str(&format!(",x{k}"));
        }
        header.push_str(",detJ");
        writeln!(w, "{header}")?;
        for (i, s) in self.lattice.s.iter().enumerate() {
            for (j, t) in self.lattice.t.iter().enumerate() {
                let id = self.idx(i, j);
                write!(w, "{s:.16e},{t:.16e}")?;
                for x in &self.points[id] {
                    write!(w, ",{x:.16e}")?;
                }
                writeln!(w, ",{:.16e}", self.det_j[id])?;
            }
        }
        Ok(())
    }
}

/// Samples the immersion on `grid`.
pub fn immersion_sample(fp: &FramePath, tp: &TwistProfile, eps: f64, grid: &Lattice) -> Result<Immersion> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::invalid("eps", "must be positive"));
    }
    let n = fp.samples[0].normals.len();
    if tp.dim() != n {
        return Err(Error::invalid(
            "profile",
            format!("twist dimension {} does not match curve normal count {n}", tp.dim()),
        ));
    }
    if grid.t.iter().any(|t| !(t.abs() <= 1.0)) {
        return Err(Error::invalid("lattice", "t values must lie in [-1, 1]"));
    }
    let mut points = Vec::with_capacity(grid.s.len() * grid.t.len());
    let mut det_j = Vec::with_capacity(points.capacity());
    for &s in &grid.s {
        let fr = fp.at(s)?;
        let theta = tp.theta(s);
        let d = fr.gamma.len();
        let mut n_theta = vec![0.0; d];
        for (th, nj) in theta.iter().zip(&fr.normals) {
            for c in 0..d {
                n_theta[c] += th * nj[c];
            }
        }
        for &t in &grid.t {
            points.push((0..d).map(|c| fr.gamma[c] + n_theta[c] * eps * t).collect());
            det_j.push(eps * metric_factor(tp, eps, s, t));
        }
    }
    Ok(Immersion { eps, lattice: grid.clone(), points, det_j })
}
