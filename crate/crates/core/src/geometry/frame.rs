use std::fmt;
use std::sync::Arc;

use crate::{Error, Result};

type Curvature = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Curvature functions `k₁, …, kₙ` of a curve in `ℝⁿ⁺¹` with respect to a
/// relatively parallel frame.
#[derive(Clone)]
pub struct CurveSpec {
    n: usize,
    curvatures: Vec<Curvature>,
    support: Option<(f64, f64)>,
}

impl fmt::Debug for CurveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CurveSpec")
            .field("n", &self.n)
            .field("support", &self.support)
            .finish_non_exhaustive()
    }
}

impl CurveSpec {
    pub fn new(curvatures: Vec<Curvature>, support: Option<(f64, f64)>) -> Result<Self> {
        if curvatures.is_empty() {
            return Err(Error::invalid("n", "need at least one normal direction"));
        }
        if let Some((a, b)) = support {
            if !(a < b) {
                return Err(Error::invalid("support", "must be a non-empty interval"));
            }
        }
        Ok(Self { n: curvatures.len(), curvatures, support })
    }

    /// `k ≡ 0`: a straight line in `ℝⁿ⁺¹`.
    pub fn straight(n: usize) -> Result<Self> {
        Self::new((0..n).map(|_| Arc::new(|_: f64| 0.0) as Curvature).collect(), None)
    }

    /// Constant curvatures.
    pub fn constant(k: &[f64]) -> Result<Self> {
        Self::new(k.iter().map(|&v| Arc::new(move |_: f64| v) as Curvature).collect(), None)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        self.support
    }

    /// `(k₁(s), …, kₙ(s))`, zero outside a declared support.
    pub fn curvatures(&self, s: f64) -> Vec<f64> {
        if let Some((a, b)) = self.support {
            if s < a || s > b {
                return vec![0.0; self.n];
            }
        }
        self.curvatures.iter().map(|k| k(s)).collect()
    }

    /// `k(s) = |(k₁, …, kₙ)(s)|`.
    pub fn curvature(&self, s: f64) -> f64 {
        self.curvatures(s).iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// The frame `(T, N₁, …, Nₙ)` and the curve point at one parameter value.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSample {
    pub gamma: Vec<f64>,
    pub tangent: Vec<f64>,
    pub normals: Vec<Vec<f64>>,
}

/// Frame transported along `s` by fixed-step RK4.
#[derive(Debug, Clone)]
pub struct FramePath {
    pub s: Vec<f64>,
    pub samples: Vec<FrameSample>,
    curve: CurveSpec,
}

impl FramePath {
    pub fn range(&self) -> (f64, f64) {
        (self.s[0], self.s[self.s.len() - 1])
    }

    /// Largest deviation of the frame Gram matrix from the identity.
    pub fn gram_deviation(&self) -> f64 {
        self.samples.iter().map(gram_deviation).fold(0.0, f64::max)
    }

    /// `max |Γ′| − 1` over the samples (`Γ′ = T`).
    pub fn arclength_deviation(&self) -> f64 {
        self.samples
            .iter()
            .map(|f| (f.tangent.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Frame at an arbitrary `s` in range, by one RK4 step from the sample
    /// to its left.
    pub fn at(&self, s: f64) -> Result<FrameSample> {
        let (a, b) = self.range();
        if !(s >= a && s <= b) {
            return Err(Error::invalid("lattice", format!("s = {s} outside frame range [{a}, {b}]")));
        }
        let i = self.s.partition_point(|&x| x <= s).saturating_sub(1);
        let i = i.min(self.s.len() - 1);
        let h = s - self.s[i];
        if h == 0.0 {
            return Ok(self.samples[i].clone());
        }
        let state = pack(&self.samples[i]);
        let next = rk4_step(&self.curve, self.s[i], h, &state);
        Ok(unpack(&next, self.curve.n))
    }
}

fn gram_deviation(f: &FrameSample) -> f64 {
    let mut vs: Vec<&Vec<f64>> = vec![&f.tangent];
    vs.extend(f.normals.iter());
    let mut dev: f64 = 0.0;
    for (i, v) in vs.iter().enumerate() {
        for (j, w) in vs.iter().enumerate() {
            let g: f64 = v.iter().zip(w.iter()).map(|(x, y)| x * y).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((g - target).abs());
        }
    }
    dev
}

fn pack(f: &FrameSample) -> Vec<f64> {
    let mut v = f.gamma.clone();
    v.extend_from_slice(&f.tangent);
    for nj in &f.normals {
        v.extend_from_slice(nj);
    }
    v
}

fn unpack(v: &[f64], n: usize) -> FrameSample {
    let d = n + 1;
    FrameSample {
        gamma: v[0..d].to_vec(),
        tangent: v[d..2 * d].to_vec(),
        normals: (0..n).map(|j| v[(2 + j) * d..(3 + j) * d].to_vec()).collect(),
    }
}

/// `Γ′ = T`, `T′ = Σ kⱼ Nⱼ`, `Nⱼ′ = −kⱼ T`.
fn rhs(curve: &CurveSpec, s: f64, y: &[f64]) -> Vec<f64> {
    let n = curve.n;
    let d = n + 1;
    let k = curve.curvatures(s);
    let mut out = vec![0.0; y.len()];
    out[0..d].copy_from_slice(&y[d..2 * d]);
    for j in 0..n {
        for c in 0..d {
            out[d + c] += k[j] * y[(2 + j) * d + c];
            out[(2 + j) * d + c] = -k[j] * y[d + c];
        }
    }
    out
}

fn rk4_step(curve: &CurveSpec, s: f64, h: f64, y: &[f64]) -> Vec<f64> {
    let add = |y: &[f64], k: &[f64], c: f64| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + c * b).collect() };
    let k1 = rhs(curve, s, y);
    let k2 = rhs(curve, s + 0.5 * h, &add(y, &k1, 0.5 * h));
    let k3 = rhs(curve, s + 0.5 * h, &add(y, &k2, 0.5 * h));
    let k4 = rhs(curve, s + h, &add(y, &k3, h));
    (0..y.len())
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Integrates the frame system over `s_range` with the standard basis as
/// initial frame and `Γ(s_range.0) = 0`. The step is shrunk so that an
/// integer number of steps lands on the right end. No re-orthonormalization.
pub fn integrate_frame(c: &CurveSpec, s_range: (f64, f64), step: f64) -> Result<FramePath> {
    let (a, b) = s_range;
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::invalid("step", format!("must be positive, got {step}")));
    }
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::invalid("s_range", "must be a finite non-empty interval"));
    }
    let steps = ((b - a) / step - 1e-9).ceil().max(1.0) as usize;
    let h = (b - a) / steps as f64;
    let n = c.n;
    let d = n + 1;
    let unit = |i: usize| {
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        v
    };
    let first = FrameSample { gamma: vec![0.0; d], tangent: unit(0), normals: (1..=n).map(unit).collect() };
    let mut s = Vec::with_capacity(steps + 1);
    let mut samples = Vec::with_capacity(steps + 1);
    let mut y = pack(&first);
    s.push(a);
    samples.push(first);
    for i in 0..steps {
        let si = a + i as f64 * h;
        for (sj, kj) in [si, si + 0.5 * h, si + h].iter().map(|x| (x, c.curvatures(*x))) {
            if kj.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { what: format!("curvature sample at s = {sj}") });
            }
        }
        y = rk4_step(c, si, h, &y);
        let s_next = if i + 1 == steps { b } else { a + (i + 1) as f64 * h };
        s.push(s_next);
        samples.push(unpack(&y, n));
    }
    Ok(FramePath { s, samples, curve: c.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn straight_line() {
        let fp = integrate_frame(&CurveSpec::straight(2).unwrap(), (0.0, 10.0), 0.5).unwrap();
        let end = fp.samples.last().unwrap();
        assert_eq!(end.tangent, vec![1.0, 0.0, 0.0]);
        assert!((end.gamma[0] - 10.0).abs() < 1e-13);
        assert_eq!(fp.gram_deviation(), 0.0);
    }

    #[test]
    fn unit_circle_closes() {
        let fp = integrate_frame(&CurveSpec::constant(&[1.0]).unwrap(), (0.0, 2.0 * PI), 0.01).unwrap();
        let g0 = &fp.samples[0].gamma;
        let g1 = &fp.samples.last().unwrap().gamma;
        let gap = ((g1[0] - g0[0]).powi(2) + (g1[1] - g0[1]).powi(2)).sqrt();
        assert!(gap < 1e-6, "gap {gap}");
        assert!(fp.gram_deviation() < 1e-8);
        assert!(fp.arclength_deviation() < 1e-8);
    }

    #[test]
    fn fourth_order_convergence() {
        let c = CurveSpec::new(
            vec![Arc::new(|s: f64| 1.0 + 0.5 * s.sin()), Arc::new(|s: f64| 0.3 * s.cos())],
            None,
        )
        .unwrap();
        let closure = |h: f64| {
            let fp = integrate_frame(&c, (0.0, 4.0), h).unwrap();
            (fp.gram_deviation(), fp.arclength_deviation())
        };
        let (g1, a1) = closure(0.4);
        let (g2, a2) = closure(0.2);
        assert!(g1 / g2 >= 8.0, "gram {g1} -> {g2}");
        assert!(a1 / a2 >= 8.0, "arclength {a1} -> {a2}");
    }

    #[test]
    fn interpolated_frame_matches_grid() {
        let c = CurveSpec::constant(&[1.0]).unwrap();
        let fine = integrate_frame(&c, (0.0, 3.0), 0.001).unwrap();
        let coarse = integrate_frame(&c, (0.0, 3.0), 0.01).unwrap();
        let f = coarse.at(1.2345).unwrap();
        let g = fine.at(1.2345).unwrap();
        for k in 0..2 {
            assert!((f.gamma[k] - g.gamma[k]).abs() < 1e-9);
        }
        assert!(coarse.at(3.5).is_err());
    }

    #[test]
    fn rejects_bad_step_and_non_finite_curvature() {
        let c = CurveSpec::straight(1).unwrap();
        assert!(integrate_frame(&c, (0.0, 1.0), 0.0).is_err());
        let bad = CurveSpec::new(vec![Arc::new(|s: f64| 1.0 / (s - 0.5))], None).unwrap();
        assert!(matches!(integrate_frame(&bad, (0.0, 1.0), 0.25), Err(Error::NonFinite { .. })));
    }
}
