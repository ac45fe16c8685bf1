use super::SparseSym;
use crate::{Error, Result};

/// Cholesky factor `L Lᵀ` of a symmetric banded matrix.
///
/// Row `i` stores `L[i][i-bw..=i]` contiguously, so the footprint is
/// `n · (bw + 1)` regardless of sparsity inside the band.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandedCholesky {
    /// Factor `A − shift · B` (or `A − shift · I` when `b` is `None`).
    pub fn factor_shifted(a: &SparseSym, b: Option<&SparseSym>, shift: f64) -> Result<Self> {
        let n = a.dim();
        let bw = a.bandwidth().max(b.map_or(0, |m| m.bandwidth()));
        let w = bw + 1;
        let mut l = vec![0.0; n * w];
        // Lower-band storage: element (i, j), j <= i, lives at i*w + (j + bw - i).
        for (r, c, v) in a.upper_entries() {
            l[c * w + (r + bw - c)] += v;
        }
        match b {
            Some(b) => {
                for (r, c, v) in b.upper_entries() {
                    l[c * w + (r + bw - c)] -= shift * v;
                }
            }
            None => {
                for i in 0..n {
                    l[i * w + bw] -= shift;
                }
            }
        }
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let k0 = j0.max(j.saturating_sub(bw));
                let mut s = l[i * w + (j + bw - i)];
                let ri = i * w + bw - i;
                let rj = j * w + bw - j;
                for k in k0..j {
                    s -= l[ri + k] * l[rj + k];
                }
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(Error::Breakdown {
                            detail: format!("non-positive pivot {s:e} at row {i} (shift {shift:e})"),
                        });
                    }
                    l[i * w + bw] = s.sqrt();
                } else {
                    l[i * w + (j + bw - i)] = s / l[j * w + bw];
                }
            }
        }
        Ok(Self { n, bw, l })
    }

    pub fn factor(a: &SparseSym) -> Result<Self> {
        Self::factor_shifted(a, None, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        for i in 0..n {
            let base = i * w + bw - i;
            let mut s = x[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.l[base + k] * x[k];
            }
            x[i] = s / self.l[i * w + bw];
        }
        for i in (0..n).rev() {
            let s = x[i] / self.l[i * w + bw];
            x[i] = s;
            for k in i.saturating_sub(bw)..i {
                x[k] -= self.l[i * w + bw - i + k] * s;
            }
        }
    }
}
