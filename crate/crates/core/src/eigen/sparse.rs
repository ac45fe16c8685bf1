use std::collections::BTreeMap;

use crate::{Error, Result};

/// Symmetric sparse matrix stored as its upper triangle in compressed rows.
///
/// Entries are supplied as `(row, col, value)` with `row <= col`; the lower
/// triangle is the implied symmetric completion. Duplicate coordinates are
/// summed.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSym {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSym {
    pub fn from_upper_triplets(dim: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut map: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(r, c, v) in triplets {
            if r > c {
                return Err(Error::invalid(
                    "triplets",
                    format!("entry ({r}, {c}) is below the diagonal"),
                ));
            }
            if c >= dim {
                return Err(Error::invalid(
                    "triplets",
                    format!("index {c} out of range for dimension {dim}"),
                ));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    what: format!("sparse entry ({r}, {c})"),
                });
            }
            *map.entry((r, c)).or_insert(0.0) += v;
        }
        Ok(Self::from_sorted(dim, map))
    }

    /// Build from a full (both triangles) triplet list, requiring exact
    /// symmetry of the summed entries.
    pub fn from_full_triplets(dim: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut full: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(r, c, v) in triplets {
            if r >= dim || c >= dim {
                return Err(Error::invalid(
                    "triplets",
                    format!("index ({r}, {c}) out of range for dimension {dim}"),
                ));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    what: format!("sparse entry ({r}, {c})"),
                });
            }
            *full.entry((r, c)).or_insert(0.0) += v;
        }
        let asym = max_asymmetry(&full);
        if asym != 0.0 {
            return Err(Error::invalid(
                "triplets",
                format!("matrix is not symmetric (max |A - Aᵀ| = {asym:e})"),
            ));
        }
        let upper = full.into_iter().filter(|((r, c), _)| r <= c).collect();
        Ok(Self::from_sorted(dim, upper))
    }

    fn from_sorted(dim: usize, map: BTreeMap<(usize, usize), f64>) -> Self {
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(map.len());
        let mut vals = Vec::with_capacity(map.len());
        for ((r, c), v) in map {
            row_ptr[r + 1] += 1;
            cols.push(c);
            vals.push(v);
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        Self {
            dim: d.len(),
            row_ptr: (0..=d.len()).collect(),
            cols: (0..d.len()).collect(),
            vals: d.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz_upper(&self) -> usize {
        self.vals.len()
    }

    /// Upper-triangle entries in row-major order.
    pub fn upper_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (r, c) = if r <= c { (r, c) } else { (c, r) };
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[range.clone()].binary_search(&c) {
            Ok(k) => self.vals[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for r in 0..self.dim {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.cols[k];
                let v = self.vals[k];
                acc += v * x[c];
                if c != r {
                    y[c] += v * x[r];
                }
            }
            y[r] += acc;
        }
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        super::dot(x, &self.mul_vec(x))
    }

    /// Largest `|row - col|` among stored entries.
    pub fn bandwidth(&self) -> usize {
        self.upper_entries().map(|(r, c, _)| c - r).max().unwrap_or(0)
    }

    pub fn inf_norm(&self) -> f64 {
        let mut rows = vec![0.0; self.dim];
        for (r, c, v) in self.upper_entries() {
            rows[r] += v.abs();
            if r != c {
                rows[c] += v.abs();
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    /// Dense copy, row-major. Intended for small matrices.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.dim]; self.dim];
        for (r, c, v) in self.upper_entries() {
            a[r][c] = v;
            a[c][r] = v;
        }
        a
    }
}

/// `max |A − Aᵀ|` over a full coordinate map.
pub(crate) fn max_asymmetry(full: &BTreeMap<(usize, usize), f64>) -> f64 {
    full.iter()
        .map(|(&(r, c), &v)| (v - full.get(&(c, r)).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}
