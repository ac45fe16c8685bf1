//! Shift-invert Lanczos on a 2D Dirichlet Laplacian against the exact
//! separable eigenvalues.

use std::f64::consts::PI;

use twistband::eigen::{eig_sparse_lowest, SparseEigOptions, SparseSym};

fn main() -> twistband::Result<()> {
    let n = 60;
    let h = 1.0 / (n + 1) as f64;
    let idx = |i: usize, j: usize| i * n + j;
    let mut trip = Vec::new();
    for i in 0..n {
        for j in 0..n {
            trip.push((idx(i, j), idx(i, j), 4.0 / (h * h)));
            if i + 1 < n {
                trip.push((idx(i, j), idx(i + 1, j), -1.0 / (h * h)));
            }
            if j + 1 < n {
                trip.push((idx(i, j), idx(i, j + 1), -1.0 / (h * h)));
            }
        }
    }
    let a = SparseSym::from_upper_triplets(n * n, &trip)?;
    let r = eig_sparse_lowest(&a, None, 5, &SparseEigOptions::default())?;
    let mu = |k: usize| 4.0 / (h * h) * (k as f64 * PI * h / 2.0).sin().powi(2);
    let mut exact: Vec<f64> = (1..=4).flat_map(|p| (1..=4).map(move |q| (p, q))).map(|(p, q)| mu(p) + mu(q)).collect();
    exact.sort_by(f64::total_cmp);
    for (j, v) in r.values.iter().enumerate() {
        println!("lambda_{} = {v:.10}  exact {:.10}  residual {:.1e}", j + 1, exact[j], r.residual_norms[j]);
    }
    Ok(())
}
