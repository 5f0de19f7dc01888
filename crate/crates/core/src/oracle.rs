//! Reference maximizer for very small systems, independent of the BFGS
//! code path. Used to cross-check [`crate::macroscopicity::maximize`].
//!
//! All sites but the last are scanned on a (θ, φ) grid. For fixed leading
//! directions the objective is bᵀQb + 2gᵀb + const in the last direction b,
//! whose constrained maximum solves b = (λI − Q)⁻¹g with λ > λ_max(Q) and
//! |b| = 1. The best grid point is then refined by projected gradient ascent.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use crate::error::{Error, Result};
use crate::spin::CorrelationMatrix;

/// Sites above this are rejected: the grid grows as (n_theta·n_phi)^(N−1).
pub const ORACLE_MAX_SITES: usize = 4;

fn block(c: &CorrelationMatrix<f64>, i: usize, j: usize) -> Matrix3<f64> {
    let m = c.matrix();
    Matrix3::from_fn(|a, b| m[(3 * i + a, 3 * j + b)])
}

fn value(c: &CorrelationMatrix<f64>, dirs: &[Vector3<f64>]) -> f64 {
    let flat: Vec<f64> = dirs.iter().flat_map(|d| d.iter().copied()).collect();
    c.quadratic_form(&flat)
}

/// Maximizer of bᵀQb + 2gᵀb over unit b.
struct LastSite {
    eig: SymmetricEigen<f64, nalgebra::U3>,
    top: f64,
}

impl LastSite {
    fn new(q: Matrix3<f64>) -> Self {
        let eig = SymmetricEigen::new(q);
        let top = eig.eigenvalues.max();
        Self { eig, top }
    }

    fn solve(&self, g: &Vector3<f64>) -> Vector3<f64> {
        let gp = self.eig.eigenvectors.transpose() * g;
        if gp.norm() < 1e-14 {
            return self.eig.eigenvectors.column(self.eig.eigenvalues.imax()).into();
        }
        // |b(λ)|² = Σ g'_k² / (λ − q_k)² decreases on (λ_max, ∞)
        let norm2 = |lam: f64| -> f64 {
            (0..3)
                .map(|k| gp[k] * gp[k] / ((lam - self.eig.eigenvalues[k]).powi(2)))
                .sum()
        };
        let (mut lo, mut hi) = (self.top, self.top + gp.norm());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if norm2(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let bp = Vector3::from_fn(|k, _| gp[k] / (hi - self.eig.eigenvalues[k]));
        (self.eig.eigenvectors * bp).normalize()
    }
}

fn polish(c: &CorrelationMatrix<f64>, mut dirs: Vec<Vector3<f64>>, iterations: usize) -> f64 {
    let n = dirs.len();
    let blocks: Vec<Vec<Matrix3<f64>>> = (0..n).map(|i| (0..n).map(|j| block(c, i, j)).collect()).collect();
    for _ in 0..iterations {
        for i in 0..n {
            let mut grad = Vector3::zeros();
            for j in 0..n {
                grad += blocks[i][j] * dirs[j];
            }
            dirs[i] = (dirs[i] + grad * 0.02).normalize();
        }
    }
    value(c, &dirs)
}

/// Grid-plus-polish estimate of max αᵀCα for N ≤ [`ORACLE_MAX_SITES`].
pub fn brute_force_maximum(c: &CorrelationMatrix<f64>, n_theta: usize, n_phi: usize) -> Result<f64> {
    let n = c.n_sites();
    if n == 0 || n > ORACLE_MAX_SITES {
        return Err(Error::Capacity {
            what: "oracle n_sites",
            value: n,
            limit: ORACLE_MAX_SITES,
        });
    }
    if n_theta == 0 || n_phi == 0 {
        return Err(Error::Validation("grid needs at least one point per angle".into()));
    }
    let pi = std::f64::consts::PI;
    let grid: Vec<Vector3<f64>> = (0..n_theta)
        .flat_map(|a| {
            let th = pi * (a as f64 + 0.5) / n_theta as f64;
            (0..n_phi).map(move |b| {
                let ph = 2.0 * pi * b as f64 / n_phi as f64;
                Vector3::new(th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos())
            })
        })
        .collect();
    let last = n - 1;
    let solver = LastSite::new(block(c, last, last));
    let cross: Vec<Matrix3<f64>> = (0..last).map(|i| block(c, last, i)).collect();

    let mut best = (f64::NEG_INFINITY, Vec::new());
    let mut idx = vec![0usize; last];
    loop {
        let mut dirs: Vec<Vector3<f64>> = idx.iter().map(|&k| grid[k]).collect();
        let g = dirs.iter().zip(&cross).fold(Vector3::zeros(), |acc, (d, m)| acc + m * d);
        dirs.push(solver.solve(&g));
        let v = value(c, &dirs);
        if v > best.0 {
            best = (v, dirs);
        }
        // odometer over the leading sites
        let mut k = 0;
        while k < last {
            idx[k] += 1;
            if idx[k] < grid.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == last {
            break;
        }
    }
    let (grid_best, dirs) = best;
    Ok(grid_best.max(polish(c, dirs, 20_000)))
}
