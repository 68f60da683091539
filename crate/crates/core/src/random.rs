//! Reproducible random problem instances.
//!
//! Everything is drawn from a SplitMix64 stream seeded explicitly, so a
//! seed fully determines every matrix, vector and tangent produced here.

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::matrix::Matrix;
use crate::solver::qr::householder_q;

pub struct Sampler {
    rng: SplitMix64,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: SplitMix64::seed_from_u64(seed),
        }
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    pub fn index(&mut self, upper: usize) -> usize {
        self.rng.random_range(0..upper)
    }

    /// Entries uniform on `[-1, 1)`.
    pub fn vector(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.uniform(-1.0, 1.0)).collect()
    }

    /// Entries uniform on `[-1, 1)`.
    pub fn matrix(&mut self, rows: usize, cols: usize) -> Matrix {
        Matrix::from_fn(rows, cols, |_, _| self.uniform(-1.0, 1.0))
    }

    /// A random `n × n` orthogonal matrix.
    pub fn orthogonal(&mut self, n: usize) -> Matrix {
        let a = self.matrix(n, n);
        householder_q(&a)
    }

    /// `U diag(σ) Vᵀ` with the given singular values, which fixes both
    /// the rank and the conditioning. `sigma.len()` must not exceed
    /// `min(rows, cols)`.
    pub fn with_singular_values(&mut self, rows: usize, cols: usize, sigma: &[f64]) -> Matrix {
        assert!(sigma.len() <= rows.min(cols));
        let u = self.orthogonal(rows);
        let v = self.orthogonal(cols);
        Matrix::from_fn(rows, cols, |i, j| {
            sigma
                .iter()
                .enumerate()
                .map(|(k, s)| u[(i, k)] * s * v[(j, k)])
                .sum()
        })
    }

    /// Full-rank matrix with singular values in `[0.5, 2]`.
    pub fn well_conditioned(&mut self, rows: usize, cols: usize) -> Matrix {
        let sigma: Vec<f64> = (0..rows.min(cols)).map(|_| self.uniform(0.5, 2.0)).collect();
        self.with_singular_values(rows, cols, &sigma)
    }

    /// Matrix of exact rank `rank` with nonzero singular values in `[0.5, 2]`.
    pub fn fixed_rank(&mut self, rows: usize, cols: usize, rank: usize) -> Matrix {
        let sigma: Vec<f64> = (0..rank).map(|_| self.uniform(0.5, 2.0)).collect();
        self.with_singular_values(rows, cols, &sigma)
    }

    /// Symmetric positive definite with eigenvalues in `[0.5, 2]`.
    pub fn spd(&mut self, n: usize) -> Matrix {
        let q = self.orthogonal(n);
        let lambda: Vec<f64> = (0..n).map(|_| self.uniform(0.5, 2.0)).collect();
        Matrix::from_fn(n, n, |i, j| (0..n).map(|k| q[(i, k)] * lambda[k] * q[(j, k)]).sum())
    }

    /// Strictly diagonally dominant tridiagonal bands.
    pub fn dominant_bands(&mut self, n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let off = n.saturating_sub(1);
        let lower = self.vector(off);
        let upper = self.vector(off);
        let main = (0..n)
            .map(|_| {
                let sign = if self.uniform(0.0, 1.0) < 0.5 { -1.0 } else { 1.0 };
                sign * self.uniform(2.5, 4.0)
            })
            .collect();
        (lower, main, upper)
    }
}
