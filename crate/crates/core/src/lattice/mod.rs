//! Lattice discretization of the Dirichlet Laplacian on `[0, 1]`.
//!
//! A lattice of resolution `n` has interior nodes `k/n`, `k = 1..n-1`. The
//! operator `n^2 A^n` is the standard three-point second difference with
//! zero boundary values. Its eigenvectors are sampled sines, so the semigroup
//! `exp(n^2 A^n t)` is applied through the sine basis rather than a generic
//! matrix exponential.

mod field;
pub mod estimates;
pub mod kernel;

pub use field::{lift, PiecewiseLinearField, SampledPath};
pub use kernel::{continuum_kernel, discrete_kernel, KernelTruncation};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Lattice resolution `n` with interior nodes `k/n`, `k = 1..n-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    n: usize,
}

impl GridSpec {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::config(format!("lattice resolution must be >= 2, got {n}")));
        }
        Ok(Self { n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn interior_count(&self) -> usize {
        self.n - 1
    }

    #[inline]
    pub fn mesh(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Coordinate of node `k` (`0..=n`, boundary nodes included).
    #[inline]
    pub fn node(&self, k: usize) -> f64 {
        k as f64 / self.n as f64
    }

    /// Interior node coordinates `1/n, ..., (n-1)/n`.
    pub fn interior_nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (1..self.n).map(|k| self.node(k))
    }

    /// Position of `x` on the lattice: the cell index `k = floor(n x)` and the
    /// fractional offset `n x - k`. Values of `n x` within rounding of an integer
    /// snap to it, so `x = k/n` always lands exactly on node `k`.
    pub(crate) fn locate(&self, x: f64) -> Result<(usize, f64)> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::domain(format!("coordinate {x} outside [0, 1]")));
        }
        let s = x * self.n as f64;
        let r = s.round();
        if (s - r).abs() <= 4.0 * f64::EPSILON * s.max(1.0) {
            return Ok((r as usize, 0.0));
        }
        let k = s.floor();
        Ok((k as usize, s - k))
    }
}

/// Returns `floor(n y) / n`; `y = 1` maps to `1`.
pub fn grid_floor(y: f64, grid: &GridSpec) -> Result<f64> {
    let (k, _) = grid.locate(y)?;
    Ok(grid.node(k))
}

/// The scaled second-difference operator `n^2 A^n` on interior nodes.
#[derive(Debug, Clone, Copy)]
pub struct DiscreteLaplacian {
    grid: GridSpec,
}

impl DiscreteLaplacian {
    pub fn new(grid: GridSpec) -> Self {
        Self { grid }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn scale(&self) -> f64 {
        let n = self.grid.n as f64;
        n * n
    }

    /// `A^n v` without the `n^2` factor.
    pub fn apply_unscaled(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.grid.interior_count(), v.len())?;
        let m = v.len();
        let mut out = vec![0.0; m];
        for k in 0..m {
            let left = if k > 0 { v[k - 1] } else { 0.0 };
            let right = if k + 1 < m { v[k + 1] } else { 0.0 };
            out[k] = left - 2.0 * v[k] + right;
        }
        Ok(out)
    }

    /// `n^2 A^n v` by the tridiagonal stencil.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let scale = self.scale();
        let mut out = self.apply_unscaled(v)?;
        out.iter_mut().for_each(|x| *x *= scale);
        Ok(out)
    }
}

/// Convenience wrapper for [`DiscreteLaplacian::apply`].
pub fn apply_operator(lap: &DiscreteLaplacian, v: &[f64]) -> Result<Vec<f64>> {
    lap.apply(v)
}

/// `c_j^n = sin^2(j pi / 2n) / (j pi / 2n)^2`.
pub fn shape_factor(n: usize, j: usize) -> f64 {
    let a = j as f64 * PI / (2.0 * n as f64);
    let s = a.sin();
    s * s / (a * a)
}

/// Closed-form eigenpair `(lambda_j^n, e_j)` of `n^2 A^n`.
pub fn eigenpair(grid: &GridSpec, j: usize) -> Result<(f64, Vec<f64>)> {
    let n = grid.n;
    if j == 0 || j >= n {
        return Err(Error::Index { index: j, max: n - 1 });
    }
    Ok((eigenvalue(n, j), eigenvector(n, j)))
}

fn eigenvalue(n: usize, j: usize) -> f64 {
    let s = (j as f64 * PI / (2.0 * n as f64)).sin();
    -4.0 * (n * n) as f64 * s * s
}

fn eigenvector(n: usize, j: usize) -> Vec<f64> {
    let norm = (2.0 / n as f64).sqrt();
    (1..n)
        .map(|k| norm * ((j * k) as f64 * PI / n as f64).sin())
        .collect()
}

/// Eigenvalues and orthonormal eigenvectors of `n^2 A^n`.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    grid: GridSpec,
    eigenvalues: Vec<f64>,
    /// Row `j-1` holds `e_j`.
    vectors: Vec<f64>,
}

impl SpectralBasis {
    pub fn new(grid: GridSpec) -> Self {
        let n = grid.n;
        let m = n - 1;
        let eigenvalues = (1..n).map(|j| eigenvalue(n, j)).collect();
        let mut vectors = Vec::with_capacity(m * m);
        for j in 1..n {
            vectors.extend(eigenvector(n, j));
        }
        Self { grid, eigenvalues, vectors }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.interior_count()
    }

    /// `lambda_j^n` for `j = 1..n-1`.
    pub fn eigenvalue(&self, j: usize) -> f64 {
        self.eigenvalues[j - 1]
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `e_j` for `j = 1..n-1`.
    pub fn eigenvector(&self, j: usize) -> &[f64] {
        let m = self.dim();
        &self.vectors[(j - 1) * m..j * m]
    }

    pub fn shape_factor(&self, j: usize) -> f64 {
        shape_factor(self.grid.n, j)
    }

    /// Coefficients `<v, e_j>`, `j = 1..n-1`.
    pub fn analyze(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), v.len())?;
        let m = self.dim();
        Ok(self
            .vectors
            .chunks_exact(m)
            .map(|e| e.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `sum_j c_j e_j`.
    pub fn synthesize(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), coeffs.len())?;
        let m = self.dim();
        let mut out = vec![0.0; m];
        for (c, e) in coeffs.iter().zip(self.vectors.chunks_exact(m)) {
            for (o, ek) in out.iter_mut().zip(e) {
                *o += c * ek;
            }
        }
        Ok(out)
    }

    /// `exp(n^2 A^n t) v = sum_j exp(lambda_j t) <v, e_j> e_j`.
    pub fn semigroup_apply(&self, t: f64, v: &[f64]) -> Result<Vec<f64>> {
        if !(t >= 0.0) {
            return Err(Error::domain(format!("semigroup time must be >= 0, got {t}")));
        }
        if t == 0.0 {
            check_len(self.dim(), v.len())?;
            return Ok(v.to_vec());
        }
        let mut coeffs = self.analyze(v)?;
        for (c, lambda) in coeffs.iter_mut().zip(&self.eigenvalues) {
            *c *= (lambda * t).exp();
        }
        self.synthesize(&coeffs)
    }

    /// Dense propagator `exp(n^2 A^n dt)` assembled from the eigenbasis, for
    /// repeated stepping at a fixed `dt`.
    pub fn propagator(&self, dt: f64) -> Result<Propagator> {
        if !(dt > 0.0) {
            return Err(Error::config(format!("time step must be > 0, got {dt}")));
        }
        let m = self.dim();
        let decay: Vec<f64> = self.eigenvalues.iter().map(|l| (l * dt).exp()).collect();
        let mut matrix = vec![0.0; m * m];
        for (j, e) in self.vectors.chunks_exact(m).enumerate() {
            let d = decay[j];
            for r in 0..m {
                let w = d * e[r];
                let row = &mut matrix[r * m..(r + 1) * m];
                for (x, ec) in row.iter_mut().zip(e) {
                    *x += w * ec;
                }
            }
        }
        Ok(Propagator { dim: m, dt, matrix })
    }
}

/// Free function form of [`SpectralBasis::semigroup_apply`].
pub fn semigroup_apply(basis: &SpectralBasis, t: f64, v: &[f64]) -> Result<Vec<f64>> {
    basis.semigroup_apply(t, v)
}

/// `exp(n^2 A^n dt)` as a dense row-major matrix.
#[derive(Debug, Clone)]
pub struct Propagator {
    dim: usize,
    dt: f64,
    matrix: Vec<f64>,
}

impl Propagator {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.matrix[row * self.dim + col]
    }

    /// `out = P v`. Lengths are the caller's responsibility.
    #[inline]
    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        for (o, row) in out.iter_mut().zip(self.matrix.chunks_exact(self.dim)) {
            *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim, v.len())?;
        let mut out = vec![0.0; self.dim];
        self.apply_into(v, &mut out);
        Ok(out)
    }
}
