//! Heat kernels on `[0, 1]` with Dirichlet boundary values.
//!
//! The lattice kernel is
//! `G^n(t, x, y) = sum_{j<n} exp(lambda_j^n t) phi_j^n(x) phi_j(k_n(y))`
//! with `phi_j(x) = sqrt(2) sin(j pi x)`, `phi_j^n` its piecewise-linear
//! interpolant on the lattice, and `k_n(y) = floor(n y) / n`. It is constant in
//! `y` on each cell `[k/n, (k+1)/n)`, so integrals against it in `y` reduce to
//! cell sums. The continuum kernel is the (truncated) eigenfunction series.

use std::f64::consts::{PI, SQRT_2};

use super::{field::lift_unchecked, GridSpec, SpectralBasis};
use crate::error::{Error, Result};

/// `phi_j(x) = sqrt(2) sin(j pi x)`.
#[inline]
pub fn phi(j: usize, x: f64) -> f64 {
    SQRT_2 * (j as f64 * PI * x).sin()
}

/// Piecewise-linear interpolant of `phi_j` on the lattice.
pub fn phi_lifted(grid: &GridSpec, j: usize, x: f64) -> Result<f64> {
    let values: Vec<f64> = grid.interior_nodes().map(|y| phi(j, y)).collect();
    lift_unchecked(&values, grid, x)
}

/// Series truncation policy for the continuum kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelTruncation {
    tolerance: f64,
}

impl Default for KernelTruncation {
    fn default() -> Self {
        Self { tolerance: 1e-10 }
    }
}

impl KernelTruncation {
    pub fn new(tolerance: f64) -> Result<Self> {
        if !(tolerance > 0.0 && tolerance < 1.0) {
            return Err(Error::config(format!("truncation tolerance must be in (0, 1), got {tolerance}")));
        }
        Ok(Self { tolerance })
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// `ceil(sqrt(ln(1/tol) / (pi^2 t))) + 5`.
    pub fn max_terms(&self, t: f64) -> usize {
        let k = ((1.0 / self.tolerance).ln() / (PI * PI * t)).sqrt().ceil();
        k as usize + 5
    }
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("kernel time must be > 0, got {t}")))
    }
}

fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::domain(format!("coordinate {x} outside [0, 1]")))
    }
}

/// Lattice heat kernel `G^n(t, x, y)`.
pub fn discrete_kernel(basis: &SpectralBasis, t: f64, x: f64, y: f64) -> Result<f64> {
    check_time(t)?;
    check_unit(x)?;
    let grid = basis.grid();
    let ky = super::grid_floor(y, grid)?;
    let lifted = lifted_modes(basis, x)?;
    Ok(lifted
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let j = i + 1;
            (basis.eigenvalue(j) * t).exp() * p * phi(j, ky)
        })
        .sum())
}

/// `phi_j^n(x)` for `j = 1..n-1`.
pub fn lifted_modes(basis: &SpectralBasis, x: f64) -> Result<Vec<f64>> {
    let grid = basis.grid();
    let (k, frac) = grid.locate(x)?;
    let n = grid.n();
    // phi_j(k/n) = sqrt(n) e_j(k) with e_j(0) = e_j(n) = 0.
    let scale = (n as f64).sqrt();
    let node = |e: &[f64], i: usize| if i == 0 || i >= n { 0.0 } else { e[i - 1] };
    Ok((1..n)
        .map(|j| {
            let e = basis.eigenvector(j);
            let a = node(e, k);
            let v = if frac == 0.0 { a } else { a + frac * (node(e, k + 1) - a) };
            scale * v
        })
        .collect())
}

/// Cell values `G^n(t, x, k/n)` for `k = 0..n-1`; the kernel equals the
/// `k`-th entry for every `y` in `[k/n, (k+1)/n)`.
pub fn discrete_kernel_cells(basis: &SpectralBasis, t: f64, x: f64) -> Result<Vec<f64>> {
    check_time(t)?;
    let lifted = lifted_modes(basis, x)?;
    Ok(cells_from_modes(basis, &lifted, t))
}

pub(crate) fn cells_from_modes(basis: &SpectralBasis, lifted: &[f64], t: f64) -> Vec<f64> {
    let n = basis.grid().n();
    let scale = (n as f64).sqrt();
    let mut cells = vec![0.0; n];
    for (i, p) in lifted.iter().enumerate() {
        let j = i + 1;
        let w = (basis.eigenvalue(j) * t).exp() * p * scale;
        let e = basis.eigenvector(j);
        for k in 1..n {
            cells[k] += w * e[k - 1];
        }
    }
    cells
}

/// Truncated continuum Dirichlet heat kernel `G(t, x, y)`.
pub fn continuum_kernel(t: f64, x: f64, y: f64, trunc: &KernelTruncation) -> Result<f64> {
    check_time(t)?;
    check_unit(x)?;
    check_unit(y)?;
    let terms = trunc.max_terms(t);
    Ok((1..=terms)
        .map(|k| {
            let kf = k as f64;
            (-kf * kf * PI * PI * t).exp() * phi(k, x) * phi(k, y)
        })
        .sum())
}

/// `int_a^b G(t, x, y) dy` from the term-wise antiderivative of the series.
pub fn continuum_cell_integral(t: f64, x: f64, a: f64, b: f64, trunc: &KernelTruncation) -> Result<f64> {
    check_time(t)?;
    check_unit(x)?;
    let terms = trunc.max_terms(t);
    Ok((1..=terms)
        .map(|k| {
            let kp = k as f64 * PI;
            let anti = SQRT_2 * ((kp * a).cos() - (kp * b).cos()) / kp;
            (-kp * kp * t).exp() * phi(k, x) * anti
        })
        .sum())
}

/// Composite midpoint rule on `[0, 1]` with `m` cells.
pub fn midpoint_unit<F: FnMut(f64) -> f64>(m: usize, mut f: F) -> f64 {
    let h = 1.0 / m as f64;
    (0..m).map(|i| f((i as f64 + 0.5) * h)).sum::<f64>() * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discrete_kernel_vanishes_at_boundary() {
        let b = SpectralBasis::new(GridSpec::new(8).unwrap());
        for y in [0.0, 0.3, 0.77, 1.0] {
            assert_eq!(discrete_kernel(&b, 0.01, 0.0, y).unwrap(), 0.0);
            assert!(discrete_kernel(&b, 0.01, 1.0, y).unwrap().abs() < 1e-12);
        }
        assert!(discrete_kernel(&b, 0.0, 0.3, 0.4).is_err());
        assert!(discrete_kernel(&b, -1.0, 0.3, 0.4).is_err());
    }

    #[test]
    fn cell_values_match_pointwise_kernel() {
        let b = SpectralBasis::new(GridSpec::new(6).unwrap());
        let cells = discrete_kernel_cells(&b, 0.02, 0.41).unwrap();
        for (k, c) in cells.iter().enumerate() {
            let y = (k as f64 + 0.3) / 6.0;
            let g = discrete_kernel(&b, 0.02, 0.41, y).unwrap();
            assert!((c - g).abs() < 1e-12);
        }
    }

    #[test]
    fn continuum_kernel_symmetry_and_boundary() {
        let tr = KernelTruncation::default();
        for &(x, y) in &[(0.1, 0.7), (0.5, 0.5), (0.33, 0.91)] {
            let a = continuum_kernel(0.05, x, y, &tr).unwrap();
            let b = continuum_kernel(0.05, y, x, &tr).unwrap();
            assert!((a - b).abs() < 1e-14);
        }
        assert!(continuum_kernel(0.05, 0.4, 0.0, &tr).unwrap().abs() < 1e-15);
        assert!(continuum_kernel(0.0, 0.4, 0.2, &tr).is_err());
    }

    #[test]
    fn truncation_is_within_tolerance_of_longer_series() {
        let tr = KernelTruncation::default();
        for t in [1e-3, 1e-2, 0.1, 1.0] {
            let terms = tr.max_terms(t);
            for &(x, y) in &[(0.2, 0.3), (0.5, 0.5), (0.9, 0.1)] {
                let short = continuum_kernel(t, x, y, &tr).unwrap();
                let long: f64 = (1..=4 * terms)
                    .map(|k| {
                        let kf = k as f64;
                        (-kf * kf * PI * PI * t).exp() * phi(k, x) * phi(k, y)
                    })
                    .sum();
                assert!((short - long).abs() < tr.tolerance(), "t={t}");
            }
        }
    }

    #[test]
    fn continuum_mass_below_one() {
        let tr = KernelTruncation::default();
        let mass = midpoint_unit(4000, |y| continuum_kernel(0.1, 0.5, y, &tr).unwrap());
        let exact = continuum_cell_integral(0.1, 0.5, 0.0, 1.0, &tr).unwrap();
        assert!(mass < 1.0 && mass > 0.0);
        assert!((mass - exact).abs() < 1e-6);
    }
}
