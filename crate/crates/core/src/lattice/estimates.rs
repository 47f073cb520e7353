//! Quadrature estimates of kernel energies.
//!
//! Space integrals are evaluated cell by cell: the lattice kernel is constant
//! in `y` on each cell and the sampled sines are orthonormal in the cell inner
//! product, so `int_0^1 G^n(a, x, y) G^n(b, x', y) dy` is a finite mode sum.
//! The continuum kernel enters through its term-wise cell integrals. Time
//! integrals use graded Gauss-Legendre panels.

use std::f64::consts::{PI, SQRT_2};

use serde::Serialize;

use super::kernel::{lifted_modes, phi, KernelTruncation};
use super::SpectralBasis;
use crate::error::{Error, Result};
use crate::quadrature::graded_from_zero;

/// Upper end of the time integral in [`kernel_gap_energy`]; every mode has
/// decayed below `exp(-60)` by then.
const GAP_HORIZON: f64 = 4.0;
/// Below `t = GAP_HEAD^2` the integrand is replaced by its small-time form.
const GAP_HEAD: f64 = 1e-4;

/// `int_0^inf int_0^1 |G(t, x, y) - G^n(t, x, y)|^2 dy dt`.
///
/// `x` should be an interior point away from the boundary by much more than
/// `GAP_HEAD`; the small-time head uses `|G(t, x, .)|^2 ~ (8 pi t)^{-1/2}`.
pub fn kernel_gap_energy(basis: &SpectralBasis, x: f64, trunc: &KernelTruncation) -> Result<f64> {
    let gap = KernelGap::new(basis, x)?;
    let tail = graded_between(GAP_HEAD, GAP_HORIZON.sqrt(), |s| {
        2.0 * s * gap.space_energy(s * s, trunc)
    });
    let tau = GAP_HEAD * GAP_HEAD;
    let (_, cross, lattice) = gap.parts(tau, trunc);
    let head = 2.0 * tau.sqrt() / (8.0 * PI).sqrt() + tau * (lattice - 2.0 * cross);
    Ok(head + tail)
}

fn graded_between<F: FnMut(f64) -> f64>(lo: f64, hi: f64, mut f: F) -> f64 {
    let mut total = 0.0;
    let mut b = hi;
    while b > lo {
        let a = (0.5 * b).max(lo);
        total += crate::quadrature::panel(a, b, &mut f);
        b = a;
    }
    total
}

/// Precomputed pieces of `|G(t, x, .) - G^n(t, x, .)|^2`.
struct KernelGap<'a> {
    basis: &'a SpectralBasis,
    x: f64,
    lifted: Vec<f64>,
    /// `aliased[r][j-1] = k * int_0^1 phi_k(y) phi_j(k_n(y)) dy` for `k = r mod 2n`.
    aliased: Vec<Vec<f64>>,
}

impl<'a> KernelGap<'a> {
    fn new(basis: &'a SpectralBasis, x: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::domain(format!("coordinate {x} outside [0, 1]")));
        }
        let n = basis.grid().n();
        let lifted = lifted_modes(basis, x)?;
        let period = 2 * n;
        let aliased = (0..period)
            .map(|r| {
                let cosines: Vec<f64> =
                    (0..=n).map(|m| (r as f64 * PI * m as f64 / n as f64).cos()).collect();
                (1..n)
                    .map(|j| {
                        (0..n)
                            .map(|m| {
                                phi(j, m as f64 / n as f64) * SQRT_2 * (cosines[m] - cosines[m + 1])
                                    / PI
                            })
                            .sum()
                    })
                    .collect()
            })
            .collect();
        Ok(Self { basis, x, lifted, aliased })
    }

    /// `(|G|^2, <G, G^n>, |G^n|^2)` in `L^2(dy)` at time `t`.
    fn parts(&self, t: f64, trunc: &KernelTruncation) -> (f64, f64, f64) {
        let basis = self.basis;
        let n = basis.grid().n();
        let weights: Vec<f64> = self
            .lifted
            .iter()
            .enumerate()
            .map(|(i, p)| (basis.eigenvalue(i + 1) * t).exp() * p)
            .collect();
        let lattice: f64 = weights.iter().map(|w| w * w).sum();
        let folded: Vec<f64> = self
            .aliased
            .iter()
            .map(|row| row.iter().zip(&weights).map(|(d, w)| d * w).sum())
            .collect();

        let terms = trunc.max_terms(t);
        let mut continuum = 0.0;
        let mut cross = 0.0;
        for k in 1..=terms {
            let kf = k as f64;
            let decay = (-kf * kf * PI * PI * t).exp();
            let p = phi(k, self.x);
            continuum += decay * decay * p * p;
            cross += decay * p * folded[k % (2 * n)] / kf;
        }
        (continuum, cross, lattice)
    }

    fn space_energy(&self, t: f64, trunc: &KernelTruncation) -> f64 {
        let (c, x, l) = self.parts(t, trunc);
        (c - 2.0 * x + l).max(0.0)
    }
}

/// `sum_j c_j int_0^len exp(2 lambda_j u) du` by graded quadrature.
fn mode_energy(basis: &SpectralBasis, weights: &[f64], len: f64) -> f64 {
    if len <= 0.0 {
        return 0.0;
    }
    let fastest = basis.eigenvalues().iter().fold(0.0_f64, |m, l| m.max(-l));
    graded_from_zero(len, 0.05 / fastest, |u| {
        weights
            .iter()
            .zip(basis.eigenvalues())
            .map(|(c, l)| c * (2.0 * l * u).exp())
            .sum()
    })
}

fn check_times(s: f64, t: f64) -> Result<()> {
    if 0.0 <= s && s <= t {
        Ok(())
    } else {
        Err(Error::domain(format!("need 0 <= s <= t, got s={s}, t={t}")))
    }
}

/// `int_0^s int_0^1 |G^n(t-r, x, y) - G^n(s-r, x, y)|^2 dy dr`.
pub fn time_shift_energy(basis: &SpectralBasis, x: f64, s: f64, t: f64) -> Result<f64> {
    check_times(s, t)?;
    let lifted = lifted_modes(basis, x)?;
    let weights: Vec<f64> = lifted
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let d = (basis.eigenvalue(i + 1) * (t - s)).exp() - 1.0;
            p * p * d * d
        })
        .collect();
    Ok(mode_energy(basis, &weights, s))
}

/// `int_s^t int_0^1 |G^n(t-r, x, y)|^2 dy dr`.
pub fn recent_energy(basis: &SpectralBasis, x: f64, s: f64, t: f64) -> Result<f64> {
    check_times(s, t)?;
    let weights: Vec<f64> = lifted_modes(basis, x)?.iter().map(|p| p * p).collect();
    Ok(mode_energy(basis, &weights, t - s))
}

/// `int_0^t int_0^1 |G^n(t-r, x, z) - G^n(t-r, y, z)|^2 dz dr`.
pub fn space_shift_energy(basis: &SpectralBasis, x: f64, y: f64, t: f64) -> Result<f64> {
    check_times(0.0, t)?;
    let a = lifted_modes(basis, x)?;
    let b = lifted_modes(basis, y)?;
    let weights: Vec<f64> = a.iter().zip(&b).map(|(p, q)| (p - q) * (p - q)).collect();
    Ok(mode_energy(basis, &weights, t))
}

/// Largest observed ratios of the three kernel energies to their envelopes
/// `sqrt(t - s)`, `sqrt(t - s)` and `|x - y|` over a fixed probe set.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnvelopeConstants {
    pub n: usize,
    pub time_shift: f64,
    pub recent: f64,
    pub space_shift: f64,
}

/// Fits the envelope constants at the given positions over `t <= horizon`.
pub fn envelope_constants(basis: &SpectralBasis, xs: &[f64], horizon: f64) -> Result<EnvelopeConstants> {
    let mut out = EnvelopeConstants {
        n: basis.grid().n(),
        time_shift: 0.0,
        recent: 0.0,
        space_shift: 0.0,
    };
    let ends: Vec<f64> = (1..=5).map(|i| horizon * i as f64 / 5.0).collect();
    let gaps = [1e-4, 1e-3, 1e-2, 0.05, 0.1];
    let shifts = [1e-3, 1e-2, 0.05, 0.1, 0.2];
    for &x in xs {
        for &t in &ends {
            for &h in gaps.iter().filter(|&&h| h <= t) {
                let s = t - h;
                out.time_shift = out.time_shift.max(time_shift_energy(basis, x, s, t)? / h.sqrt());
                out.recent = out.recent.max(recent_energy(basis, x, s, t)? / h.sqrt());
            }
            for &d in &shifts {
                let y = (x + d).min(1.0);
                out.space_shift = out.space_shift.max(space_shift_energy(basis, x, y, t)? / (y - x));
            }
        }
    }
    Ok(out)
}
