//! Reflection of the lattice heat flow at a moving lower barrier.
//!
//! Given a continuous path `V` in `R^{n-1}`, find `(Z, eta)` with
//!
//! ```text
//! dZ = n^2 A^n Z dt + d eta,   Z >= -V,   sum_k int (Z_k + V_k) d eta_k = 0,
//! ```
//!
//! `Z(0) = 0` and every `eta_k` nondecreasing from zero. The admissible set is a
//! translate of the positive orthant, so the Euclidean projection onto it is
//! componentwise clipping.
//!
//! Two time-stepping backends share the exact linear flow
//! `Z* = exp(n^2 A^n dt) Z(t_i)`:
//!
//! - projected: `Z(t_{i+1}) = max(Z*, -V(t_{i+1}))`;
//! - penalized: the penalty force `(2/eps) (Z + V)^-` is integrated
//!   implicitly over the step, which has the closed form
//!   `U = U* / (1 + 2 dt / eps)` for a violated coordinate `U* = Z* + V < 0`.
//!
//! In both cases `eta` accumulates the correction `Z(t_{i+1}) - Z*`.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::lattice::{DiscreteLaplacian, GridSpec, Propagator, SampledPath, SpectralBasis};

/// Barrier path `V`, sampled on a uniform time grid; linear between samples.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPath {
    grid: GridSpec,
    samples: SampledPath,
}

impl BoundaryPath {
    pub fn new(grid: GridSpec, samples: SampledPath) -> Result<Self> {
        check_len(grid.interior_count(), samples.dim())?;
        if samples.len() < 2 {
            return Err(Error::config("boundary path needs at least two samples"));
        }
        Ok(Self { grid, samples })
    }

    /// Samples `v(t, k)` (node index `k = 1..n-1`) at `t_i = i dt`, `i = 0..=steps`.
    pub fn from_fn<F: FnMut(f64, usize) -> f64>(grid: GridSpec, dt: f64, steps: usize, mut v: F) -> Result<Self> {
        if !(dt > 0.0) || steps == 0 {
            return Err(Error::config("boundary path needs dt > 0 and at least one step"));
        }
        let mut samples = SampledPath::with_capacity(grid.interior_count(), dt, steps + 1);
        let mut row = vec![0.0; grid.interior_count()];
        for i in 0..=steps {
            let t = i as f64 * dt;
            for (k, r) in row.iter_mut().enumerate() {
                *r = v(t, k + 1);
            }
            samples.push(&row);
        }
        Self::new(grid, samples)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn samples(&self) -> &SampledPath {
        &self.samples
    }

    pub fn dt(&self) -> f64 {
        self.samples.dt()
    }

    pub fn steps(&self) -> usize {
        self.samples.steps()
    }

    pub fn horizon(&self) -> f64 {
        self.samples.horizon()
    }

    pub fn sup_abs(&self) -> f64 {
        self.samples.sup_abs()
    }

    /// `Z(0) = 0` is admissible iff `V(0) >= 0`.
    pub fn is_feasible_at_start(&self) -> bool {
        self.samples.at(0).iter().all(|&v| v >= 0.0)
    }

    /// `V` at step `i` of a grid refined by `ratio`, written into `out`.
    fn refined_into(&self, ratio: usize, i: usize, out: &mut [f64]) {
        let coarse = i / ratio;
        let rem = i % ratio;
        let a = self.samples.at(coarse);
        if rem == 0 {
            out.copy_from_slice(a);
            return;
        }
        let b = self.samples.at(coarse + 1);
        let w = rem as f64 / ratio as f64;
        for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
            *o = x + w * (y - x);
        }
    }

    /// The path resampled on a grid `ratio` times finer.
    pub fn refine(&self, ratio: usize) -> Result<BoundaryPath> {
        if ratio == 0 {
            return Err(Error::config("refinement ratio must be >= 1"));
        }
        if ratio == 1 {
            return Ok(self.clone());
        }
        let dim = self.grid.interior_count();
        let steps = self.steps() * ratio;
        let mut samples = SampledPath::with_capacity(dim, self.dt() / ratio as f64, steps + 1);
        let mut row = vec![0.0; dim];
        for i in 0..=steps {
            self.refined_into(ratio, i, &mut row);
            samples.push(&row);
        }
        BoundaryPath::new(self.grid, samples)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    ProjectedExponential,
    Penalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub backend: Backend,
    /// Penalization strength, used by [`Backend::Penalized`] only.
    pub epsilon: Option<f64>,
    /// Defaults to `10 dt (1 + sup |V|)`.
    pub complementarity_tol: Option<f64>,
}

impl SolverConfig {
    pub fn projected(dt: f64) -> Self {
        Self { dt, backend: Backend::ProjectedExponential, epsilon: None, complementarity_tol: None }
    }

    pub fn penalized(dt: f64, epsilon: f64) -> Self {
        Self { dt, backend: Backend::Penalized, epsilon: Some(epsilon), complementarity_tol: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config(format!("dt must be > 0, got {}", self.dt)));
        }
        if self.backend == Backend::Penalized {
            match self.epsilon {
                Some(e) if e > 0.0 => {}
                other => return Err(Error::config(format!("penalized backend needs epsilon > 0, got {other:?}"))),
            }
        }
        Ok(())
    }

    pub fn tolerance_for(&self, v: &BoundaryPath) -> f64 {
        self.complementarity_tol
            .unwrap_or(10.0 * self.dt * (1.0 + v.sup_abs()))
    }

    /// Integer ratio between the path sampling step and the solver step.
    fn refinement(&self, v: &BoundaryPath) -> Result<usize> {
        let r = v.dt() / self.dt;
        let ri = r.round();
        if ri < 1.0 || (r - ri).abs() > 1e-9 * r {
            return Err(Error::config(format!(
                "solver dt {} must divide the path sampling step {}",
                self.dt,
                v.dt()
            )));
        }
        Ok(ri as usize)
    }
}

/// Reflected path, cumulative reflection, and the discrete complementarity sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkorohodSolution {
    pub z: SampledPath,
    pub eta: SampledPath,
    pub complementarity_residual: f64,
}

impl SkorohodSolution {
    pub fn dt(&self) -> f64 {
        self.z.dt()
    }

    /// `Z(t_i-)`: the state after the free flow and before the reflection at
    /// `t_i`, i.e. `Z(t_i) - (eta(t_i) - eta(t_{i-1}))`. Entry 0 is `Z(0)`.
    pub fn left_limits(&self) -> SampledPath {
        let dim = self.z.dim();
        let mut out = SampledPath::with_capacity(dim, self.z.dt(), self.z.len());
        out.push(self.z.at(0));
        let mut row = vec![0.0; dim];
        for i in 1..self.z.len() {
            let (z, e1, e0) = (self.z.at(i), self.eta.at(i), self.eta.at(i - 1));
            for k in 0..dim {
                row[k] = z[k] - (e1[k] - e0[k]);
            }
            out.push(&row);
        }
        out
    }

    /// `int_0^T |d eta / dt|^2 dt` with the rate taken per step.
    pub fn eta_rate_energy(&self) -> f64 {
        let dt = self.eta.dt();
        (1..self.eta.len())
            .map(|i| {
                self.eta
                    .at(i)
                    .iter()
                    .zip(self.eta.at(i - 1))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    / dt
            })
            .sum()
    }

    /// `min_{i,k} (Z_k(t_i) + V_k(t_i))`; negative values are violations.
    pub fn constraint_margin(&self, v: &BoundaryPath) -> Result<f64> {
        let v = aligned(v, &self.z)?;
        Ok(self
            .z
            .as_flat()
            .iter()
            .zip(v.samples.as_flat())
            .fold(f64::INFINITY, |m, (z, v)| m.min(z + v)))
    }

    /// Smallest increment of any `eta_k`; never negative for a valid solution.
    pub fn min_eta_increment(&self) -> f64 {
        (1..self.eta.len())
            .flat_map(|i| self.eta.at(i).iter().zip(self.eta.at(i - 1)).map(|(a, b)| a - b))
            .fold(f64::INFINITY, f64::min)
    }
}

/// `V` on the solution's time grid.
fn aligned(v: &BoundaryPath, z: &SampledPath) -> Result<BoundaryPath> {
    check_len(v.grid.interior_count(), z.dim())?;
    let ratio = SolverConfig::projected(z.dt()).refinement(v)?;
    let refined = v.refine(ratio)?;
    check_len(z.len(), refined.samples.len())?;
    Ok(refined)
}

/// Solves with the backend named in `cfg`.
pub fn solve(v: &BoundaryPath, cfg: &SolverConfig) -> Result<SkorohodSolution> {
    match cfg.backend {
        Backend::ProjectedExponential => solve_projected(v, cfg),
        Backend::Penalized => solve_penalized(v, cfg),
    }
}

/// Exponential-Euler flow followed by projection onto `{z >= -V(t_{i+1})}`.
pub fn solve_projected(v: &BoundaryPath, cfg: &SolverConfig) -> Result<SkorohodSolution> {
    if cfg.backend != Backend::ProjectedExponential {
        return Err(Error::config("solve_projected called with a non-projected backend"));
    }
    run(v, cfg, |z_star, barrier| z_star.max(-barrier))
}

/// Exponential flow with an implicitly integrated penalty `(2/eps) (Z + V)^-`.
pub fn solve_penalized(v: &BoundaryPath, cfg: &SolverConfig) -> Result<SkorohodSolution> {
    if cfg.backend != Backend::Penalized {
        return Err(Error::config("solve_penalized called with a non-penalized backend"));
    }
    cfg.validate()?;
    let kappa = 2.0 * cfg.dt / cfg.epsilon.unwrap();
    run(v, cfg, move |z_star, barrier| {
        let u = z_star + barrier;
        if u >= 0.0 {
            z_star
        } else {
            u / (1.0 + kappa) - barrier
        }
    })
}

fn run<C: Fn(f64, f64) -> f64>(v: &BoundaryPath, cfg: &SolverConfig, correct: C) -> Result<SkorohodSolution> {
    cfg.validate()?;
    if !v.is_feasible_at_start() {
        return Err(Error::precondition("Z(0) = 0 requires V(0) >= 0"));
    }
    let ratio = cfg.refinement(v)?;
    let basis = SpectralBasis::new(*v.grid());
    let prop = basis.propagator(cfg.dt)?;
    let (z, eta) = integrate(&prop, v, ratio, correct)?;
    let mut sol = SkorohodSolution { z, eta, complementarity_residual: 0.0 };
    sol.complementarity_residual = complementarity_residual(&sol, v)?;
    Ok(sol)
}

fn integrate<C: Fn(f64, f64) -> f64>(
    prop: &Propagator,
    v: &BoundaryPath,
    ratio: usize,
    correct: C,
) -> Result<(SampledPath, SampledPath)> {
    let dim = prop.dim();
    let steps = v.steps() * ratio;
    let dt = prop.dt();
    let mut z_path = SampledPath::with_capacity(dim, dt, steps + 1);
    let mut eta_path = SampledPath::with_capacity(dim, dt, steps + 1);
    let mut z = vec![0.0; dim];
    let mut eta = vec![0.0; dim];
    let mut z_star = vec![0.0; dim];
    let mut barrier = vec![0.0; dim];
    z_path.push(&z);
    eta_path.push(&eta);
    for i in 0..steps {
        prop.apply_into(&z, &mut z_star);
        v.refined_into(ratio, i + 1, &mut barrier);
        for k in 0..dim {
            let next = correct(z_star[k], barrier[k]);
            let push = next - z_star[k];
            if !next.is_finite() {
                return Err(Error::Numeric { step: i + 1, what: "reflected state" });
            }
            // Corrections only ever push upward.
            eta[k] += push.max(0.0);
            z[k] = next;
        }
        z_path.push(&z);
        eta_path.push(&eta);
    }
    Ok((z_path, eta_path))
}

/// `sum_k sum_i (Z_k(t_i) + V_k(t_i)) (eta_k(t_{i+1}) - eta_k(t_i))`.
pub fn complementarity_residual(sol: &SkorohodSolution, v: &BoundaryPath) -> Result<f64> {
    check_len(sol.z.len(), sol.eta.len())?;
    let v = aligned(v, &sol.z)?;
    let mut total = 0.0;
    for i in 0..sol.z.steps() {
        let (z, vv) = (sol.z.at(i), v.samples.at(i));
        let (e0, e1) = (sol.eta.at(i), sol.eta.at(i + 1));
        for k in 0..z.len() {
            total += (z[k] + vv[k]) * (e1[k] - e0[k]);
        }
    }
    Ok(total)
}

/// `(sup_{t,k} |Z^1_k - Z^2_k|, sup_{t,j} |V^1_j - V^2_j|)`.
pub fn comparison_gap(
    sol1: &SkorohodSolution,
    sol2: &SkorohodSolution,
    v1: &BoundaryPath,
    v2: &BoundaryPath,
) -> Result<(f64, f64)> {
    check_len(sol1.z.dim(), sol2.z.dim())?;
    let lhs = sol1.z.sup_gap(&sol2.z)?;
    check_len(v1.grid.interior_count(), v2.grid.interior_count())?;
    if (v1.horizon() - v2.horizon()).abs() > 1e-12 * v1.horizon().max(1.0) {
        return Err(Error::Dimension { expected: v1.steps(), got: v2.steps() });
    }
    let rhs = v1.samples.sup_gap(&v2.samples)?;
    Ok((lhs, rhs))
}

/// `(<b^+, A^n b>, <b^-, A^n b>)` for the unscaled stencil. The first is never
/// positive and the second never negative.
pub fn orthant_pairings(lap: &DiscreteLaplacian, b: &[f64]) -> Result<(f64, f64)> {
    let ab = lap.apply_unscaled(b)?;
    let plus = b.iter().zip(&ab).map(|(x, y)| x.max(0.0) * y).sum();
    let minus = b.iter().zip(&ab).map(|(x, y)| (-x).max(0.0) * y).sum();
    Ok((plus, minus))
}
