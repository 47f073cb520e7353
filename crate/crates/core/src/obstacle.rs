//! Parabolic obstacle problem on `[0, 1]`:
//!
//! ```text
//! dZ/dt - d^2Z/dx^2 = eta(dt, dx),   Z >= -V,   int (Z + V) eta(ds, dx) = 0,
//! ```
//!
//! with `Z(0, .) = 0` and zero boundary values. The obstacle is sampled at the
//! interior nodes and the lattice reflection problem of [`crate::skorohod`] is
//! solved; the node values are then lifted to a piecewise-linear field.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{DiscreteLaplacian, GridSpec, PiecewiseLinearField, SampledPath};
use crate::quadrature;
use crate::skorohod::{self, BoundaryPath, SolverConfig};

pub type ObstacleFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Whether the obstacle is smooth (`C^{1,2}`) or merely continuous.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothness {
    C12,
    C0,
}

#[derive(Clone)]
pub struct ObstacleInstance {
    name: String,
    field: ObstacleFn,
    horizon: f64,
    smoothness: Smoothness,
}

impl std::fmt::Debug for ObstacleInstance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ObstacleInstance")
            .field("name", &self.name)
            .field("horizon", &self.horizon)
            .field("smoothness", &self.smoothness)
            .finish()
    }
}

impl ObstacleInstance {
    /// Checks `V(0, x) >= 0` (to rounding, `1e-12`) on a probe grid of 1001 points.
    pub fn new<F>(name: impl Into<String>, horizon: f64, smoothness: Smoothness, field: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::config(format!("horizon must be > 0, got {horizon}")));
        }
        let inst = Self { name: name.into(), field: Arc::new(field), horizon, smoothness };
        if let Some(x) = (0..=1000)
            .map(|i| i as f64 / 1000.0)
            .find(|&x| !(inst.value(0.0, x) >= -1e-12))
        {
            return Err(Error::precondition(format!("obstacle must satisfy V(0, x) >= 0; fails at x = {x}")));
        }
        Ok(inst)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn value(&self, t: f64, x: f64) -> f64 {
        (self.field)(t, x)
    }

    /// Same obstacle on a different horizon.
    pub fn with_horizon(&self, horizon: f64) -> Result<Self> {
        let f = self.field.clone();
        Self::new(self.name.clone(), horizon, self.smoothness, move |t, x| f(t, x))
    }

    /// `V(t, x) = sin(pi x)`: positive inside, so the solution is zero.
    pub fn positive() -> Self {
        Self::new("obstacle_positive", 1.0, Smoothness::C12, |_, x| (PI * x).sin()).unwrap()
    }

    /// `V(t, x) = (1 - 2t) sin(pi x)` on `[0, 1]`: reflection starts at `t = 1/2`.
    pub fn sign_change() -> Self {
        Self::new("obstacle_sign_change", 1.0, Smoothness::C12, |t, x| (1.0 - 2.0 * t) * (PI * x).sin())
            .unwrap()
    }

    /// `(1 - 2t) sin(pi x) (1 + 0.3 w(x))` with `w` a triangle wave of period 1/3:
    /// continuous in `x` with kinks, so only the continuous-obstacle theory applies.
    pub fn zigzag() -> Self {
        Self::new("obstacle_zigzag", 1.0, Smoothness::C0, |t, x| {
            (1.0 - 2.0 * t) * (PI * x).sin() * (1.0 + 0.3 * zigzag(x))
        })
        .unwrap()
    }

    /// Bilinear interpolation of a tabulated field.
    pub fn from_table(name: impl Into<String>, table: TabulatedObstacle) -> Result<Self> {
        table.validate()?;
        let horizon = *table.times.last().unwrap();
        let table = Arc::new(table);
        Self::new(name, horizon, Smoothness::C0, move |t, x| table.eval(t, x))
    }

    /// Convolution in `x` with a hat kernel of half-width `1/m`, after odd
    /// reflection about `x = 0` and `x = 1` (which keeps zero boundary values).
    pub fn mollify(&self, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::config("mollification index must be >= 1"));
        }
        let h = 1.0 / m as f64;
        let f = self.field.clone();
        let odd = move |t: f64, x: f64| -> f64 {
            // Period-2 odd extension of a function on [0, 1].
            let y = x.rem_euclid(2.0);
            if y <= 1.0 {
                f(t, y)
            } else {
                -f(t, 2.0 - y)
            }
        };
        Self::new(format!("{}_mollified_{m}", self.name), self.horizon, Smoothness::C12, move |t, x| {
            let mut acc = 0.0;
            for p in 0..8 {
                let a = -h + 2.0 * h * p as f64 / 8.0;
                let b = a + 2.0 * h / 8.0;
                acc += quadrature::panel(a, b, |u| odd(t, x - u) * (h - u.abs()) / (h * h));
            }
            acc
        })
    }

    /// `sup |V_1 - V_2|` over a `(times + 1) x 1001` probe grid.
    pub fn sup_distance(&self, other: &ObstacleInstance, times: usize) -> f64 {
        let horizon = self.horizon.min(other.horizon);
        let mut worst = 0.0_f64;
        for i in 0..=times {
            let t = horizon * i as f64 / times as f64;
            for j in 0..=1000 {
                let x = j as f64 / 1000.0;
                worst = worst.max((self.value(t, x) - other.value(t, x)).abs());
            }
        }
        worst
    }
}

/// Triangle wave in `[-1, 1]` with period 1/3.
pub fn zigzag(x: f64) -> f64 {
    let y = 3.0 * x;
    4.0 * (y - y.floor() - 0.5).abs() - 1.0
}

/// Tabulated obstacle: `values[i * xs.len() + j] = V(times[i], xs[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedObstacle {
    pub times: Vec<f64>,
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
}

impl TabulatedObstacle {
    fn validate(&self) -> Result<()> {
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        if self.times.len() < 2 || self.xs.len() < 2 {
            return Err(Error::config("tabulated obstacle needs at least two times and two positions"));
        }
        if !increasing(&self.times) || !increasing(&self.xs) {
            return Err(Error::config("tabulated grids must be strictly increasing"));
        }
        if self.times[0] != 0.0 || self.xs[0] != 0.0 || *self.xs.last().unwrap() != 1.0 {
            return Err(Error::config("tabulated grids must start at t = 0 and span x in [0, 1]"));
        }
        if self.values.len() != self.times.len() * self.xs.len() {
            return Err(Error::Dimension { expected: self.times.len() * self.xs.len(), got: self.values.len() });
        }
        Ok(())
    }

    fn bracket(grid: &[f64], v: f64) -> (usize, f64) {
        let v = v.clamp(grid[0], *grid.last().unwrap());
        let i = match grid.partition_point(|&g| g <= v) {
            0 => 0,
            p => (p - 1).min(grid.len() - 2),
        };
        (i, (v - grid[i]) / (grid[i + 1] - grid[i]))
    }

    fn eval(&self, t: f64, x: f64) -> f64 {
        let (i, wt) = Self::bracket(&self.times, t);
        let (j, wx) = Self::bracket(&self.xs, x);
        let w = self.xs.len();
        let at = |a: usize, b: usize| self.values[a * w + b];
        let lo = at(i, j) + wx * (at(i, j + 1) - at(i, j));
        let hi = at(i + 1, j) + wx * (at(i + 1, j + 1) - at(i + 1, j));
        lo + wt * (hi - lo)
    }
}

/// Samples the obstacle at interior nodes and at `t_i = i dt`.
pub fn discretize(inst: &ObstacleInstance, grid: GridSpec, dt: f64) -> Result<BoundaryPath> {
    let steps = step_count(inst.horizon, dt)?;
    BoundaryPath::from_fn(grid, dt, steps, |t, k| inst.value(t, grid.node(k)))
}

fn step_count(horizon: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) {
        return Err(Error::config(format!("dt must be > 0, got {dt}")));
    }
    let r = horizon / dt;
    let steps = r.round();
    if steps < 1.0 || (r - steps).abs() > 1e-9 * r {
        return Err(Error::config(format!("dt {dt} does not divide horizon {horizon}")));
    }
    Ok(steps as usize)
}

/// Lattice solution of the obstacle problem.
#[derive(Debug, Clone)]
pub struct ObstacleSolution {
    pub z_field: PiecewiseLinearField,
    /// Cumulative reflection per interior node.
    pub eta: SampledPath,
    pub boundary: BoundaryPath,
    pub complementarity_residual: f64,
}

impl ObstacleSolution {
    pub fn grid(&self) -> &GridSpec {
        self.z_field.grid()
    }

    /// `min (Z + V)` over nodes and times.
    pub fn constraint_margin(&self) -> f64 {
        self.z_field
            .path()
            .as_flat()
            .iter()
            .zip(self.boundary.samples().as_flat())
            .fold(f64::INFINITY, |m, (z, v)| m.min(z + v))
    }

    /// Reflection mass per (node cell, time bin): `sum (eta_k(t_{i+1}) - eta_k(t_i)) / n`
    /// over the steps in each bin. Rows are nodes `k = 1..n-1`.
    pub fn eta_histogram(&self, time_bins: usize) -> Result<Vec<Vec<f64>>> {
        if time_bins == 0 {
            return Err(Error::config("need at least one time bin"));
        }
        let steps = self.eta.steps();
        let dim = self.eta.dim();
        let n = self.grid().n() as f64;
        let mut hist = vec![vec![0.0; time_bins]; dim];
        for i in 0..steps {
            let bin = (i * time_bins / steps).min(time_bins - 1);
            let (a, b) = (self.eta.at(i), self.eta.at(i + 1));
            for k in 0..dim {
                hist[k][bin] += (b[k] - a[k]) / n;
            }
        }
        Ok(hist)
    }

    /// `eta_k(t) / dt` per step, as a discrete density; `None` if the step is
    /// not finer than the horizon.
    pub fn eta_density_l2(&self) -> f64 {
        let dt = self.eta.dt();
        let mut total = 0.0;
        for i in 0..self.eta.steps() {
            let (a, b) = (self.eta.at(i), self.eta.at(i + 1));
            total += a.iter().zip(b).map(|(x, y)| (y - x) * (y - x)).sum::<f64>() / dt;
        }
        total
    }
}

/// Discretizes the obstacle and solves the lattice reflection problem.
pub fn solve(inst: &ObstacleInstance, grid: GridSpec, cfg: &SolverConfig) -> Result<ObstacleSolution> {
    let boundary = discretize(inst, grid, cfg.dt)?;
    let sol = skorohod::solve(&boundary, cfg)?;
    Ok(ObstacleSolution {
        z_field: PiecewiseLinearField::new(grid, sol.z)?,
        eta: sol.eta,
        boundary,
        complementarity_residual: sol.complementarity_residual,
    })
}

/// Discrete weak-form defect for a test function `phi` with `phi(0) = phi(1) = 0`:
///
/// `<Z(t), phi^n>/n - int_0^t <n^2 A^n phi^n, Z(s)>/n ds - sum_k phi(k/n) eta_k(t)/n`,
///
/// with the time integral taken by the left-endpoint rule on the solver grid.
pub fn weak_form_residual<F: Fn(f64) -> f64>(sol: &ObstacleSolution, phi: F) -> Result<Vec<f64>> {
    let grid = *sol.grid();
    if phi(0.0).abs() > 1e-12 || phi(1.0).abs() > 1e-12 {
        return Err(Error::precondition("test function must vanish at x = 0 and x = 1"));
    }
    let n = grid.n() as f64;
    let phi_n: Vec<f64> = grid.interior_nodes().map(&phi).collect();
    let lap_phi = DiscreteLaplacian::new(grid).apply(&phi_n)?;
    let z = sol.z_field.path();
    let dt = z.dt();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut integral = 0.0;
    let mut out = Vec::with_capacity(z.len());
    for i in 0..z.len() {
        if i > 0 {
            integral += dt * dot(&lap_phi, z.at(i - 1)) / n;
        }
        let lhs = dot(z.at(i), &phi_n) / n;
        let reflection = dot(sol.eta.at(i), &phi_n) / n;
        out.push(lhs - integral - reflection);
    }
    Ok(out)
}

/// Self-convergence table for a sequence of resolutions.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub reference_n: usize,
    /// `(n, sup gap to the reference)` for every resolution except the reference.
    pub rows: Vec<(usize, f64)>,
    /// Gaps strictly decrease with `n`.
    pub monotone: bool,
}

/// Space points of the common evaluation grid of a convergence study; times
/// are every 10th solver step in both cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleGrid {
    /// Interior nodes of the coarsest lattice. These are nodes of every finer
    /// lattice too, so interpolation error between nodes is not seen.
    CoarseNodes,
    /// Interior nodes of the reference (finest) lattice.
    ReferenceNodes,
}

/// Solves at every resolution in `n_list` and measures each against the last
/// (finest) entry on the reference lattice's nodes at every 10th time step.
pub fn convergence_study(inst: &ObstacleInstance, n_list: &[usize], cfg: &SolverConfig) -> Result<ConvergenceTable> {
    convergence_study_on(inst, n_list, cfg, SampleGrid::ReferenceNodes)
}

/// [`convergence_study`] with an explicit choice of evaluation points.
pub fn convergence_study_on(
    inst: &ObstacleInstance,
    n_list: &[usize],
    cfg: &SolverConfig,
    sample: SampleGrid,
) -> Result<ConvergenceTable> {
    if n_list.len() < 3 {
        return Err(Error::config("convergence study needs at least three resolutions"));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config("resolutions must be strictly increasing"));
    }
    let grids: Vec<GridSpec> = n_list.iter().map(|&n| GridSpec::new(n)).collect::<Result<_>>()?;
    let solutions: Vec<ObstacleSolution> = grids
        .par_iter()
        .map(|g| solve(inst, *g, cfg))
        .collect::<Result<_>>()?;
    let points = match sample {
        SampleGrid::CoarseNodes => grids[0],
        SampleGrid::ReferenceNodes => *grids.last().unwrap(),
    };
    let xs: Vec<f64> = points.interior_nodes().collect();
    let reference = solutions.last().unwrap();
    let steps = reference.z_field.steps();
    let times: Vec<usize> = (0..=steps).step_by(10).collect();
    let mut rows = Vec::with_capacity(solutions.len() - 1);
    for sol in &solutions[..solutions.len() - 1] {
        let mut gap = 0.0_f64;
        for &i in &times {
            for &x in &xs {
                gap = gap.max((sol.z_field.eval(i, x)? - reference.z_field.eval(i, x)?).abs());
            }
        }
        rows.push((sol.grid().n(), gap));
    }
    let monotone = rows.windows(2).all(|w| w[1].1 < w[0].1);
    Ok(ConvergenceTable { reference_n: reference.grid().n(), rows, monotone })
}

/// Largest `|Z(t,x) - Z(s,y)|^2 / (sqrt|t-s| + |x-y|)` over `samples` random
/// pairs drawn with a fixed seed. Returns 0 for the zero solution.
pub fn holder_modulus(sol: &ObstacleSolution, samples: usize, seed: u64) -> Result<f64> {
    if sol.z_field.sup_abs() == 0.0 {
        return Ok(0.0);
    }
    let horizon = sol.z_field.path().horizon();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let (t, s) = (rng.random::<f64>() * horizon, rng.random::<f64>() * horizon);
        let (x, y) = (rng.random::<f64>(), rng.random::<f64>());
        let denom = (t - s).abs().sqrt() + (x - y).abs();
        if denom == 0.0 {
            continue;
        }
        let d = sol.z_field.eval_at(t, x)? - sol.z_field.eval_at(s, y)?;
        worst = worst.max(d * d / denom);
    }
    Ok(worst)
}
