//! Property checks run by the `property_suite` experiment kind.

use std::f64::consts::PI;

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::lattice::{DiscreteLaplacian, GridSpec, SpectralBasis};
use crate::noise::derive_seed;
use crate::obstacle::{self, ObstacleInstance};
use crate::skorohod::{self, comparison_gap, orthant_pairings, BoundaryPath, SolverConfig};

/// One property evaluated at one resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub property: &'static str,
    /// Statement of the property, printed when it fails.
    pub statement: &'static str,
    pub n: usize,
    pub trials: usize,
    pub violations: usize,
    /// Largest excess over the allowed bound (negative when every trial passes).
    pub worst_excess: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

struct Tally {
    trials: usize,
    violations: usize,
    worst: f64,
}

impl Tally {
    fn new() -> Self {
        Self { trials: 0, violations: 0, worst: f64::NEG_INFINITY }
    }

    fn record(&mut self, excess: f64) {
        self.trials += 1;
        if excess > 0.0 || excess.is_nan() {
            self.violations += 1;
        }
        self.worst = self.worst.max(excess);
    }

    fn finish(self, property: &'static str, statement: &'static str, n: usize) -> CheckResult {
        CheckResult {
            property,
            statement,
            n,
            trials: self.trials,
            violations: self.violations,
            worst_excess: self.worst,
        }
    }
}

/// `|n^2 A e_j - lambda_j e_j|_inf <= 1e-9 |lambda_j|` for every mode.
pub fn spectral_exactness(grid: GridSpec) -> Result<CheckResult> {
    let basis = SpectralBasis::new(grid);
    let lap = DiscreteLaplacian::new(grid);
    let mut tally = Tally::new();
    for j in 1..=basis.dim() {
        let e = basis.eigenvector(j);
        let lambda = basis.eigenvalue(j);
        let ae = lap.apply(e)?;
        let err = ae.iter().zip(e).fold(0.0_f64, |m, (a, v)| m.max((a - lambda * v).abs()));
        tally.record(err - 1e-9 * lambda.abs());
    }
    Ok(tally.finish("spectral_exactness", "n^2 A^n e_j = lambda_j e_j", grid.n()))
}

/// `<b^+, A^n b> <= 1e-12` over `trials` Gaussian vectors.
pub fn orthant_pairing(grid: GridSpec, trials: usize, seed: u64) -> Result<CheckResult> {
    let lap = DiscreteLaplacian::new(grid);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, grid.n() as u64));
    let mut tally = Tally::new();
    let mut b = vec![0.0; grid.interior_count()];
    for _ in 0..trials {
        for x in b.iter_mut() {
            *x = 2.0 * rng.random::<f64>() - 1.0;
        }
        let (plus, _) = orthant_pairings(&lap, &b)?;
        tally.record(plus - 1e-12);
    }
    Ok(tally.finish("orthant_pairing", "<b^+, A^n b> <= 0", grid.n()))
}

/// A random feasible obstacle path: `s ((1 - beta t) sin(pi x) + gamma sin(2 pi x) sin(omega t))`
/// sampled at the interior nodes, with `V(0) >= 0`.
pub fn random_boundary<R: Rng>(grid: GridSpec, dt: f64, steps: usize, rng: &mut R) -> Result<BoundaryPath> {
    let s = 0.5 + 1.5 * rng.random::<f64>();
    let beta = 4.0 * rng.random::<f64>();
    let gamma = 2.0 * rng.random::<f64>() - 1.0;
    let omega = 20.0 * rng.random::<f64>();
    BoundaryPath::from_fn(grid, dt, steps, |t, k| {
        let x = grid.node(k);
        s * ((1.0 - beta * t) * (PI * x).sin() + gamma * (2.0 * PI * x).sin() * (omega * t).sin())
    })
}

/// `sup|Z^1 - Z^2| <= sup|V^1 - V^2| + 5 sqrt(dt) (1 + sup|V|)` over random pairs.
pub fn reflection_comparison(grid: GridSpec, pairs: usize, dt: f64, horizon: f64, seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed ^ 0x5eed, grid.n() as u64));
    let steps = (horizon / dt).round() as usize;
    let cfg = SolverConfig::projected(dt);
    let mut tally = Tally::new();
    for _ in 0..pairs {
        let v1 = random_boundary(grid, dt, steps, &mut rng)?;
        let v2 = random_boundary(grid, dt, steps, &mut rng)?;
        let (a, b) = (skorohod::solve(&v1, &cfg)?, skorohod::solve(&v2, &cfg)?);
        let (gap_z, gap_v) = comparison_gap(&a, &b, &v1, &v2)?;
        let scale = 1.0 + v1.sup_abs().max(v2.sup_abs());
        tally.record(gap_z - gap_v - 5.0 * dt.sqrt() * scale);
    }
    Ok(tally.finish("reflection_comparison", "sup|Z^1 - Z^2| <= sup|V^1 - V^2|", grid.n()))
}

/// Discrete complementarity of the obstacle solve within `10 dt (1 + sup|V|)`,
/// together with `Z >= -V` at every node and step.
pub fn obstacle_complementarity(inst: &ObstacleInstance, grid: GridSpec, dt: f64) -> Result<CheckResult> {
    let cfg = SolverConfig::projected(dt);
    let sol = obstacle::solve(inst, grid, &cfg)?;
    let tol = cfg.tolerance_for(&sol.boundary);
    let mut tally = Tally::new();
    tally.record(sol.complementarity_residual.abs() - tol);
    tally.record(-sol.constraint_margin() - 1e-12);
    Ok(tally.finish("complementarity", "int (Z + V) d eta = 0 and Z >= -V", grid.n()))
}

/// The positive obstacle yields `Z = 0` and `eta = 0` up to `1e-12`.
pub fn positive_obstacle(grid: GridSpec, dt: f64) -> Result<CheckResult> {
    let sol = obstacle::solve(&ObstacleInstance::positive(), grid, &SolverConfig::projected(dt))?;
    let mut tally = Tally::new();
    tally.record(sol.z_field.sup_abs() - 1e-12);
    tally.record(sol.eta.sup_abs() - 1e-12);
    Ok(tally.finish("positive_obstacle", "V > 0 inside implies Z = 0, eta = 0", grid.n()))
}

/// All suite checks at one resolution.
pub fn run_suite(grid: GridSpec, trials: usize, dt: f64, seed: u64) -> Result<Vec<CheckResult>> {
    Ok(vec![
        spectral_exactness(grid)?,
        orthant_pairing(grid, trials, seed)?,
        reflection_comparison(grid, 10, dt, 0.1, seed)?,
        obstacle_complementarity(&ObstacleInstance::sign_change(), grid, dt)?,
        positive_obstacle(grid, dt)?,
    ])
}
