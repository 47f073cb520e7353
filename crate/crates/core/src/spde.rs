//! Reflected stochastic heat equation on the lattice.
//!
//! Per step the node values move by the exact heat flow, an explicit drift and
//! noise increment evaluated at the left endpoint, and are then projected onto
//! `u >= 0`:
//!
//! ```text
//! u*      = exp(n^2 A dt) u_i + dt f(t_i, x, u_i) + sqrt(n) sigma(t_i, x, u_i) dW^n_i
//! u_{i+1} = max(u*, 0),    eta_{i+1} = eta_i + (u_{i+1} - u*)
//! ```
//!
//! The unreflected companion `v` (same noise, same `u`-dependent coefficients)
//! is advanced alongside, so `u - v` is the lattice reflection problem with
//! barrier `v`.

use std::fs;
use std::io::BufWriter;
use std::path::Path;
use std::sync::Arc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::kernel::{cells_from_modes, lifted_modes};
use crate::lattice::{GridSpec, PiecewiseLinearField, SampledPath, SpectralBasis};
use crate::noise::{self, coarsen_space_time, derive_seed, LatticeDriver, SheetIncrements};
use crate::stats::Estimate;

pub type CoefficientFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
pub type InitialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Drift `f(t, x, u)` and diffusion `sigma(t, x, u)` with declared Lipschitz
/// and linear-growth constants.
#[derive(Clone)]
pub struct Coefficients {
    pub f: CoefficientFn,
    pub sigma: CoefficientFn,
    pub lipschitz_constant: f64,
    pub growth_constant: f64,
}

impl std::fmt::Debug for Coefficients {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Coefficients")
            .field("lipschitz_constant", &self.lipschitz_constant)
            .field("growth_constant", &self.growth_constant)
            .finish_non_exhaustive()
    }
}

impl Coefficients {
    pub fn new<F, S>(f: F, sigma: S, lipschitz_constant: f64, growth_constant: f64) -> Self
    where
        F: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        S: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self { f: Arc::new(f), sigma: Arc::new(sigma), lipschitz_constant, growth_constant }
    }

    /// `f = sigma = 0`.
    pub fn zero() -> Self {
        Self::new(|_, _, _| 0.0, |_, _, _| 0.0, 0.0, 0.0)
    }

    /// Additive unit noise, no drift.
    pub fn additive() -> Self {
        Self::new(|_, _, _| 0.0, |_, _, _| 1.0, 0.0, 1.0)
    }

    /// Logistic drift on the clamped state and a capped affine diffusion.
    pub fn lipschitz_demo() -> Self {
        Self::new(
            |_, _, u| {
                let c = u.clamp(0.0, 1.0);
                0.5 * c * (1.0 - c)
            },
            |_, _, u| 0.2 * (1.0 + u.abs()).min(10.0),
            1.0,
            2.0,
        )
    }

    /// Spot-checks the Lipschitz and linear-growth conditions on `probes`
    /// random pairs in `[0, horizon] x [0, 1] x [-range, range]`.
    pub fn check_hypotheses(&self, horizon: f64, range: f64, probes: usize, seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (f, s) = (&self.f, &self.sigma);
        for _ in 0..probes {
            let t = rng.random::<f64>() * horizon;
            let (x, y) = (rng.random::<f64>(), rng.random::<f64>());
            let (u, v) = (range * (2.0 * rng.random::<f64>() - 1.0), range * (2.0 * rng.random::<f64>() - 1.0));
            let lhs = (f(t, x, u) - f(t, y, v)).abs() + (s(t, x, u) - s(t, y, v)).abs();
            let rhs = self.lipschitz_constant * ((x - y).abs() + (u - v).abs());
            if lhs > rhs + 1e-12 {
                return Err(Error::precondition(format!(
                    "Lipschitz condition fails at t={t}, x={x}, y={y}, u={u}, v={v}: {lhs} > {rhs}"
                )));
            }
            let bound = self.growth_constant * (1.0 + u.abs());
            if f(t, x, u).abs() > bound + 1e-12 || s(t, x, u).abs() > bound + 1e-12 {
                return Err(Error::precondition(format!("linear growth fails at t={t}, x={x}, u={u}")));
            }
        }
        Ok(())
    }
}

/// One simulation: lattice, time grid, initial profile, seed and coefficients.
#[derive(Clone)]
pub struct SimulationConfig {
    pub label: String,
    pub grid: GridSpec,
    pub dt: f64,
    pub horizon: f64,
    pub u0: InitialFn,
    pub seed: u64,
    pub coefficients: Coefficients,
}

impl std::fmt::Debug for SimulationConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SimulationConfig")
            .field("label", &self.label)
            .field("grid", &self.grid)
            .field("dt", &self.dt)
            .field("horizon", &self.horizon)
            .field("seed", &self.seed)
            .field("coefficients", &self.coefficients)
            .finish_non_exhaustive()
    }
}

/// Names accepted by [`SimulationConfig::preset`].
pub const PRESETS: [&str; 3] = ["heat_decay", "nualart_pardoux", "lipschitz_demo"];

fn sine_profile() -> InitialFn {
    Arc::new(|x: f64| (std::f64::consts::PI * x).sin())
}

impl SimulationConfig {
    pub fn new(
        label: impl Into<String>,
        grid: GridSpec,
        dt: f64,
        horizon: f64,
        u0: InitialFn,
        seed: u64,
        coefficients: Coefficients,
    ) -> Result<Self> {
        let cfg = Self { label: label.into(), grid, dt, horizon, u0, seed, coefficients };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Built-in coefficient sets, all started from `sin(pi x)`.
    pub fn preset(name: &str, n: usize, dt: f64, horizon: f64, seed: u64) -> Result<Self> {
        let coefficients = match name {
            "heat_decay" => Coefficients::zero(),
            "nualart_pardoux" => Coefficients::additive(),
            "lipschitz_demo" => Coefficients::lipschitz_demo(),
            other => return Err(Error::config(format!("unknown simulation preset {other:?}"))),
        };
        Self::new(name, GridSpec::new(n)?, dt, horizon, sine_profile(), seed, coefficients)
    }

    /// Same configuration on another lattice.
    pub fn with_grid(&self, grid: GridSpec) -> Self {
        Self { grid, ..self.clone() }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn with_dt(&self, dt: f64) -> Result<Self> {
        let cfg = Self { dt, ..self.clone() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.horizon > 0.0) {
            return Err(Error::config(format!("need dt > 0 and T > 0, got dt={}, T={}", self.dt, self.horizon)));
        }
        let r = self.horizon / self.dt;
        if r.round() < 1.0 || (r - r.round()).abs() > 1e-9 * r {
            return Err(Error::config(format!("dt {} does not divide T {}", self.dt, self.horizon)));
        }
        let u0 = &self.u0;
        if u0(0.0).abs() > 1e-12 || u0(1.0).abs() > 1e-12 {
            return Err(Error::precondition("u0 must vanish at x = 0 and x = 1"));
        }
        let probes = (0..=1000).map(|i| i as f64 / 1000.0).chain(self.grid.interior_nodes());
        for x in probes {
            let v = u0(x);
            if !(v >= 0.0) {
                return Err(Error::precondition(format!("u0 must be nonnegative; u0({x}) = {v}")));
            }
        }
        Ok(())
    }

    /// Space-time white noise for this configuration at resolution `n_fine`.
    pub fn sheet(&self, n_fine: usize) -> Result<SheetIncrements> {
        SheetIncrements::new(n_fine, self.dt, self.steps(), self.seed)
    }

    /// Driver for this configuration's lattice from `sheet`, merging sheet
    /// steps when the sheet is finer in time.
    pub fn driver(&self, sheet: &SheetIncrements) -> Result<LatticeDriver> {
        let ratio = self.dt / sheet.dt();
        let factor = ratio.round();
        if factor < 1.0 || (ratio - factor).abs() > 1e-9 * ratio {
            return Err(Error::config(format!("sheet dt {} does not divide dt {}", sheet.dt(), self.dt)));
        }
        coarsen_space_time(sheet, self.grid.n(), factor as usize)
    }

    fn summary(&self) -> ConfigSummary {
        ConfigSummary {
            label: self.label.clone(),
            n: self.grid.n(),
            dt: self.dt,
            horizon: self.horizon,
            seed: self.seed,
            lipschitz_constant: self.coefficients.lipschitz_constant,
            growth_constant: self.coefficients.growth_constant,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct ConfigSummary {
    label: String,
    n: usize,
    dt: f64,
    horizon: f64,
    seed: u64,
    lipschitz_constant: f64,
    growth_constant: f64,
}

/// Which noise produced a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DriverRef {
    pub seed: u64,
    pub n_fine: usize,
    pub time_factor: usize,
}

impl DriverRef {
    fn of(driver: &LatticeDriver) -> Self {
        let sheet = driver.sheet();
        Self {
            seed: sheet.seed(),
            n_fine: sheet.n_fine(),
            time_factor: sheet.steps() / driver.steps(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulatedPath {
    pub u_field: PiecewiseLinearField,
    /// Cumulative reflection per interior node.
    pub eta: SampledPath,
    pub v_field: Option<PiecewiseLinearField>,
    pub driver_ref: Option<DriverRef>,
    /// `sum_i u_k(t_i) (eta_k(t_i) - eta_k(t_{i-1}))` per node.
    pub complementarity: Vec<f64>,
    coefficients: Coefficients,
    u0: Vec<f64>,
}

impl SimulatedPath {
    pub fn grid(&self) -> &GridSpec {
        self.u_field.grid()
    }

    pub fn sup_abs(&self) -> f64 {
        self.u_field.sup_abs()
    }

    pub fn min(&self) -> f64 {
        self.u_field.path().min()
    }

    /// Smallest per-node increment of `eta` over the run.
    pub fn min_eta_increment(&self) -> f64 {
        let mut worst = f64::INFINITY;
        for i in 0..self.eta.steps() {
            for (a, b) in self.eta.at(i).iter().zip(self.eta.at(i + 1)) {
                worst = worst.min(b - a);
            }
        }
        worst
    }

    /// Writes `manifest.json` and `u.bin`; the binary layout matches
    /// [`SheetIncrements::write_dump`] with `steps` holding the row count.
    pub fn export(&self, cfg: &SimulationConfig, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let manifest = serde_json::json!({
            "config": cfg.summary(),
            "seed": self.driver_ref.map(|d| d.seed),
            "provenance": self.driver_ref,
            "rows": self.u_field.path().len(),
            "width": self.u_field.path().dim(),
            "field": "u.bin",
        });
        fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
        let mut w = BufWriter::new(fs::File::create(dir.join("u.bin"))?);
        let path = self.u_field.path();
        let seed = self.driver_ref.map_or(cfg.seed, |d| d.seed);
        noise::write_header(&mut w, path.dim() as u64, path.dt(), path.len() as u64, seed)?;
        for v in path.as_flat() {
            std::io::Write::write_all(&mut w, &v.to_le_bytes())?;
        }
        std::io::Write::flush(&mut w)?;
        Ok(())
    }
}

fn check_driver(cfg: &SimulationConfig, driver: &LatticeDriver) -> Result<()> {
    if driver.grid() != &cfg.grid {
        return Err(Error::config(format!(
            "driver lattice n={} does not match configuration n={}",
            driver.grid().n(),
            cfg.grid.n()
        )));
    }
    if (driver.dt() - cfg.dt).abs() > 1e-12 * cfg.dt {
        return Err(Error::config(format!("driver dt {} does not match dt {}", driver.dt(), cfg.dt)));
    }
    if driver.steps() != cfg.steps() {
        return Err(Error::config(format!("driver has {} steps, need {}", driver.steps(), cfg.steps())));
    }
    Ok(())
}

/// Runs the projected exponential-Euler scheme against `driver`.
pub fn simulate(cfg: &SimulationConfig, driver: &LatticeDriver) -> Result<SimulatedPath> {
    cfg.validate()?;
    check_driver(cfg, driver)?;
    let grid = cfg.grid;
    let n = grid.n();
    let dim = grid.interior_count();
    let steps = cfg.steps();
    let dt = cfg.dt;
    let prop = SpectralBasis::new(grid).propagator(dt)?;
    let root_n = (n as f64).sqrt();
    let (f, sigma) = (&cfg.coefficients.f, &cfg.coefficients.sigma);
    let nodes: Vec<f64> = grid.interior_nodes().collect();

    let u0: Vec<f64> = nodes.iter().map(|&x| (cfg.u0)(x)).collect();
    let mut u = u0.clone();
    let mut v = u0.clone();
    let mut eta = vec![0.0; dim];
    let mut flow_u = vec![0.0; dim];
    let mut flow_v = vec![0.0; dim];
    let mut forcing = vec![0.0; dim];
    let mut scratch = Vec::new();
    let mut dw = vec![0.0; n];
    let mut complementarity = vec![0.0; dim];

    let mut u_path = SampledPath::with_capacity(dim, dt, steps + 1);
    let mut v_path = SampledPath::with_capacity(dim, dt, steps + 1);
    let mut eta_path = SampledPath::with_capacity(dim, dt, steps + 1);
    u_path.push(&u);
    v_path.push(&v);
    eta_path.push(&eta);

    for i in 0..steps {
        let t = i as f64 * dt;
        driver.fill_step(i, &mut scratch, &mut dw)?;
        for k in 0..dim {
            let (x, uk) = (nodes[k], u[k]);
            forcing[k] = dt * f(t, x, uk) + root_n * sigma(t, x, uk) * dw[k + 1];
        }
        if forcing.iter().any(|d| !d.is_finite()) {
            return Err(Error::Numeric { step: i, what: "coefficients" });
        }
        prop.apply_into(&u, &mut flow_u);
        prop.apply_into(&v, &mut flow_v);
        for k in 0..dim {
            let star = flow_u[k] + forcing[k];
            let next = star.max(0.0);
            eta[k] += next - star;
            complementarity[k] += next * (next - star);
            u[k] = next;
            v[k] = flow_v[k] + forcing[k];
        }
        if u.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(Error::Numeric { step: i + 1, what: "state" });
        }
        u_path.push(&u);
        v_path.push(&v);
        eta_path.push(&eta);
    }

    Ok(SimulatedPath {
        u_field: PiecewiseLinearField::new(grid, u_path)?,
        eta: eta_path,
        v_field: Some(PiecewiseLinearField::new(grid, v_path)?),
        driver_ref: Some(DriverRef::of(driver)),
        complementarity,
        coefficients: cfg.coefficients.clone(),
        u0,
    })
}

/// Largest `|u(t, x) - rhs(t, x)|` over `probes`, where `rhs` is the mild
/// representation built from the lattice kernel, the stored `eta` increments
/// and the driver noise. Drift and noise use left-endpoint rectangles in time;
/// each `eta` increment enters at the end of its step. Probe times are snapped
/// to the time grid.
pub fn mild_residual(path: &SimulatedPath, driver: &LatticeDriver, probes: &[(f64, f64)]) -> Result<f64> {
    let provenance = path
        .driver_ref
        .ok_or_else(|| Error::precondition("path carries no driver provenance"))?;
    if provenance != DriverRef::of(driver) || driver.grid() != path.grid() {
        return Err(Error::precondition("driver does not match the path's provenance"));
    }
    let grid = *path.grid();
    let n = grid.n();
    let dim = grid.interior_count();
    let u_path = path.u_field.path();
    let dt = u_path.dt();
    let steps = u_path.steps();
    let basis = SpectralBasis::new(grid);
    let root_n = (n as f64).sqrt();
    let nodes: Vec<f64> = grid.interior_nodes().collect();
    let (f, sigma) = (&path.coefficients.f, &path.coefficients.sigma);

    // Per step, the node forcing (drift plus noise) and the eta increment.
    let mut forcing = vec![0.0; steps * dim];
    let mut pushes = vec![0.0; steps * dim];
    let mut scratch = Vec::new();
    let mut dw = vec![0.0; n];
    for i in 0..steps {
        driver.fill_step(i, &mut scratch, &mut dw)?;
        let t = i as f64 * dt;
        let u = u_path.at(i);
        for k in 0..dim {
            let x = nodes[k];
            forcing[i * dim + k] = dt * f(t, x, u[k]) + root_n * sigma(t, x, u[k]) * dw[k + 1];
            pushes[i * dim + k] = path.eta.at(i + 1)[k] - path.eta.at(i)[k];
        }
    }

    let mut worst = 0.0_f64;
    for &(t, x) in probes {
        let step = (t / dt).round();
        if step < 0.0 || step as usize > steps || (t - step * dt).abs() > 1e-9 * dt.max(t) {
            return Err(Error::domain(format!("probe time {t} is not on the time grid")));
        }
        let last = step as usize;
        let lifted = lifted_modes(&basis, x)?;
        // P_lk = G^n(t, l/n, k/n) / n, so every lattice term is (1/n) sum_k G_k w_k.
        let apply = |tau: f64, w: &[f64]| -> f64 {
            let cells = cells_from_modes(&basis, &lifted, tau);
            cells[1..].iter().zip(w).map(|(g, w)| g * w).sum::<f64>() / n as f64
        };
        let mut rhs = apply(last as f64 * dt, &path.u0);
        for i in 0..last {
            rhs += apply((last - i) as f64 * dt, &forcing[i * dim..(i + 1) * dim]);
            rhs += apply((last - i - 1) as f64 * dt, &pushes[i * dim..(i + 1) * dim]);
        }
        worst = worst.max((path.u_field.eval(last, x)? - rhs).abs());
    }
    Ok(worst)
}

/// Simulates lattices `n` and `2n` from one sheet and returns the sup gap on
/// the coarse nodes at every 10th step.
pub fn coupled_gap(cfg: &SimulationConfig, sheet: &SheetIncrements, n_pair: (usize, usize)) -> Result<f64> {
    let (coarse, fine) = n_pair;
    let a = simulate_on(cfg, sheet, coarse)?;
    let b = simulate_on(cfg, sheet, fine)?;
    sup_gap_on_coarse(&a, &b)
}

fn simulate_on(cfg: &SimulationConfig, sheet: &SheetIncrements, n: usize) -> Result<SimulatedPath> {
    let cfg = cfg.with_grid(GridSpec::new(n)?);
    let driver = cfg.driver(sheet)?;
    simulate(&cfg, &driver)
}

fn sup_gap_on_coarse(coarse: &SimulatedPath, fine: &SimulatedPath) -> Result<f64> {
    let grid = *coarse.grid();
    let steps = coarse.u_field.steps();
    if fine.u_field.steps() != steps {
        return Err(Error::Dimension { expected: steps, got: fine.u_field.steps() });
    }
    let mut gap = 0.0_f64;
    for i in (0..=steps).step_by(10) {
        for x in grid.interior_nodes() {
            gap = gap.max((coarse.u_field.eval(i, x)? - fine.u_field.eval(i, x)?).abs());
        }
    }
    Ok(gap)
}

/// Monte Carlo `E[gap^p]` for each coupled pair in `pairs`. Path `m` uses the
/// seed `derive_seed(cfg.seed, m)` and one sheet shared by every resolution.
pub fn coupled_gap_study(cfg: &SimulationConfig, pairs: &[(usize, usize)], p: f64, paths: usize) -> Result<Vec<Estimate>> {
    check_monte_carlo(p, paths)?;
    if pairs.is_empty() {
        return Err(Error::config("need at least one resolution pair"));
    }
    let mut resolutions: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    resolutions.sort_unstable();
    resolutions.dedup();
    let n_fine = resolutions.iter().fold(1, |l, &n| lcm(l, n));
    let samples: Vec<Vec<f64>> = (0..paths)
        .into_par_iter()
        .map(|m| -> Result<Vec<f64>> {
            let seeded = cfg.with_seed(derive_seed(cfg.seed, m as u64));
            let sheet = seeded.sheet(n_fine)?;
            let runs: Vec<SimulatedPath> =
                resolutions.iter().map(|&n| simulate_on(&seeded, &sheet, n)).collect::<Result<_>>()?;
            let find = |n: usize| &runs[resolutions.binary_search(&n).unwrap()];
            pairs
                .iter()
                .map(|&(a, b)| Ok(sup_gap_on_coarse(find(a), find(b))?.powf(p)))
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok((0..pairs.len())
        .map(|j| Estimate::from_samples(&samples.iter().map(|row| row[j]).collect::<Vec<_>>()))
        .collect())
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

fn check_monte_carlo(p: f64, paths: usize) -> Result<()> {
    if !(p >= 1.0) {
        return Err(Error::config(format!("moment order must be >= 1, got {p}")));
    }
    if paths < 10 {
        return Err(Error::config(format!("need at least 10 paths, got {paths}")));
    }
    Ok(())
}

/// Monte Carlo estimate of `E[sup_{t,x} |u(t, x)|^p]` over `paths` seeded paths.
pub fn moment_estimate(cfg: &SimulationConfig, p: f64, paths: usize) -> Result<Estimate> {
    check_monte_carlo(p, paths)?;
    let samples: Vec<f64> = (0..paths)
        .into_par_iter()
        .map(|m| {
            let seeded = cfg.with_seed(derive_seed(cfg.seed, m as u64));
            let sheet = seeded.sheet(cfg.grid.n())?;
            let path = simulate(&seeded, &seeded.driver(&sheet)?)?;
            Ok(path.sup_abs().powf(p))
        })
        .collect::<Result<_>>()?;
    Ok(Estimate::from_samples(&samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(name: &str, n: usize, dt: f64, horizon: f64, seed: u64) -> (SimulationConfig, LatticeDriver, SimulatedPath) {
        let cfg = SimulationConfig::preset(name, n, dt, horizon, seed).unwrap();
        let sheet = cfg.sheet(n).unwrap();
        let driver = cfg.driver(&sheet).unwrap();
        let path = simulate(&cfg, &driver).unwrap();
        (cfg, driver, path)
    }

    #[test]
    fn zero_initial_data_stays_zero() {
        let cfg = SimulationConfig::new(
            "zero",
            GridSpec::new(8).unwrap(),
            1e-3,
            0.1,
            Arc::new(|_| 0.0),
            3,
            Coefficients::zero(),
        )
        .unwrap();
        let sheet = cfg.sheet(8).unwrap();
        let driver = cfg.driver(&sheet).unwrap();
        let path = simulate(&cfg, &driver).unwrap();
        assert_eq!(path.sup_abs(), 0.0);
        assert_eq!(path.eta.sup_abs(), 0.0);
        assert_eq!(mild_residual(&path, &driver, &[(0.05, 0.3), (0.1, 0.5)]).unwrap(), 0.0);
        assert_eq!(coupled_gap(&cfg, &cfg.sheet(16).unwrap(), (8, 16)).unwrap(), 0.0);
    }

    #[test]
    fn heat_decay_is_never_reflected() {
        let (_, driver, path) = run("heat_decay", 16, 1e-3, 0.2, 1);
        assert_eq!(path.eta.sup_abs(), 0.0);
        let lambda = SpectralBasis::new(GridSpec::new(16).unwrap()).eigenvalue(1);
        for k in 1..16 {
            let x = k as f64 / 16.0;
            let expected = (lambda * 0.2).exp() * (std::f64::consts::PI * x).sin();
            assert!((path.u_field.eval(200, x).unwrap() - expected).abs() < 1e-12);
        }
        assert!(mild_residual(&path, &driver, &[(0.2, 0.37), (0.1, 0.5)]).unwrap() < 1e-12);
    }

    #[test]
    fn mismatched_driver_rejected() {
        let cfg = SimulationConfig::preset("nualart_pardoux", 8, 1e-3, 0.1, 1).unwrap();
        let sheet = cfg.sheet(16).unwrap();
        let wrong_grid = coarsen_space_time(&sheet, 16, 1).unwrap();
        assert!(matches!(simulate(&cfg, &wrong_grid), Err(Error::Config(_))));
        let wrong_dt = coarsen_space_time(&sheet, 8, 2).unwrap();
        assert!(matches!(simulate(&cfg, &wrong_dt), Err(Error::Config(_))));
    }

    #[test]
    fn nan_coefficients_reported_with_step() {
        let coefficients = Coefficients::new(|t, _, _| if t > 0.0045 { f64::NAN } else { 0.0 }, |_, _, _| 0.0, 0.0, 0.0);
        let cfg = SimulationConfig::new("nan", GridSpec::new(4).unwrap(), 1e-3, 0.01, sine_profile(), 1, coefficients)
            .unwrap();
        let driver = cfg.driver(&cfg.sheet(4).unwrap()).unwrap();
        assert!(matches!(simulate(&cfg, &driver), Err(Error::Numeric { step: 5, .. })));
    }

    #[test]
    fn invalid_initial_data_rejected() {
        let bad = |u0: InitialFn| {
            SimulationConfig::new("bad", GridSpec::new(4).unwrap(), 1e-3, 0.1, u0, 1, Coefficients::zero()).is_err()
        };
        assert!(bad(Arc::new(|x| x)));
        assert!(bad(Arc::new(|x| (2.0 * std::f64::consts::PI * x).sin())));
        assert!(SimulationConfig::preset("nope", 4, 1e-3, 0.1, 1).is_err());
    }

    #[test]
    fn reflected_path_is_nonnegative_and_complementary() {
        let (_, _, path) = run("nualart_pardoux", 16, 1e-3, 0.2, 9);
        assert!(path.min() >= 0.0);
        assert!(path.min_eta_increment() >= 0.0);
        assert!(path.eta.sup_abs() > 0.0);
        assert!(path.complementarity.iter().all(|c| *c == 0.0));
    }

    #[test]
    fn missing_provenance_rejected() {
        let (_, driver, mut path) = run("nualart_pardoux", 4, 1e-3, 0.01, 2);
        path.driver_ref = None;
        assert!(matches!(mild_residual(&path, &driver, &[(0.01, 0.5)]), Err(Error::Precondition(_))));
    }

    #[test]
    fn monte_carlo_needs_enough_paths() {
        let cfg = SimulationConfig::preset("heat_decay", 4, 1e-2, 0.1, 1).unwrap();
        assert!(moment_estimate(&cfg, 2.0, 9).is_err());
        assert!(moment_estimate(&cfg, 0.5, 10).is_err());
        let e = moment_estimate(&cfg, 2.0, 10).unwrap();
        assert!((e.mean - 1.0).abs() < 1e-12 && e.std_error == 0.0);
    }

    #[test]
    fn lipschitz_demo_hypotheses_hold() {
        Coefficients::lipschitz_demo().check_hypotheses(1.0, 20.0, 2000, 5).unwrap();
        Coefficients::additive().check_hypotheses(1.0, 20.0, 100, 5).unwrap();
        let bad = Coefficients::new(|_, _, u| u * u, |_, _, _| 0.0, 1.0, 1.0);
        assert!(bad.check_hypotheses(1.0, 20.0, 100, 5).is_err());
    }
}
