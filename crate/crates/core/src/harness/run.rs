//! Executes a configured experiment and writes `results.csv` and `manifest.json`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Kind};
use super::suite::run_suite;
use super::table::{ResultTable, Tolerance};
use crate::error::{Error, Result};
use crate::lattice::GridSpec;
use crate::obstacle::convergence_study;
use crate::spde::{coupled_gap_study, moment_estimate};

/// Environment variable that, when set, prefixes relative output directories.
pub const OUTPUT_ROOT_VAR: &str = "RSPDE_OUTPUT_ROOT";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_ASSERTION: i32 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    pub version: String,
    pub seed: Option<u64>,
    pub wall_time_s: f64,
    pub tolerance: Tolerance,
    pub columns: Vec<String>,
    /// Failed properties, each with its statement.
    pub violations: Vec<String>,
}

impl Manifest {
    pub fn read(dir: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(dir.join("manifest.json"))
            .map_err(|e| Error::Schema(format!("{}: no readable manifest.json ({e})", dir.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Schema(format!("{}: {e}", dir.display())))
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub output_dir: PathBuf,
    pub table: ResultTable,
    pub violations: Vec<String>,
}

/// Loads the config at `path` and runs it. Relative output directories are
/// placed under `$RSPDE_OUTPUT_ROOT` when set, else under the working directory.
pub fn run(config_path: &Path) -> Result<RunOutcome> {
    let cfg = ExperimentConfig::from_path(config_path)?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    let root = std::env::var_os(OUTPUT_ROOT_VAR).map(PathBuf::from);
    run_config(&cfg, base, root.as_deref())
}

/// Runs an already parsed config; `base` resolves tabulated obstacle files.
pub fn run_config(cfg: &ExperimentConfig, base: &Path, root: Option<&Path>) -> Result<RunOutcome> {
    cfg.validate()?;
    let output_dir = match root {
        Some(r) if cfg.output_dir.is_relative() => r.join(&cfg.output_dir),
        _ => cfg.output_dir.clone(),
    };
    let start = Instant::now();
    let (table, violations) = match cfg.kind {
        Kind::PropertySuite => property_suite(cfg)?,
        Kind::ObstacleConvergence => (obstacle_convergence(cfg, base)?, Vec::new()),
        Kind::SpdeConvergence => (spde_convergence(cfg)?, Vec::new()),
        Kind::MomentStudy => (moment_study(cfg)?, Vec::new()),
    };
    let manifest = Manifest {
        config: cfg.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        wall_time_s: start.elapsed().as_secs_f64(),
        tolerance: Tolerance::default(),
        columns: table.columns.clone(),
        violations: violations.clone(),
    };
    std::fs::create_dir_all(&output_dir)?;
    std::fs::write(output_dir.join("results.csv"), table.to_csv()?)?;
    std::fs::write(output_dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    let exit_code = if violations.is_empty() { EXIT_OK } else { EXIT_ASSERTION };
    Ok(RunOutcome { exit_code, output_dir, table, violations })
}

fn property_suite(cfg: &ExperimentConfig) -> Result<(ResultTable, Vec<String>)> {
    let mut table = ResultTable::new(&["property", "n", "trials", "violations", "worst_excess", "seed"]);
    let seed = cfg.seed.unwrap_or(0);
    let trials = cfg.trials.unwrap_or(10_000);
    let mut violations = Vec::new();
    for &n in &cfg.n_list {
        for r in run_suite(GridSpec::new(n)?, trials, cfg.dt, seed)? {
            if !r.passed() {
                violations.push(format!(
                    "{} violated at n={}: {} ({} of {} trials)",
                    r.property, r.n, r.statement, r.violations, r.trials
                ));
            }
            table.push(vec![
                r.property.into(),
                n.into(),
                r.trials.into(),
                r.violations.into(),
                r.worst_excess.into(),
                seed.into(),
            ])?;
        }
    }
    Ok((table, violations))
}

fn obstacle_convergence(cfg: &ExperimentConfig, base: &Path) -> Result<ResultTable> {
    let inst = cfg.obstacle_instance(base)?;
    let study = convergence_study(&inst, &cfg.n_list, &cfg.solver())?;
    let mut table = ResultTable::new(&["obstacle", "n", "reference_n", "dt", "gap", "monotone"]);
    for &(n, gap) in &study.rows {
        table.push(vec![
            inst.name().into(),
            n.into(),
            study.reference_n.into(),
            cfg.dt.into(),
            gap.into(),
            study.monotone.into(),
        ])?;
    }
    Ok(table)
}

fn spde_convergence(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let sim = cfg.simulation()?;
    let pairs: Vec<(usize, usize)> = cfg.n_list.windows(2).map(|w| (w[0], w[1])).collect();
    let paths = cfg.paths.unwrap_or(100);
    let estimates = coupled_gap_study(&sim, &pairs, cfg.p, paths)?;
    let mut table = ResultTable::new(&[
        "preset", "n", "n_coupled", "dt", "T", "p", "paths", "mean_gap_p", "std_error", "ci_low", "ci_high", "seed",
    ]);
    for (&(a, b), e) in pairs.iter().zip(&estimates) {
        table.push(vec![
            sim.label.as_str().into(),
            a.into(),
            b.into(),
            sim.dt.into(),
            sim.horizon.into(),
            cfg.p.into(),
            paths.into(),
            e.mean.into(),
            e.std_error.into(),
            e.ci_low.into(),
            e.ci_high.into(),
            sim.seed.into(),
        ])?;
    }
    Ok(table)
}

fn moment_study(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let sim = cfg.simulation()?;
    let paths = cfg.paths.unwrap_or(100);
    let mut table = ResultTable::new(&[
        "preset", "n", "dt", "T", "p", "paths", "mean_sup_p", "std_error", "ci_low", "ci_high", "seed",
    ]);
    for &n in &cfg.n_list {
        let e = moment_estimate(&sim.with_grid(GridSpec::new(n)?), cfg.p, paths)?;
        table.push(vec![
            sim.label.as_str().into(),
            n.into(),
            sim.dt.into(),
            sim.horizon.into(),
            cfg.p.into(),
            paths.into(),
            e.mean.into(),
            e.std_error.into(),
            e.ci_low.into(),
            e.ci_high.into(),
            sim.seed.into(),
        ])?;
    }
    Ok(table)
}
