//! JSON-configured experiments: property suites, obstacle and SPDE
//! convergence studies and moment studies, each producing `results.csv` and
//! `manifest.json` in its output directory.

pub mod compare;
pub mod config;
pub mod run;
pub mod suite;
pub mod table;

pub use compare::{compare_runs, CompareReport};
pub use config::{list_presets, ExperimentConfig, Kind, ObstacleSource};
pub use run::{run, run_config, Manifest, RunOutcome};
pub use table::{Cell, ResultTable, Tolerance};
