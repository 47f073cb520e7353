//! Reflected lattice SPDE: invariants, decomposition, mild form and Monte Carlo.

use std::f64::consts::PI;
use std::sync::Arc;

use reflected_spde::noise::read_dump;
use reflected_spde::skorohod::{self, BoundaryPath, SolverConfig};
use reflected_spde::spde::{
    coupled_gap, coupled_gap_study, mild_residual, moment_estimate, simulate, Coefficients, SimulatedPath,
    SimulationConfig, PRESETS,
};
use reflected_spde::{Error, GridSpec};

fn run(cfg: &SimulationConfig) -> SimulatedPath {
    let sheet = cfg.sheet(cfg.grid.n()).unwrap();
    simulate(cfg, &cfg.driver(&sheet).unwrap()).unwrap()
}

#[test]
fn decomposition_matches_skorohod_solver() {
    for name in ["nualart_pardoux", "lipschitz_demo"] {
        let cfg = SimulationConfig::preset(name, 16, 1e-3, 0.2, 31).unwrap();
        let path = run(&cfg);
        let v = path.v_field.as_ref().unwrap();
        let barrier = BoundaryPath::new(cfg.grid, v.path().clone()).unwrap();
        let z = skorohod::solve(&barrier, &SolverConfig::projected(cfg.dt)).unwrap();
        let mut gap = 0.0_f64;
        for i in 0..=cfg.steps() {
            for ((u, v), z) in path.u_field.path().at(i).iter().zip(v.path().at(i)).zip(z.z.at(i)) {
                gap = gap.max((u - v - z).abs());
            }
        }
        assert!(gap <= 1e-10, "{name}: {gap}");
        assert!(z.eta.sup_gap(&path.eta).unwrap() <= 1e-10);
    }
}

#[test]
fn reflected_path_invariants_and_envelope() {
    let dt = 1e-4;
    for seed in 0..5 {
        let cfg = SimulationConfig::preset("nualart_pardoux", 16, dt, 0.05, seed).unwrap();
        let path = run(&cfg);
        assert!(path.min() >= 0.0);
        assert!(path.min_eta_increment() >= 0.0);
        let bound = 10.0 * dt * (1.0 + path.sup_abs());
        assert!(path.complementarity.iter().all(|c| c.abs() <= bound));
        let sup_v = path.v_field.as_ref().unwrap().sup_abs();
        assert!(path.sup_abs() <= 2.0 * sup_v + 1e-8);
        // the free field does go negative, so the reflection is exercised
        assert!(path.v_field.as_ref().unwrap().path().min() < 0.0);
        assert!(path.eta.sup_abs() > 0.0);
    }
}

#[test]
fn mild_residual_halves_with_dt() {
    // one sheet at the finest step; coarser runs merge its steps
    let base = SimulationConfig::preset("nualart_pardoux", 8, 5e-5, 0.05, 8).unwrap();
    let sheet = base.sheet(8).unwrap();
    let probes: Vec<(f64, f64)> = [0.01, 0.03, 0.05]
        .iter()
        .flat_map(|&t| [0.25, 0.5, 0.6].map(|x| (t, x)))
        .collect();
    let residuals: Vec<f64> = [2e-4, 1e-4, 5e-5]
        .iter()
        .map(|&dt| {
            let cfg = base.with_dt(dt).unwrap();
            let drv = cfg.driver(&sheet).unwrap();
            mild_residual(&simulate(&cfg, &drv).unwrap(), &drv, &probes).unwrap()
        })
        .collect();
    for w in residuals.windows(2) {
        assert!(w[1] < w[0], "{residuals:?}");
    }
    assert!(residuals[2] < 0.5 * residuals[0]);
}

#[test]
fn mild_residual_is_exact_without_noise_or_reflection() {
    let cfg = SimulationConfig::preset("heat_decay", 8, 1e-3, 0.1, 0).unwrap();
    let sheet = cfg.sheet(8).unwrap();
    let drv = cfg.driver(&sheet).unwrap();
    let path = simulate(&cfg, &drv).unwrap();
    let r = mild_residual(&path, &drv, &[(0.05, 0.3), (0.1, 0.5)]).unwrap();
    assert!(r < 1e-12, "{r}");
}

#[test]
fn mild_residual_checks_provenance() {
    let cfg = SimulationConfig::preset("nualart_pardoux", 8, 1e-3, 0.1, 1).unwrap();
    let path = run(&cfg);
    let other = cfg.with_seed(2);
    let wrong = other.driver(&other.sheet(8).unwrap()).unwrap();
    assert!(matches!(mild_residual(&path, &wrong, &[(0.1, 0.5)]), Err(Error::Precondition(_))));
    let right = cfg.driver(&cfg.sheet(8).unwrap()).unwrap();
    assert!(matches!(mild_residual(&path, &right, &[(0.1005, 0.5)]), Err(Error::Domain(_))));
}

#[test]
fn heat_decay_matches_continuum() {
    let cfg = SimulationConfig::preset("heat_decay", 32, 1e-4, 0.5, 0).unwrap();
    let path = run(&cfg);
    let mut err = 0.0_f64;
    for i in (0..=cfg.steps()).step_by(50) {
        let t = i as f64 * cfg.dt;
        for (k, u) in path.u_field.path().at(i).iter().enumerate() {
            let x = cfg.grid.node(k + 1);
            err = err.max((u - (-PI * PI * t).exp() * (PI * x).sin()).abs());
        }
    }
    assert!(err <= 0.02, "{err}");
    assert_eq!(path.eta.sup_abs(), 0.0);
}

#[test]
fn heat_coupled_gap_shrinks() {
    let cfg = SimulationConfig::preset("heat_decay", 4, 1e-3, 0.2, 0).unwrap();
    let sheet = cfg.sheet(32).unwrap();
    let gaps: Vec<f64> = [(4, 8), (8, 16), (16, 32)]
        .iter()
        .map(|&pair| coupled_gap(&cfg, &sheet, pair).unwrap())
        .collect();
    // eigenvalue error ~ 1/n^2: quartering per doubling
    for w in gaps.windows(2) {
        let r = w[1] / w[0];
        assert!((0.15..0.35).contains(&r), "{gaps:?}");
    }
}

#[test]
fn simulation_is_deterministic() {
    let cfg = SimulationConfig::preset("lipschitz_demo", 16, 1e-3, 0.1, 77).unwrap();
    let (a, b) = (run(&cfg), run(&cfg));
    assert_eq!(a.u_field.path().as_flat(), b.u_field.path().as_flat());
    assert_eq!(a.eta.as_flat(), b.eta.as_flat());
    let c = run(&cfg.with_seed(78));
    assert_ne!(a.u_field.path().as_flat(), c.u_field.path().as_flat());
}

#[test]
fn export_round_trip() {
    let cfg = SimulationConfig::preset("nualart_pardoux", 8, 1e-3, 0.02, 12).unwrap();
    let path = run(&cfg);
    let dir = tempfile::tempdir().unwrap();
    path.export(&cfg, dir.path()).unwrap();
    let bytes = std::fs::read(dir.path().join("u.bin")).unwrap();
    let (header, values) = read_dump(bytes.as_slice()).unwrap();
    assert_eq!(header.width, 7);
    assert_eq!(header.steps, 21);
    assert_eq!(header.seed, 12);
    assert_eq!(values, path.u_field.path().as_flat());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 12);
    assert_eq!(manifest["config"]["n"], 8);
}

#[test]
fn moment_estimates() {
    let heat = SimulationConfig::preset("heat_decay", 8, 1e-3, 0.1, 4).unwrap();
    let est = moment_estimate(&heat, 2.0, 10).unwrap();
    // deterministic: sup|u| = u0 at the middle node
    assert!((est.mean - 1.0).abs() < 1e-12);
    assert_eq!(est.std_error, 0.0);
    let noisy = SimulationConfig::preset("nualart_pardoux", 8, 1e-3, 0.1, 4).unwrap();
    let est = moment_estimate(&noisy, 2.0, 20).unwrap();
    assert!(est.mean > 1.0 && est.ci_low < est.mean && est.mean < est.ci_high);
    assert!(moment_estimate(&noisy, 2.0, 9).is_err());
    assert!(moment_estimate(&noisy, 0.5, 20).is_err());
}

#[test]
fn gap_study_is_ordered_and_reproducible() {
    let cfg = SimulationConfig::preset("nualart_pardoux", 4, 1e-3, 0.05, 6).unwrap();
    let a = coupled_gap_study(&cfg, &[(4, 8), (8, 16)], 2.0, 12).unwrap();
    let b = coupled_gap_study(&cfg, &[(4, 8), (8, 16)], 2.0, 12).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 2);
    assert!(a.iter().all(|e| e.samples == 12 && e.mean > 0.0));
    assert!(coupled_gap_study(&cfg, &[], 2.0, 12).is_err());
}

#[test]
fn presets_satisfy_hypotheses() {
    for name in PRESETS {
        let cfg = SimulationConfig::preset(name, 8, 1e-3, 0.1, 0).unwrap();
        cfg.coefficients.check_hypotheses(0.1, 50.0, 5000, 1).unwrap();
    }
    let quadratic = Coefficients::new(|_, _, u| u * u, |_, _, _| 1.0, 1.0, 1.0);
    assert!(matches!(quadratic.check_hypotheses(1.0, 10.0, 1000, 0), Err(Error::Precondition(_))));
}

#[test]
fn invalid_configurations() {
    assert!(SimulationConfig::preset("nope", 8, 1e-3, 0.1, 0).is_err());
    assert!(SimulationConfig::preset("heat_decay", 8, 3e-2, 0.1, 0).is_err());
    let negative = SimulationConfig::new(
        "neg",
        GridSpec::new(8).unwrap(),
        1e-3,
        0.1,
        Arc::new(|x: f64| -(PI * x).sin()),
        0,
        Coefficients::zero(),
    );
    assert!(negative.is_err());
    let cfg = SimulationConfig::preset("heat_decay", 8, 1e-3, 0.1, 0).unwrap();
    let wrong_n = cfg.with_grid(GridSpec::new(4).unwrap());
    let drv = cfg.driver(&cfg.sheet(8).unwrap()).unwrap();
    assert!(simulate(&wrong_n, &drv).is_err());
}
