//! Obstacle problem: weak form, contraction, smoothing chain and convergence.

use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reflected_spde::obstacle::{
    convergence_study, convergence_study_on, discretize, holder_modulus, solve, weak_form_residual,
    ObstacleInstance, SampleGrid, Smoothness, TabulatedObstacle,
};
use reflected_spde::skorohod::SolverConfig;
use reflected_spde::GridSpec;

fn grid(n: usize) -> GridSpec {
    GridSpec::new(n).unwrap()
}

fn sup_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

#[test]
fn discretize_examples() {
    let p = discretize(&ObstacleInstance::positive(), grid(8), 0.01).unwrap();
    for i in 0..p.samples().len() {
        for (k, v) in p.samples().at(i).iter().enumerate() {
            assert_eq!(*v, (PI * (k + 1) as f64 / 8.0).sin());
        }
    }
    assert!(discretize(&ObstacleInstance::positive(), grid(8), 0.3).is_err());
}

#[test]
fn weak_form_residual_is_order_dt() {
    let dt = 1e-4;
    let inst = ObstacleInstance::sign_change();
    let sol = solve(&inst, grid(16), &SolverConfig::projected(dt)).unwrap();
    let scale = 1.0 + sol.boundary.sup_abs();
    let r1 = weak_form_residual(&sol, |x| (PI * x).sin()).unwrap();
    assert!(sup_abs(&r1) <= 10.0 * dt * scale, "{}", sup_abs(&r1));
    let r2 = weak_form_residual(&sol, |x| 2.0 * (PI * x).sin()).unwrap();
    for (a, b) in r1.iter().zip(&r2) {
        assert!((2.0 * a - b).abs() < 1e-14);
    }
    // halving dt halves the defect
    let coarse = solve(&inst, grid(16), &SolverConfig::projected(2.0 * dt)).unwrap();
    let rc = sup_abs(&weak_form_residual(&coarse, |x| (PI * x).sin()).unwrap());
    let ratio = sup_abs(&r1) / rc;
    assert!((0.3..0.7).contains(&ratio), "{ratio}");
}

#[test]
fn sign_change_reflects_only_after_half_time() {
    let dt = 1e-3;
    let sol = solve(&ObstacleInstance::sign_change(), grid(16), &SolverConfig::projected(dt)).unwrap();
    let half = (0.5 / dt).round() as usize;
    assert_eq!(sol.eta.at(half).iter().cloned().fold(0.0, f64::max), 0.0);
    assert!(sol.eta.at(sol.eta.steps()).iter().all(|e| *e > 0.0));
    assert!(sol.constraint_margin() >= -1e-12);
    assert!(sol.complementarity_residual.abs() <= SolverConfig::projected(dt).tolerance_for(&sol.boundary));
    // boundary values and initial profile
    for i in [0, half, sol.z_field.steps()] {
        assert_eq!(sol.z_field.eval(i, 0.0).unwrap(), 0.0);
        assert_eq!(sol.z_field.eval(i, 1.0).unwrap(), 0.0);
    }
    assert_eq!(sol.z_field.path().at(0).iter().cloned().fold(0.0, f64::max), 0.0);
}

#[test]
fn eta_histogram_conserves_mass() {
    let sol = solve(&ObstacleInstance::sign_change(), grid(8), &SolverConfig::projected(1e-3)).unwrap();
    let hist = sol.eta_histogram(10).unwrap();
    let total: f64 = hist.iter().flatten().sum();
    let expected: f64 = sol.eta.at(sol.eta.steps()).iter().sum::<f64>() / 8.0;
    assert!((total - expected).abs() < 1e-12);
    // nothing before t = 1/2
    assert!(hist.iter().all(|row| row[..5].iter().all(|m| *m == 0.0)));
    assert!(sol.eta_histogram(0).is_err());
}

fn random_obstacle(rng: &mut ChaCha8Rng) -> ObstacleInstance {
    let a: f64 = 0.5 + rng.random::<f64>();
    let b: f64 = 3.0 * rng.random::<f64>();
    let c: f64 = rng.random::<f64>() - 0.5;
    let w: f64 = 10.0 * rng.random::<f64>();
    ObstacleInstance::new("random", 0.3, Smoothness::C12, move |t, x| {
        a * (1.0 - b * t) * (PI * x).sin() + c * (2.0 * PI * x).sin() * (w * t).sin()
    })
    .unwrap()
}

#[test]
fn contraction_in_obstacle_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let dt = 1e-3;
    let cfg = SolverConfig::projected(dt);
    for _ in 0..50 {
        let (i1, i2) = (random_obstacle(&mut rng), random_obstacle(&mut rng));
        let (s1, s2) = (solve(&i1, grid(8), &cfg).unwrap(), solve(&i2, grid(8), &cfg).unwrap());
        let gap_z = s1.z_field.path().sup_gap(s2.z_field.path()).unwrap();
        let gap_v = i1.sup_distance(&i2, 300);
        assert!(gap_z <= gap_v + 5.0 * dt.sqrt(), "{gap_z} > {gap_v}");
    }
}

#[test]
fn smooth_obstacle_density_is_stable_under_halving() {
    let inst = ObstacleInstance::sign_change();
    let energies: Vec<f64> = [4e-4, 2e-4, 1e-4]
        .iter()
        .map(|&dt| solve(&inst, grid(16), &SolverConfig::projected(dt)).unwrap().eta_density_l2())
        .collect();
    for w in energies.windows(2) {
        let r = w[1] / w[0];
        assert!((0.8..1.25).contains(&r), "{energies:?}");
    }
}

#[test]
fn mollified_obstacles_approach_the_continuous_one() {
    let dt = 1e-3;
    let cfg = SolverConfig::projected(dt);
    let rough = ObstacleInstance::zigzag();
    assert_eq!(rough.smoothness(), Smoothness::C0);
    let base = solve(&rough, grid(32), &cfg).unwrap();
    let mut last = f64::INFINITY;
    for m in [4, 8, 16, 32] {
        let smooth = rough.mollify(m).unwrap();
        assert_eq!(smooth.smoothness(), Smoothness::C12);
        let sol = solve(&smooth, grid(32), &cfg).unwrap();
        let gap_z = base.z_field.path().sup_gap(sol.z_field.path()).unwrap();
        let gap_v = rough.sup_distance(&smooth, 100);
        // |Z - Z_m| <= |V - V_m|, and the right side shrinks with m
        assert!(gap_z <= gap_v + 1e-12, "m={m}: {gap_z} > {gap_v}");
        // kinks of slope 3.6 give an O(1/m) mollification error
        assert!(gap_v < 0.6 * last, "m={m}: {gap_v} vs {last}");
        last = gap_v;
    }
}

#[test]
fn holder_constants_uniform_in_n() {
    let inst = ObstacleInstance::sign_change();
    let fitted: Vec<f64> = [8, 16, 32, 64]
        .iter()
        .map(|&n| {
            let sol = solve(&inst, grid(n), &SolverConfig::projected(1e-3)).unwrap();
            holder_modulus(&sol, 2000, 9).unwrap()
        })
        .collect();
    let lo = fitted.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = fitted.iter().cloned().fold(0.0, f64::max);
    assert!(lo > 0.0 && hi <= 4.0 * lo, "{fitted:?}");
}

#[test]
fn positive_obstacle_convergence_is_trivial() {
    let table = convergence_study(&ObstacleInstance::positive(), &[4, 8, 16], &SolverConfig::projected(1e-3)).unwrap();
    assert!(table.rows.iter().all(|(_, g)| *g <= 1e-12));
    assert_eq!(table.reference_n, 16);
}

#[test]
fn coarse_node_grid_is_blind_for_sign_change() {
    let cfg = SolverConfig::projected(1e-3);
    let inst = ObstacleInstance::sign_change();
    let coarse = convergence_study_on(&inst, &[4, 8, 16, 32], &cfg, SampleGrid::CoarseNodes).unwrap();
    assert!(coarse.rows.iter().all(|(_, g)| *g < 1e-12));
    let fine = convergence_study_on(&inst, &[4, 8, 16, 32], &cfg, SampleGrid::ReferenceNodes).unwrap();
    assert!(fine.monotone);
}

#[test]
fn tabulated_obstacle_matches_preset_on_its_grid() {
    let times: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let xs: Vec<f64> = (0..=8).map(|k| k as f64 / 8.0).collect();
    let preset = ObstacleInstance::sign_change();
    let values = times.iter().flat_map(|&t| xs.iter().map(move |&x| (t, x))).map(|(t, x)| preset.value(t, x)).collect();
    let table = TabulatedObstacle { times, xs, values };
    let json = serde_json::to_string(&table).unwrap();
    let inst = ObstacleInstance::from_table("tab", serde_json::from_str(&json).unwrap()).unwrap();
    let cfg = SolverConfig::projected(0.01);
    let a = solve(&inst, grid(8), &cfg).unwrap();
    let b = solve(&preset, grid(8), &cfg).unwrap();
    // node values agree at t = k/10; in between the table is linear in t, as is the preset
    assert!(a.z_field.path().sup_gap(b.z_field.path()).unwrap() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn solutions_respect_the_obstacle(seed in any::<u64>(), n in 2usize..24) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_obstacle(&mut rng);
        let cfg = SolverConfig::projected(1e-3);
        let sol = solve(&inst, grid(n), &cfg).unwrap();
        prop_assert!(sol.constraint_margin() >= -1e-12);
        prop_assert!(sol.complementarity_residual.abs() <= cfg.tolerance_for(&sol.boundary));
        for i in 0..sol.eta.steps() {
            for (a, b) in sol.eta.at(i).iter().zip(sol.eta.at(i + 1)) {
                prop_assert!(b >= a);
            }
        }
    }
}
