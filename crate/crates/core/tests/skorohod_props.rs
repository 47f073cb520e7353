//! Lattice reflection problem: closed forms, backend agreement and invariants.

use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reflected_spde::harness::suite::random_boundary;
use reflected_spde::skorohod::{
    comparison_gap, complementarity_residual, orthant_pairings, solve, BoundaryPath, SkorohodSolution,
    SolverConfig,
};
use reflected_spde::{DiscreteLaplacian, Error, GridSpec};

fn grid(n: usize) -> GridSpec {
    GridSpec::new(n).unwrap()
}

fn ramp(dt: f64) -> BoundaryPath {
    let steps = (1.0 / dt).round() as usize;
    BoundaryPath::from_fn(grid(2), dt, steps, |t, _| -t).unwrap()
}

/// `(sup |Z - t|, sup |eta - t - 4 t^2|)` on the nodes.
fn ramp_errors(sol: &SkorohodSolution) -> (f64, f64) {
    let mut ez = 0.0_f64;
    let mut ee = 0.0_f64;
    for i in 0..sol.z.len() {
        let t = sol.z.time(i);
        ez = ez.max((sol.z.at(i)[0] - t).abs());
        ee = ee.max((sol.eta.at(i)[0] - t - 4.0 * t * t).abs());
    }
    (ez, ee)
}

#[test]
fn ramp_closed_form() {
    let dt = 1e-4;
    let v = ramp(dt);
    let sol = solve(&v, &SolverConfig::projected(dt)).unwrap();
    let (ez, ee) = ramp_errors(&sol);
    assert!(ez <= 10.0 * dt, "{ez}");
    assert!(ee <= 20.0 * dt, "{ee}");
    // the integrand (Z + V) vanishes on the closed form; the scheme leaves O(dt)
    assert!(sol.complementarity_residual.abs() <= 10.0 * dt * (1.0 + v.sup_abs()));
}

#[test]
fn penalized_ramp_improves_as_epsilon_shrinks() {
    let dt = 1e-4;
    let v = ramp(dt);
    let errors: Vec<f64> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&eps| ramp_errors(&solve(&v, &SolverConfig::penalized(dt, eps)).unwrap()).0)
        .collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
}

#[test]
fn penalized_constant_barrier_never_triggers() {
    let v = BoundaryPath::from_fn(grid(7), 1e-3, 100, |_, _| 1.0).unwrap();
    for eps in [1e-2, 1e-4] {
        let sol = solve(&v, &SolverConfig::penalized(1e-3, eps)).unwrap();
        assert_eq!(sol.z.sup_abs(), 0.0);
        assert_eq!(sol.eta.sup_abs(), 0.0);
    }
}

fn smooth_barrier(n: usize, dt: f64) -> BoundaryPath {
    let g = grid(n);
    BoundaryPath::from_fn(g, dt, (0.6 / dt).round() as usize, |t, k| {
        let x = g.node(k);
        (1.0 - 3.0 * t) * (PI * x).sin() + 0.2 * t * (3.0 * PI * x).sin()
    })
    .unwrap()
}

#[test]
fn backends_agree_for_small_epsilon() {
    let dt = 1e-4;
    let eps = 1e-5;
    for n in [4, 8, 16] {
        let v = smooth_barrier(n, dt);
        let a = solve(&v, &SolverConfig::projected(dt)).unwrap();
        let b = solve(&v, &SolverConfig::penalized(dt, eps)).unwrap();
        let gap = a.z.sup_gap(&b.z).unwrap();
        assert!(gap <= 10.0 * (dt + eps), "n={n} gap={gap}");
    }
}

#[test]
fn eta_rate_energy_bounded_as_epsilon_shrinks() {
    let dt = 1e-4;
    let v = smooth_barrier(8, dt);
    let reference = solve(&v, &SolverConfig::projected(dt)).unwrap().eta_rate_energy();
    for eps in [1e-2, 1e-3, 1e-4, 1e-5] {
        let e = solve(&v, &SolverConfig::penalized(dt, eps)).unwrap().eta_rate_energy();
        assert!(e.is_finite() && e <= 2.0 * reference, "eps={eps}: {e} vs {reference}");
    }
}

#[test]
fn constant_shift_of_barrier() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let g = grid(6);
    let v1 = random_boundary(g, 1e-3, 300, &mut rng).unwrap();
    let c = 0.25;
    let v2 = BoundaryPath::new(
        g,
        reflected_spde::SampledPath::from_rows(
            5,
            1e-3,
            v1.samples().as_flat().iter().map(|x| x + c).collect(),
        )
        .unwrap(),
    )
    .unwrap();
    let cfg = SolverConfig::projected(1e-3);
    let (a, b) = (solve(&v1, &cfg).unwrap(), solve(&v2, &cfg).unwrap());
    let (lhs, rhs) = comparison_gap(&a, &b, &v1, &v2).unwrap();
    assert!(lhs <= c + 1e-12);
    assert!((rhs - c).abs() < 1e-12);
}

#[test]
fn comparison_margin_at_two_steps() {
    for dt in [1e-3_f64, 1e-4] {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..10 {
            let steps = (0.2 / dt).round() as usize;
            let v1 = random_boundary(grid(8), dt, steps, &mut rng).unwrap();
            let v2 = random_boundary(grid(8), dt, steps, &mut rng).unwrap();
            let cfg = SolverConfig::projected(dt);
            let (lhs, rhs) =
                comparison_gap(&solve(&v1, &cfg).unwrap(), &solve(&v2, &cfg).unwrap(), &v1, &v2).unwrap();
            worst = worst.max(lhs - rhs);
        }
        assert!(worst <= 1e-12, "dt={dt}: {worst}");
    }
}

#[test]
fn grid_mismatch_is_dimension_error() {
    let v4 = BoundaryPath::from_fn(grid(4), 1e-2, 10, |_, _| 1.0).unwrap();
    let v5 = BoundaryPath::from_fn(grid(5), 1e-2, 10, |_, _| 1.0).unwrap();
    let cfg = SolverConfig::projected(1e-2);
    let (a, b) = (solve(&v4, &cfg).unwrap(), solve(&v5, &cfg).unwrap());
    assert!(matches!(comparison_gap(&a, &b, &v4, &v5), Err(Error::Dimension { .. })));
    assert!(matches!(complementarity_residual(&a, &v5), Err(Error::Dimension { .. })));
}

#[test]
fn finer_solver_step_on_coarse_samples() {
    let v = smooth_barrier(8, 1e-3);
    let coarse = solve(&v, &SolverConfig::projected(1e-3)).unwrap();
    let fine = solve(&v, &SolverConfig::projected(2.5e-4)).unwrap();
    assert_eq!(fine.z.steps(), 4 * coarse.z.steps());
    let mut gap = 0.0_f64;
    for i in 0..coarse.z.len() {
        for (a, b) in coarse.z.at(i).iter().zip(fine.z.at(4 * i)) {
            gap = gap.max((a - b).abs());
        }
    }
    assert!(gap < 1e-2, "{gap}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn orthant_pairings_have_fixed_signs(b in prop::collection::vec(-10.0..10.0f64, 1..64)) {
        let lap = DiscreteLaplacian::new(grid(b.len() + 1));
        let (plus, minus) = orthant_pairings(&lap, &b).unwrap();
        prop_assert!(plus <= 1e-12);
        prop_assert!(minus >= -1e-12);
    }

    #[test]
    fn projected_solution_invariants(n in 2usize..12, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dt = 1e-3;
        let v = random_boundary(grid(n), dt, 200, &mut rng).unwrap();
        let cfg = SolverConfig::projected(dt);
        let sol = solve(&v, &cfg).unwrap();
        prop_assert!(sol.min_eta_increment() >= 0.0);
        prop_assert!(sol.constraint_margin(&v).unwrap() >= -1e-12);
        prop_assert!(sol.complementarity_residual.abs() <= cfg.tolerance_for(&v));
        prop_assert!(sol.z.at(0).iter().all(|z| *z == 0.0));
    }

    #[test]
    fn comparison_holds_for_random_pairs(n in 2usize..10, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dt = 1e-3;
        let v1 = random_boundary(grid(n), dt, 150, &mut rng).unwrap();
        let v2 = random_boundary(grid(n), dt, 150, &mut rng).unwrap();
        let cfg = SolverConfig::projected(dt);
        let (lhs, rhs) = comparison_gap(&solve(&v1, &cfg).unwrap(), &solve(&v2, &cfg).unwrap(), &v1, &v2).unwrap();
        prop_assert!(lhs <= rhs + 5.0 * dt.sqrt() * (1.0 + v1.sup_abs().max(v2.sup_abs())));
    }
}
