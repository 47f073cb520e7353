//! Parabolic obstacle problem: self-convergence in n and the weak-form defect.
//!
//! cargo run --release --example obstacle_convergence

use std::f64::consts::PI;

use reflected_spde::obstacle::{convergence_study, holder_modulus, solve, weak_form_residual, ObstacleInstance};
use reflected_spde::skorohod::SolverConfig;
use reflected_spde::GridSpec;

fn main() -> reflected_spde::Result<()> {
    let inst = ObstacleInstance::sign_change();
    let cfg = SolverConfig::projected(1e-4);

    let table = convergence_study(&inst, &[4, 8, 16, 32, 64, 128], &cfg)?;
    println!("{}: sup gap against n = {}", inst.name(), table.reference_n);
    for (n, gap) in &table.rows {
        println!("  n = {n:<4} {gap:.3e}");
    }
    println!("  strictly decreasing: {}", table.monotone);

    let sol = solve(&inst, GridSpec::new(32)?, &cfg)?;
    let weak = weak_form_residual(&sol, |x| (PI * x).sin())?;
    let worst = weak.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
    println!();
    println!("n = 32: weak-form defect against sin(pi x): {worst:.2e}");
    println!("        complementarity residual:           {:.2e}", sol.complementarity_residual);
    println!("        fitted Hoelder constant:            {:.3}", holder_modulus(&sol, 2000, 1)?);

    // eta mass per node over the second half of the run
    let hist = sol.eta_histogram(2)?;
    let mass: f64 = hist.iter().map(|row| row[1]).sum();
    println!("        eta mass on [1/2, 1]:               {mass:.4}");

    let rough = ObstacleInstance::zigzag();
    println!();
    println!("{} (continuous only): mollified approximations", rough.name());
    let base = solve(&rough, GridSpec::new(32)?, &SolverConfig::projected(1e-3))?;
    for m in [4, 8, 16, 32] {
        let smooth = rough.mollify(m)?;
        let s = solve(&smooth, GridSpec::new(32)?, &SolverConfig::projected(1e-3))?;
        println!(
            "  m = {m:<3} sup|V - V_m| = {:.3e}   sup|Z - Z_m| = {:.3e}",
            rough.sup_distance(&smooth, 100),
            base.z_field.path().sup_gap(s.z_field.path())?
        );
    }
    Ok(())
}
