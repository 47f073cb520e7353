//! The two-node reflection problem with barrier V = -t, solved by both backends.
//!
//! The exact solution is Z = t, eta = t + 4 t^2.
//!
//! cargo run --release --example skorohod_closed_form

use reflected_spde::skorohod::{solve, BoundaryPath, SolverConfig};
use reflected_spde::GridSpec;

fn errors(cfg: &SolverConfig, v: &BoundaryPath) -> reflected_spde::Result<(f64, f64)> {
    let sol = solve(v, cfg)?;
    let (mut ez, mut ee) = (0.0_f64, 0.0_f64);
    for i in 0..sol.z.len() {
        let t = sol.z.time(i);
        ez = ez.max((sol.z.at(i)[0] - t).abs());
        ee = ee.max((sol.eta.at(i)[0] - t - 4.0 * t * t).abs());
    }
    Ok((ez, ee))
}

fn main() -> reflected_spde::Result<()> {
    let grid = GridSpec::new(2)?;
    println!("backend     dt        eps       sup|Z-t|   sup|eta-t-4t^2|");
    for dt in [1e-3, 5e-4, 2.5e-4] {
        let v = BoundaryPath::from_fn(grid, dt, (1.0 / dt).round() as usize, |t, _| -t)?;
        let (ez, ee) = errors(&SolverConfig::projected(dt), &v)?;
        println!("projected   {dt:<9.1e} -         {ez:<10.2e} {ee:.2e}");
        for eps in [1e-2, 1e-4] {
            let (ez, ee) = errors(&SolverConfig::penalized(dt, eps), &v)?;
            println!("penalized   {dt:<9.1e} {eps:<9.0e} {ez:<10.2e} {ee:.2e}");
        }
    }
    Ok(())
}
