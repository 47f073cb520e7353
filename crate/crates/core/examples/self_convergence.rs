//! Coupled-grid Monte Carlo: E sup|u^n - u^2n|^2 and moments of sup|u^n|.
//!
//! cargo run --release --example self_convergence [paths]

use reflected_spde::spde::{coupled_gap_study, moment_estimate, SimulationConfig};

fn main() -> reflected_spde::Result<()> {
    let paths = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let pairs = [(4, 8), (8, 16), (16, 32)];
    for preset in ["nualart_pardoux", "lipschitz_demo"] {
        let cfg = SimulationConfig::preset(preset, 4, 1e-4, 0.25, 42)?;
        println!("{preset}, M = {paths}");
        for (pair, e) in pairs.iter().zip(coupled_gap_study(&cfg, &pairs, 2.0, paths)?) {
            println!("  {:>2} vs {:<2} mean {:.4e}  95% CI [{:.4e}, {:.4e}]", pair.0, pair.1, e.mean, e.ci_low, e.ci_high);
        }
        let m = moment_estimate(&cfg.with_grid(reflected_spde::GridSpec::new(16)?), 2.0, paths)?;
        println!("  E sup|u|^2 at n = 16: {:.4} +- {:.4}", m.mean, m.std_error);
    }
    Ok(())
}
