//! Eigenpairs of the lattice Laplacian and the exact heat semigroup.
//!
//! cargo run --release --example spectral_basis

use std::f64::consts::PI;

use reflected_spde::{DiscreteLaplacian, GridSpec, SpectralBasis};

fn main() -> reflected_spde::Result<()> {
    let grid = GridSpec::new(16)?;
    let basis = SpectralBasis::new(grid);
    let lap = DiscreteLaplacian::new(grid);

    println!("j  lambda_j         -(j pi)^2       residual");
    for j in [1, 2, 4, 8, 15] {
        let e = basis.eigenvector(j);
        let ae = lap.apply(e)?;
        let lambda = basis.eigenvalue(j);
        let residual = ae.iter().zip(e).fold(0.0_f64, |m, (a, v)| m.max((a - lambda * v).abs()));
        println!("{j:<2} {lambda:<15.6} {:<15.6} {residual:.1e}", -(j as f64 * PI).powi(2));
    }

    // sin(pi x) on the nodes decays at rate lambda_1, not pi^2
    let u0: Vec<f64> = grid.interior_nodes().map(|x| (PI * x).sin()).collect();
    let t = 0.5;
    let u = basis.semigroup_apply(t, &u0)?;
    let mid = grid.n() / 2 - 1;
    println!();
    println!("u(0.5, 1/2)      = {:.8}", u[mid]);
    println!("exp(lambda_1 t)  = {:.8}", (basis.eigenvalue(1) * t).exp());
    println!("exp(-pi^2 t)     = {:.8}", (-PI * PI * t).exp());
    Ok(())
}
