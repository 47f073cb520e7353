//! Lattice heat kernel against the continuum kernel, and the fitted envelope constants.
//!
//! cargo run --release --example kernel_estimates

use reflected_spde::lattice::estimates::{envelope_constants, kernel_gap_energy};
use reflected_spde::lattice::kernel::{continuum_kernel, discrete_kernel};
use reflected_spde::{GridSpec, KernelTruncation, SpectralBasis};

fn main() -> reflected_spde::Result<()> {
    let trunc = KernelTruncation::default();
    println!("G(0.01, 0.5, 0.45): continuum {:.5}", continuum_kernel(0.01, 0.5, 0.45, &trunc)?);
    for n in [8, 32, 128] {
        let basis = SpectralBasis::new(GridSpec::new(n)?);
        println!("  lattice n = {n:<4} {:.5}", discrete_kernel(&basis, 0.01, 0.5, 0.45)?);
    }

    println!();
    println!("n    gap energy x=0.5   time_shift  recent   space_shift");
    for n in [4, 8, 16, 32, 64] {
        let basis = SpectralBasis::new(GridSpec::new(n)?);
        let gap = kernel_gap_energy(&basis, 0.5, &trunc)?;
        let c = envelope_constants(&basis, &[0.25, 0.5], 0.5)?;
        println!("{n:<4} {gap:<18.4e} {:<11.3} {:<8.3} {:.3}", c.time_shift, c.recent, c.space_shift);
    }
    Ok(())
}
