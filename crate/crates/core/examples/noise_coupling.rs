//! One Brownian sheet drives every lattice; coarse cells are exact sums of fine ones.
//!
//! cargo run --release --example noise_coupling

use reflected_spde::noise::{coarsen, read_dump, sample};

fn main() -> reflected_spde::Result<()> {
    let dt = 1e-3;
    let sheet = sample(64, dt, 2000, 7)?;
    println!("sheet: n_fine = {}, steps = {}, cell std = {:.3e}", sheet.n_fine(), sheet.steps(), sheet.cell_std());

    for n in [4, 16, 64] {
        let nodes = coarsen(&sheet, n)?.materialize_nodes()?;
        let var = nodes.iter().map(|x| x * x).sum::<f64>() / nodes.len() as f64;
        println!("n = {n:<3} driver variance / dt = {:.4}", var / dt);
    }

    let (coarse, fine) = (coarsen(&sheet, 8)?, coarsen(&sheet, 16)?);
    let (mut c, mut f, mut scratch) = (vec![0.0; 8], vec![0.0; 16], Vec::new());
    let mut mismatches = 0;
    for step in 0..sheet.steps() {
        coarse.fill_masses(step, &mut scratch, &mut c)?;
        fine.fill_masses(step, &mut scratch, &mut f)?;
        mismatches += (0..8).filter(|&k| c[k] != f[2 * k] + f[2 * k + 1]).count();
    }
    println!("n = 8 cells differing from pair sums of n = 16 cells: {mismatches}");

    let mut buf = Vec::new();
    sample(64, dt, 10, 7)?.write_dump(&mut buf)?;
    let (header, values) = read_dump(buf.as_slice())?;
    println!("dump: {} bytes, header {header:?}, {} values", buf.len(), values.len());
    Ok(())
}
