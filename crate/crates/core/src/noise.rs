//! Brownian sheet increments on a fine space-time grid.
//!
//! Cell `(i, c)` holds the white-noise mass of `[t_i, t_{i+1}] x [c/N, (c+1)/N]`,
//! a centred Gaussian with variance `dt / N`. Values are generated from a
//! counter-based stream keyed by `(seed, step, cell)`, so any block can be
//! regenerated independently. Lattice drivers for every divisor resolution are
//! obtained by summing fine cells, which couples lattices `n` and `2n` through
//! the same underlying sheet.

use std::f64::consts::PI;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::GridSpec;

/// Words of the ChaCha stream consumed per cell (two `u64` draws).
const WORDS_PER_CELL: u128 = 4;

/// A lazily generated Brownian sheet on `steps x n_fine` cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SheetIncrements {
    n_fine: usize,
    dt: f64,
    steps: usize,
    seed: u64,
}

/// Builds the sheet descriptor; increments are generated on demand.
pub fn sample(n_fine: usize, dt: f64, steps: usize, seed: u64) -> Result<SheetIncrements> {
    SheetIncrements::new(n_fine, dt, steps, seed)
}

impl SheetIncrements {
    pub fn new(n_fine: usize, dt: f64, steps: usize, seed: u64) -> Result<Self> {
        if n_fine < 2 {
            return Err(Error::config(format!("n_fine must be >= 2, got {n_fine}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::config(format!("dt must be > 0, got {dt}")));
        }
        if steps == 0 {
            return Err(Error::config("steps must be > 0"));
        }
        Ok(Self { n_fine, dt, steps, seed })
    }

    pub fn n_fine(&self) -> usize {
        self.n_fine
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Standard deviation of one cell, `sqrt(dt / n_fine)`.
    pub fn cell_std(&self) -> f64 {
        (self.dt / self.n_fine as f64).sqrt()
    }

    fn stream(&self, step: usize, first_cell: usize) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(step as u64);
        rng.set_word_pos(first_cell as u128 * WORDS_PER_CELL);
        rng
    }

    /// Fills `out` with cells `first_cell..first_cell + out.len()` of `step`.
    pub fn fill_cells(&self, step: usize, first_cell: usize, out: &mut [f64]) -> Result<()> {
        if step >= self.steps {
            return Err(Error::Index { index: step, max: self.steps - 1 });
        }
        if first_cell + out.len() > self.n_fine {
            return Err(Error::Dimension { expected: self.n_fine, got: first_cell + out.len() });
        }
        let mut rng = self.stream(step, first_cell);
        let std = self.cell_std();
        for o in out.iter_mut() {
            *o = std * standard_normal(&mut rng);
        }
        Ok(())
    }

    /// Fills `out` (length `n_fine`) with every cell of `step`.
    pub fn fill_step(&self, step: usize, out: &mut [f64]) -> Result<()> {
        if out.len() != self.n_fine {
            return Err(Error::Dimension { expected: self.n_fine, got: out.len() });
        }
        self.fill_cells(step, 0, out)
    }

    /// All cells, row-major by step.
    pub fn materialize(&self) -> Vec<f64> {
        let mut data = vec![0.0; self.steps * self.n_fine];
        for (step, row) in data.chunks_exact_mut(self.n_fine).enumerate() {
            self.fill_step(step, row).expect("row length matches n_fine");
        }
        data
    }

    /// Little-endian dump: `n_fine: u64, dt: f64, steps: u64, seed: u64`
    /// followed by `steps * n_fine` `f64` cells, row-major by step.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        write_header(&mut w, self.n_fine as u64, self.dt, self.steps as u64, self.seed)?;
        let mut row = vec![0.0; self.n_fine];
        for step in 0..self.steps {
            self.fill_step(step, &mut row)?;
            for v in &row {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }
}

/// Header of a binary field dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DumpHeader {
    pub width: u64,
    pub dt: f64,
    pub steps: u64,
    pub seed: u64,
}

pub(crate) fn write_header<W: Write>(w: &mut W, width: u64, dt: f64, steps: u64, seed: u64) -> Result<()> {
    w.write_all(&width.to_le_bytes())?;
    w.write_all(&dt.to_le_bytes())?;
    w.write_all(&steps.to_le_bytes())?;
    w.write_all(&seed.to_le_bytes())?;
    Ok(())
}

/// Reads a dump written by [`SheetIncrements::write_dump`] or a path export.
pub fn read_dump<R: Read>(mut r: R) -> Result<(DumpHeader, Vec<f64>)> {
    let mut word = [0u8; 8];
    let mut next = |r: &mut R| -> Result<[u8; 8]> {
        r.read_exact(&mut word)?;
        Ok(word)
    };
    let width = u64::from_le_bytes(next(&mut r)?);
    let dt = f64::from_le_bytes(next(&mut r)?);
    let steps = u64::from_le_bytes(next(&mut r)?);
    let seed = u64::from_le_bytes(next(&mut r)?);
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Schema("dump body is not a whole number of f64 values".into()));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((DumpHeader { width, dt, steps, seed }, values))
}

fn unit_open(bits: u64) -> f64 {
    ((bits >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn unit_closed_open(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Box-Muller from exactly two `u64` draws.
fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1 = unit_open(rng.next_u64());
    let u2 = unit_closed_open(rng.next_u64());
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Lattice driver: per step, `dW^n_k = sqrt(n) * (sheet mass of cell k)` for
/// cells `[k/n, (k+1)/n)`, each a standard Brownian increment over the step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeDriver {
    grid: GridSpec,
    sheet: SheetIncrements,
    time_factor: usize,
}

/// Sums fine cells onto lattice `n`; `n` must divide the sheet resolution.
pub fn coarsen(sheet: &SheetIncrements, n: usize) -> Result<LatticeDriver> {
    coarsen_space_time(sheet, n, 1)
}

/// As [`coarsen`], additionally merging `time_factor` consecutive steps.
pub fn coarsen_space_time(sheet: &SheetIncrements, n: usize, time_factor: usize) -> Result<LatticeDriver> {
    let grid = GridSpec::new(n)?;
    if !sheet.n_fine.is_multiple_of(n) {
        return Err(Error::config(format!(
            "lattice resolution {n} does not divide sheet resolution {}",
            sheet.n_fine
        )));
    }
    if time_factor == 0 || !sheet.steps.is_multiple_of(time_factor) {
        return Err(Error::config(format!(
            "time factor {time_factor} does not divide {} steps",
            sheet.steps
        )));
    }
    Ok(LatticeDriver { grid, sheet: *sheet, time_factor })
}

impl LatticeDriver {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn sheet(&self) -> &SheetIncrements {
        &self.sheet
    }

    pub fn dt(&self) -> f64 {
        self.sheet.dt * self.time_factor as f64
    }

    pub fn steps(&self) -> usize {
        self.sheet.steps / self.time_factor
    }

    /// Unscaled sheet masses of the `n` lattice cells at `step`.
    ///
    /// Time merging happens first (in step order), then the spatial reduction:
    /// pairwise halving when the block size is a power of two, left to right
    /// otherwise. With pairwise halving, masses on lattice `n` are bit-for-bit
    /// the pair sums of masses on lattice `2n`.
    pub fn fill_masses(&self, step: usize, scratch: &mut Vec<f64>, out: &mut [f64]) -> Result<()> {
        let n = self.grid.n();
        if out.len() != n {
            return Err(Error::Dimension { expected: n, got: out.len() });
        }
        if step >= self.steps() {
            return Err(Error::Index { index: step, max: self.steps() - 1 });
        }
        let fine = self.sheet.n_fine;
        scratch.resize(fine, 0.0);
        let mut row = if self.time_factor > 1 { vec![0.0; fine] } else { Vec::new() };
        for sub in 0..self.time_factor {
            let s = step * self.time_factor + sub;
            if sub == 0 {
                self.sheet.fill_step(s, scratch)?;
            } else {
                self.sheet.fill_step(s, &mut row)?;
                for (a, b) in scratch.iter_mut().zip(&row) {
                    *a += b;
                }
            }
        }
        let block = fine / n;
        if block.is_power_of_two() {
            let mut len = fine;
            while len > n {
                len /= 2;
                for i in 0..len {
                    scratch[i] = scratch[2 * i] + scratch[2 * i + 1];
                }
            }
            out.copy_from_slice(&scratch[..n]);
        } else {
            for (k, o) in out.iter_mut().enumerate() {
                let mut acc = 0.0;
                for c in &scratch[k * block..(k + 1) * block] {
                    acc += c;
                }
                *o = acc;
            }
        }
        Ok(())
    }

    /// `dW^n_k` for all cells `k = 0..n-1`; cell 0 borders the boundary node
    /// and is not used by the lattice system.
    pub fn fill_step(&self, step: usize, scratch: &mut Vec<f64>, out: &mut [f64]) -> Result<()> {
        self.fill_masses(step, scratch, out)?;
        let scale = (self.grid.n() as f64).sqrt();
        out.iter_mut().for_each(|x| *x *= scale);
        Ok(())
    }

    /// Driver increments for interior nodes `k = 1..n-1`, row-major by step.
    pub fn materialize_nodes(&self) -> Result<Vec<f64>> {
        let n = self.grid.n();
        let mut scratch = Vec::new();
        let mut cells = vec![0.0; n];
        let mut data = Vec::with_capacity(self.steps() * (n - 1));
        for step in 0..self.steps() {
            self.fill_step(step, &mut scratch, &mut cells)?;
            data.extend_from_slice(&cells[1..]);
        }
        Ok(data)
    }
}

/// Derives independent per-path seeds from a base seed (SplitMix64 finalizer).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_configs() {
        assert!(sample(1, 1e-3, 10, 0).is_err());
        assert!(sample(8, 0.0, 10, 0).is_err());
        assert!(sample(8, 1e-3, 0, 0).is_err());
        let s = sample(12, 1e-3, 10, 0).unwrap();
        assert!(coarsen(&s, 5).is_err());
        assert!(coarsen_space_time(&s, 4, 3).is_err());
        assert!(coarsen(&s, 4).is_ok());
    }

    #[test]
    fn sub_blocks_match_full_rows() {
        let s = sample(16, 1e-3, 4, 99).unwrap();
        let mut row = vec![0.0; 16];
        s.fill_step(2, &mut row).unwrap();
        let mut part = vec![0.0; 5];
        s.fill_cells(2, 7, &mut part).unwrap();
        assert_eq!(&row[7..12], &part[..]);
    }

    #[test]
    fn identity_coarsening_scales_single_cell() {
        let s = sample(8, 1e-3, 3, 5).unwrap();
        let d = coarsen(&s, 8).unwrap();
        let mut scratch = Vec::new();
        let mut out = vec![0.0; 8];
        d.fill_step(1, &mut scratch, &mut out).unwrap();
        let mut row = vec![0.0; 8];
        s.fill_step(1, &mut row).unwrap();
        for (o, r) in out.iter().zip(&row) {
            assert_eq!(*o, 8f64.sqrt() * r);
        }
    }

    #[test]
    fn dump_round_trip() {
        let s = sample(4, 2e-3, 3, 11).unwrap();
        let mut buf = Vec::new();
        s.write_dump(&mut buf).unwrap();
        assert_eq!(buf.len(), 32 + 3 * 4 * 8);
        let (h, v) = read_dump(&buf[..]).unwrap();
        assert_eq!(h, DumpHeader { width: 4, dt: 2e-3, steps: 3, seed: 11 });
        assert_eq!(v, s.materialize());
    }

    #[test]
    fn derived_seeds_differ() {
        let a: Vec<u64> = (0..100).map(|i| derive_seed(42, i)).collect();
        let mut b = a.clone();
        b.sort_unstable();
        b.dedup();
        assert_eq!(a.len(), b.len());
    }
}
