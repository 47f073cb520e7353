use serde::{Deserialize, Serialize};

use super::GridSpec;
use crate::error::{check_len, Error, Result};

/// Vectors in `R^dim` sampled on the uniform time grid `t_i = i dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledPath {
    dim: usize,
    dt: f64,
    data: Vec<f64>,
}

impl SampledPath {
    pub fn new(dim: usize, dt: f64) -> Self {
        Self { dim, dt, data: Vec::new() }
    }

    pub fn with_capacity(dim: usize, dt: f64, points: usize) -> Self {
        Self { dim, dt, data: Vec::with_capacity(dim * points) }
    }

    /// Builds a path from row-major samples.
    pub fn from_rows(dim: usize, dt: f64, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::Dimension { expected: dim, got: data.len() });
        }
        Ok(Self { dim, dt, data })
    }

    pub fn push(&mut self, v: &[f64]) {
        assert_eq!(v.len(), self.dim, "sample length");
        self.data.extend_from_slice(v);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of time points.
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Number of steps, one less than the number of points.
    pub fn steps(&self) -> usize {
        self.len().saturating_sub(1)
    }

    pub fn horizon(&self) -> f64 {
        self.steps() as f64 * self.dt
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    pub fn at(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Component `k` (0-based) over time.
    pub fn component(&self, k: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows().map(move |r| r[k])
    }

    pub fn sup_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `sup |self - other|` over all samples.
    pub fn sup_gap(&self, other: &SampledPath) -> Result<f64> {
        check_len(self.data.len(), other.data.len())?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())))
    }
}

/// Piecewise-linear interpolation of interior node values with zero boundary
/// values at `x = 0` and `x = 1`.
pub fn lift(values: &[f64], grid: &GridSpec, x: f64) -> Result<f64> {
    check_len(grid.interior_count(), values.len())?;
    lift_unchecked(values, grid, x)
}

pub(crate) fn lift_unchecked(values: &[f64], grid: &GridSpec, x: f64) -> Result<f64> {
    let (k, frac) = grid.locate(x)?;
    let node = |i: usize| if i == 0 || i >= grid.n() { 0.0 } else { values[i - 1] };
    if frac == 0.0 {
        return Ok(node(k));
    }
    let a = node(k);
    Ok(a + frac * (node(k + 1) - a))
}

/// Space-time field: node values on a time grid, linear in `x` between nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinearField {
    grid: GridSpec,
    path: SampledPath,
}

impl PiecewiseLinearField {
    pub fn new(grid: GridSpec, path: SampledPath) -> Result<Self> {
        check_len(grid.interior_count(), path.dim())?;
        Ok(Self { grid, path })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn path(&self) -> &SampledPath {
        &self.path
    }

    pub fn into_path(self) -> SampledPath {
        self.path
    }

    pub fn dt(&self) -> f64 {
        self.path.dt()
    }

    pub fn steps(&self) -> usize {
        self.path.steps()
    }

    /// Value at time index `i` and position `x`.
    pub fn eval(&self, i: usize, x: f64) -> Result<f64> {
        if i >= self.path.len() {
            return Err(Error::Index { index: i, max: self.path.steps() });
        }
        lift_unchecked(self.path.at(i), &self.grid, x)
    }

    /// Value at arbitrary `(t, x)`, linear in `t` between grid times.
    pub fn eval_at(&self, t: f64, x: f64) -> Result<f64> {
        let horizon = self.path.horizon();
        if !(0.0..=horizon * (1.0 + 1e-12)).contains(&t) {
            return Err(Error::domain(format!("time {t} outside [0, {horizon}]")));
        }
        let s = t / self.path.dt();
        let i = (s.floor() as usize).min(self.path.steps());
        let w = s - i as f64;
        let a = self.eval(i, x)?;
        if w <= 0.0 || i == self.path.steps() {
            return Ok(a);
        }
        let b = self.eval(i + 1, x)?;
        Ok(a + w * (b - a))
    }

    /// Supremum of `|field|`; attained at nodes because the field is linear
    /// between them and zero on the boundary.
    pub fn sup_abs(&self) -> f64 {
        self.path.sup_abs()
    }
}
