//! Column-wise comparison of two run directories.

use std::fmt;
use std::path::Path;

use super::run::Manifest;
use super::table::{Cell, ResultTable};
use crate::error::{Error, Result};

/// Exit code for a comparison that found differences beyond tolerance.
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct CellDiff {
    pub row: usize,
    pub column: String,
    pub left: String,
    pub right: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub differences: Vec<CellDiff>,
    /// The runs used different seeds, so differences are statistical.
    pub seed_flagged: bool,
}

impl CompareReport {
    pub fn is_empty(&self) -> bool {
        self.differences.is_empty()
    }

    pub fn exit_code(&self) -> i32 {
        if self.differences.is_empty() || self.seed_flagged {
            0
        } else {
            EXIT_MISMATCH
        }
    }
}

impl fmt::Display for CompareReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.seed_flagged {
            writeln!(f, "seeds differ: differences below are statistical")?;
        }
        for d in &self.differences {
            writeln!(f, "row {} column {}: {} != {}", d.row, d.column, d.left, d.right)?;
        }
        if self.differences.is_empty() {
            writeln!(f, "no differences")?;
        }
        Ok(())
    }
}

fn render(c: &Cell) -> String {
    match c {
        Cell::Int(v) => v.to_string(),
        Cell::Float(v) => format!("{v:e}"),
        Cell::Text(s) => s.clone(),
        Cell::Bool(b) => b.to_string(),
    }
}

/// Compares `results.csv` of two runs using the looser of the two manifest
/// tolerances. Runs of different kinds or columns are a schema error.
pub fn compare_runs(dir1: &Path, dir2: &Path) -> Result<CompareReport> {
    let (m1, m2) = (Manifest::read(dir1)?, Manifest::read(dir2)?);
    if m1.config.kind != m2.config.kind {
        return Err(Error::Schema(format!("kinds differ: {:?} vs {:?}", m1.config.kind, m2.config.kind)));
    }
    let t1 = ResultTable::read(&dir1.join("results.csv"))?;
    let t2 = ResultTable::read(&dir2.join("results.csv"))?;
    if t1.columns != t2.columns || t1.columns != m1.columns || t2.columns != m2.columns {
        return Err(Error::Schema(format!("columns differ: {:?} vs {:?}", t1.columns, t2.columns)));
    }
    if t1.rows.len() != t2.rows.len() {
        return Err(Error::Schema(format!("row counts differ: {} vs {}", t1.rows.len(), t2.rows.len())));
    }
    let tol = m1.tolerance.loosest(m2.tolerance);
    let mut differences = Vec::new();
    for (i, (r1, r2)) in t1.rows.iter().zip(&t2.rows).enumerate() {
        for (j, (a, b)) in r1.iter().zip(r2).enumerate() {
            let same = match (a.as_f64(), b.as_f64()) {
                (Some(x), Some(y)) => tol.accepts(x, y),
                _ => a == b,
            };
            if !same {
                differences.push(CellDiff {
                    row: i + 1,
                    column: t1.columns[j].clone(),
                    left: render(a),
                    right: render(b),
                });
            }
        }
    }
    Ok(CompareReport { differences, seed_flagged: m1.seed != m2.seed })
}
