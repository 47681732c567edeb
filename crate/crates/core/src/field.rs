//! Complex fields sampled on a [`SpatialGrid`] at a time stamp.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::table::Table;

#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub values: Vec<C64>,
    pub t: f64,
}

impl WaveField {
    /// Wraps samples after checking the length against `grid` and finiteness.
    pub fn new(grid: &SpatialGrid, values: Vec<C64>, t: f64) -> Result<Self> {
        grid.check(values.len())?;
        if let Some(i) = values.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidParameter(format!("non-finite field value at node {i}")));
        }
        if !t.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite time stamp {t}")));
        }
        Ok(Self { values, t })
    }

    pub fn zeros(grid: &SpatialGrid, t: f64) -> Self {
        Self { values: vec![C64::new(0.0, 0.0); grid.len()], t }
    }

    pub fn from_fn<F: Fn(f64) -> C64>(grid: &SpatialGrid, t: f64, f: F) -> Self {
        Self { values: grid.sample(f), t }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn l2_norm(&self, grid: &SpatialGrid) -> f64 {
        grid.l2_norm(&self.values)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// CSV with columns `x, re, im`.
    pub fn to_table(&self, grid: &SpatialGrid) -> Table {
        let mut table = Table::new(["x", "re", "im"]);
        for (i, z) in self.values.iter().enumerate() {
            table.push(vec![grid.x(i), z.re, z.im]);
        }
        table
    }

    pub fn to_csv(&self, grid: &SpatialGrid) -> String {
        self.to_table(grid).to_csv()
    }

    /// Reads a field written by [`WaveField::to_csv`]; the node column must
    /// match `grid` to within a relative `1e-12`.
    pub fn from_csv(grid: &SpatialGrid, text: &str, t: f64) -> Result<Self> {
        let samples = parse_field_csv(text)?;
        grid.check(samples.len())?;
        let tol = 1e-12 * grid.half_width();
        for (i, (x, _)) in samples.iter().enumerate() {
            if (x - grid.x(i)).abs() > tol {
                return Err(Error::Parse {
                    line: i + 2,
                    message: format!("node {x} does not match grid node {}", grid.x(i)),
                });
            }
        }
        Self::new(grid, samples.into_iter().map(|(_, z)| z).collect(), t)
    }
}

/// Parses `x, re, im` rows into `(x, u)` pairs.
pub fn parse_field_csv(text: &str) -> Result<Vec<(f64, C64)>> {
    let table = Table::parse(text)?;
    if table.header != ["x", "re", "im"] {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header x,re,im, found {}", table.header.join(",")),
        });
    }
    Ok(table.rows.into_iter().map(|r| (r[0], C64::new(r[1], r[2]))).collect())
}
