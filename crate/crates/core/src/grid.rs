//! Integer-offset grids and the functions that live on them.
//!
//! A point is always carried as an integer offset `n` from a real base `a`,
//! so differences of points are exact integer subtraction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The points `base + n` for `n` in `lo..=hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    base: f64,
    lo: i64,
    hi: i64,
}

impl Grid {
    pub fn new(base: f64, lo: i64, hi: i64) -> Result<Self> {
        if !base.is_finite() {
            return Err(Error::Domain(format!("grid base {base} is not finite")));
        }
        if lo > hi {
            return Err(Error::Domain(format!("empty grid: lo {lo} > hi {hi}")));
        }
        Ok(Grid { base, lo, hi })
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The real coordinate of offset `n`.
    pub fn point(&self, n: i64) -> f64 {
        self.base + n as f64
    }

    pub fn contains(&self, n: i64) -> bool {
        self.lo <= n && n <= self.hi
    }

    pub fn offsets(&self) -> impl DoubleEndedIterator<Item = i64> + Clone {
        self.lo..=self.hi
    }

    /// Same base, new offset range.
    pub fn with_range(&self, lo: i64, hi: i64) -> Result<Self> {
        Grid::new(self.base, lo, hi)
    }

    pub(crate) fn require(&self, need_lo: i64, need_hi: i64) -> Result<()> {
        if need_lo < self.lo || need_hi > self.hi {
            return Err(Error::InsufficientDomain {
                need_lo,
                need_hi,
                have_lo: self.lo,
                have_hi: self.hi,
            });
        }
        Ok(())
    }

    pub(crate) fn same_lattice(&self, other: &Grid) -> Result<()> {
        if self.base != other.base {
            return Err(Error::GridMismatch(format!(
                "bases differ: {} vs {}",
                self.base, other.base
            )));
        }
        Ok(())
    }
}

/// A real-valued sequence indexed by the points of a [`Grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridFunctionRepr", into = "GridFunctionRepr")]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Domain(format!(
                "grid {}..={} has {} points but {} values were given",
                grid.lo,
                grid.hi,
                grid.len(),
                values.len()
            )));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(i64) -> f64) -> Self {
        let values = grid.offsets().map(&mut f).collect();
        GridFunction { grid, values }
    }

    pub fn try_from_fn(grid: Grid, mut f: impl FnMut(i64) -> Result<f64>) -> Result<Self> {
        let values = grid.offsets().map(&mut f).collect::<Result<Vec<_>>>()?;
        Ok(GridFunction { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        GridFunction {
            values: vec![0.0; grid.len()],
            grid,
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        GridFunction {
            values: vec![c; grid.len()],
            grid,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at offset `n`; evaluating outside the grid is an error.
    pub fn get(&self, n: i64) -> Result<f64> {
        if !self.grid.contains(n) {
            return Err(Error::OutOfGrid {
                offset: n,
                lo: self.grid.lo,
                hi: self.grid.hi,
            });
        }
        Ok(self.values[(n - self.grid.lo) as usize])
    }

    /// Unchecked-by-`Result` access for callers that validated the range.
    pub(crate) fn at(&self, n: i64) -> f64 {
        self.values[(n - self.grid.lo) as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.grid.offsets().zip(self.values.iter().copied())
    }

    /// The restriction to `lo..=hi`, which must lie inside the grid.
    pub fn restrict(&self, lo: i64, hi: i64) -> Result<Self> {
        self.grid.require(lo, hi)?;
        let grid = self.grid.with_range(lo, hi)?;
        let start = (lo - self.grid.lo) as usize;
        Ok(GridFunction {
            grid,
            values: self.values[start..start + grid.len()].to_vec(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

#[derive(Serialize, Deserialize)]
struct GridFunctionRepr {
    a: f64,
    lo: i64,
    hi: i64,
    values: Vec<f64>,
}

impl TryFrom<GridFunctionRepr> for GridFunction {
    type Error = Error;

    fn try_from(r: GridFunctionRepr) -> Result<Self> {
        GridFunction::new(Grid::new(r.a, r.lo, r.hi)?, r.values)
    }
}

impl From<GridFunction> for GridFunctionRepr {
    fn from(f: GridFunction) -> Self {
        GridFunctionRepr {
            a: f.grid.base,
            lo: f.grid.lo,
            hi: f.grid.hi,
            values: f.values,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation_outside_grid_is_an_error() {
        let f = GridFunction::constant(Grid::new(0.5, -2, 3).unwrap(), 1.0);
        assert_eq!(f.get(3), Ok(1.0));
        assert!(matches!(f.get(4), Err(Error::OutOfGrid { offset: 4, .. })));
        assert!(matches!(f.get(-3), Err(Error::OutOfGrid { .. })));
    }

    #[test]
    fn point_arithmetic_is_exact_in_the_offset() {
        let g = Grid::new(0.1, -5, 5).unwrap();
        assert_eq!(g.point(3) - g.point(-2), 5.0);
        assert_eq!(g.len(), 11);
    }

    #[test]
    fn rejects_inverted_range_and_length_mismatch() {
        assert!(Grid::new(0.0, 2, 1).is_err());
        let g = Grid::new(0.0, 0, 2).unwrap();
        assert!(GridFunction::new(g, vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn json_shape_uses_a_lo_hi_values() {
        let f = GridFunction::new(Grid::new(0.0, -2, 3).unwrap(), vec![0., 0., 0., 1., 2., 3.])
            .unwrap();
        let text = serde_json::to_string(&f).unwrap();
        assert_eq!(text, r#"{"a":0.0,"lo":-2,"hi":3,"values":[0.0,0.0,0.0,1.0,2.0,3.0]}"#);
        let back: GridFunction = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<GridFunction>(r#"{"a":0,"lo":0,"hi":3,"values":[1]}"#).is_err());
    }
}
