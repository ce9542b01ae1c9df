//! Discrete domains: uniform tensor grids over an interval or a rectangle,
//! node-based functions with zero boundary trace, cell-based scalar/vector
//! data, and nonnegative cell measures.
//!
//! Conventions used throughout the crate:
//! * cells are the boxes between consecutive grid lines; cell data (exponents,
//!   gradients, measures) is sampled at cell midpoints;
//! * functions live on interior grid nodes; boundary nodes are not stored and
//!   read as 0, so the zero trace is structural;
//! * points are `[f64; 2]`, the second coordinate being ignored in 1D.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Uniform tensor grid on (lo, hi) or (lo0, hi0) x (lo1, hi1).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    lo: [f64; 2],
    hi: [f64; 2],
    cells: [usize; 2],
}

impl Grid {
    /// 1D interval (a, b) split into `n` cells.
    pub fn interval(a: f64, b: f64, n: usize) -> Result<Grid> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidParameters(format!(
                "interval bounds ({a}, {b}) must be finite and increasing"
            )));
        }
        if n < 2 {
            return Err(Error::InvalidParameters(format!(
                "need at least 2 cells per axis, got {n}"
            )));
        }
        Ok(Grid { dim: 1, lo: [a, 0.0], hi: [b, 1.0], cells: [n, 1] })
    }

    /// 2D rectangle (a0, b0) x (a1, b1) split into `n0 x n1` cells.
    pub fn rectangle(a: [f64; 2], b: [f64; 2], n: [usize; 2]) -> Result<Grid> {
        for k in 0..2 {
            if !(a[k] < b[k]) || !a[k].is_finite() || !b[k].is_finite() {
                return Err(Error::InvalidParameters(format!(
                    "axis {k} bounds ({}, {}) must be finite and increasing",
                    a[k], b[k]
                )));
            }
            if n[k] < 2 {
                return Err(Error::InvalidParameters(format!(
                    "need at least 2 cells per axis, got {} on axis {k}",
                    n[k]
                )));
            }
        }
        Ok(Grid { dim: 2, lo: a, hi: b, cells: n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extents(&self, axis: usize) -> (f64, f64) {
        (self.lo[axis], self.hi[axis])
    }

    pub fn cells_per_axis(&self, axis: usize) -> usize {
        self.cells[axis]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / self.cells[axis] as f64
    }

    pub fn max_spacing(&self) -> f64 {
        (0..self.dim).map(|k| self.spacing(k)).fold(0.0, f64::max)
    }

    /// Volume of a single cell.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|k| self.spacing(k)).product()
    }

    /// Measure of the whole domain.
    pub fn domain_volume(&self) -> f64 {
        (0..self.dim).map(|k| self.hi[k] - self.lo[k]).product()
    }

    pub fn domain_diameter(&self) -> f64 {
        (0..self.dim)
            .map(|k| (self.hi[k] - self.lo[k]).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn cell_count(&self) -> usize {
        self.cells[0] * self.cells[1]
    }

    /// Interior node count. Boundary nodes are implicit zeros.
    pub fn node_count(&self) -> usize {
        match self.dim {
            1 => self.cells[0] - 1,
            _ => (self.cells[0] - 1) * (self.cells[1] - 1),
        }
    }

    /// Cell multi-index (i, j) of a linear cell index; j = 0 in 1D.
    pub fn cell_multi(&self, cell: usize) -> (usize, usize) {
        (cell % self.cells[0], cell / self.cells[0])
    }

    pub fn cell_linear(&self, i: usize, j: usize) -> usize {
        j * self.cells[0] + i
    }

    pub fn cell_center(&self, cell: usize) -> [f64; 2] {
        let (i, j) = self.cell_multi(cell);
        let mut c = [0.0, 0.0];
        c[0] = self.lo[0] + (i as f64 + 0.5) * self.spacing(0);
        if self.dim == 2 {
            c[1] = self.lo[1] + (j as f64 + 0.5) * self.spacing(1);
        }
        c
    }

    /// Node multi-index (grid-line indices) of a linear interior-node index.
    pub fn node_multi(&self, node: usize) -> (usize, usize) {
        match self.dim {
            1 => (node + 1, 0),
            _ => {
                let m0 = self.cells[0] - 1;
                (node % m0 + 1, node / m0 + 1)
            }
        }
    }

    pub fn node_coord(&self, node: usize) -> [f64; 2] {
        let (i, j) = self.node_multi(node);
        let mut c = [0.0, 0.0];
        c[0] = self.lo[0] + i as f64 * self.spacing(0);
        if self.dim == 2 {
            c[1] = self.lo[1] + j as f64 * self.spacing(1);
        }
        c
    }

    /// Linear interior-node index of grid line (i, j), or None on the boundary.
    pub fn node_linear(&self, i: usize, j: usize) -> Option<usize> {
        match self.dim {
            1 => {
                if i >= 1 && i < self.cells[0] {
                    Some(i - 1)
                } else {
                    None
                }
            }
            _ => {
                if i >= 1 && i < self.cells[0] && j >= 1 && j < self.cells[1] {
                    Some((j - 1) * (self.cells[0] - 1) + (i - 1))
                } else {
                    None
                }
            }
        }
    }

    fn dist2(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        (0..self.dim).map(|k| (a[k] - b[k]).powi(2)).sum()
    }
}

pub(crate) fn same_grid(a: &Arc<Grid>, b: &Arc<Grid>, what: &'static str) -> Result<()> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(Error::GridMismatch(what))
    }
}

/// Real-valued function on interior grid nodes with structural zero trace.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<GridFunction> {
        if values.len() != grid.node_count() {
            return Err(Error::InvalidParameters(format!(
                "expected {} node values, got {}",
                grid.node_count(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameters("non-finite node value".into()));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn zero(grid: Arc<Grid>) -> GridFunction {
        let n = grid.node_count();
        GridFunction { grid, values: vec![0.0; n] }
    }

    /// Sample `f` at interior node coordinates.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(&[f64]) -> f64) -> GridFunction {
        let values = (0..grid.node_count())
            .map(|n| {
                let c = grid.node_coord(n);
                f(&c[..grid.dim()])
            })
            .collect();
        GridFunction { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Value at grid line (i, j); boundary lines read 0.
    pub fn at_line(&self, i: usize, j: usize) -> f64 {
        match self.grid.node_linear(i, j) {
            Some(n) => self.values[n],
            None => 0.0,
        }
    }

    pub fn scaled(&self, c: f64) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// a*self + b*other on a shared grid.
    pub fn linear_comb(&self, a: f64, other: &GridFunction, b: f64) -> Result<GridFunction> {
        same_grid(&self.grid, &other.grid, "linear_comb operands")?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(GridFunction { grid: self.grid.clone(), values })
    }

    /// Midpoint samples: the average of the cell's corner nodes.
    pub fn cell_samples(&self) -> CellFunction {
        let g = &self.grid;
        let mut vals = vec![0.0; g.cell_count()];
        match g.dim() {
            1 => {
                for i in 0..g.cells_per_axis(0) {
                    vals[i] = 0.5 * (self.at_line(i, 0) + self.at_line(i + 1, 0));
                }
            }
            _ => {
                for c in 0..g.cell_count() {
                    let (i, j) = g.cell_multi(c);
                    vals[c] = 0.25
                        * (self.at_line(i, j)
                            + self.at_line(i + 1, j)
                            + self.at_line(i, j + 1)
                            + self.at_line(i + 1, j + 1));
                }
            }
        }
        CellFunction { grid: self.grid.clone(), values: vals }
    }

    /// Finite-difference gradient per cell. 1D: forward difference over the
    /// cell; 2D: average of the axis differences over the two opposite edges.
    pub fn gradient(&self) -> CellVectorField {
        let g = &self.grid;
        let mut comps = vec![[0.0, 0.0]; g.cell_count()];
        match g.dim() {
            1 => {
                let h = g.spacing(0);
                for i in 0..g.cells_per_axis(0) {
                    comps[i][0] = (self.at_line(i + 1, 0) - self.at_line(i, 0)) / h;
                }
            }
            _ => {
                let hx = g.spacing(0);
                let hy = g.spacing(1);
                for c in 0..g.cell_count() {
                    let (i, j) = g.cell_multi(c);
                    let v00 = self.at_line(i, j);
                    let v10 = self.at_line(i + 1, j);
                    let v01 = self.at_line(i, j + 1);
                    let v11 = self.at_line(i + 1, j + 1);
                    comps[c][0] = 0.5 * ((v10 - v00) + (v11 - v01)) / hx;
                    comps[c][1] = 0.5 * ((v01 - v00) + (v11 - v10)) / hy;
                }
            }
        }
        CellVectorField { grid: self.grid.clone(), comps }
    }
}

/// Scalar data sampled at cell midpoints.
#[derive(Debug, Clone)]
pub struct CellFunction {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl CellFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<CellFunction> {
        if values.len() != grid.cell_count() {
            return Err(Error::InvalidParameters(format!(
                "expected {} cell values, got {}",
                grid.cell_count(),
                values.len()
            )));
        }
        Ok(CellFunction { grid, values })
    }

    pub fn constant(grid: Arc<Grid>, c: f64) -> CellFunction {
        let n = grid.cell_count();
        CellFunction { grid, values: vec![c; n] }
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(&[f64]) -> f64) -> CellFunction {
        let values = (0..grid.cell_count())
            .map(|c| {
                let x = grid.cell_center(c);
                f(&x[..grid.dim()])
            })
            .collect();
        CellFunction { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Vector data per cell (gradients). The second component is 0 in 1D.
#[derive(Debug, Clone)]
pub struct CellVectorField {
    grid: Arc<Grid>,
    comps: Vec<[f64; 2]>,
}

impl CellVectorField {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn components(&self) -> &[[f64; 2]] {
        &self.comps
    }

    pub fn magnitude(&self) -> CellFunction {
        let values = self
            .comps
            .iter()
            .map(|v| (v[0] * v[0] + v[1] * v[1]).sqrt())
            .collect();
        CellFunction { grid: self.grid.clone(), values }
    }
}

/// Nonnegative masses on grid cells.
#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    grid: Arc<Grid>,
    masses: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(grid: Arc<Grid>, masses: Vec<f64>) -> Result<DiscreteMeasure> {
        if masses.len() != grid.cell_count() {
            return Err(Error::InvalidParameters(format!(
                "expected {} cell masses, got {}",
                grid.cell_count(),
                masses.len()
            )));
        }
        if masses.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::InvalidParameters(
                "cell masses must be finite and nonnegative".into(),
            ));
        }
        Ok(DiscreteMeasure { grid, masses })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Sum of masses of cells whose centers lie within `radius` of `center`.
    pub fn mass_in_ball(&self, center: [f64; 2], radius: f64) -> f64 {
        let r2 = radius * radius;
        self.masses
            .iter()
            .enumerate()
            .filter(|(c, _)| self.grid.dist2(self.grid.cell_center(*c), center) <= r2)
            .map(|(_, m)| m)
            .sum()
    }
}

/// Boolean cell mask selecting a subdomain (whole domain or a ball).
#[derive(Debug, Clone)]
pub struct CellMask {
    grid: Arc<Grid>,
    inside: Vec<bool>,
}

impl CellMask {
    pub fn full(grid: Arc<Grid>) -> CellMask {
        let n = grid.cell_count();
        CellMask { grid, inside: vec![true; n] }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn inside(&self) -> &[bool] {
        &self.inside
    }

    pub fn is_full(&self) -> bool {
        self.inside.iter().all(|&b| b)
    }

    pub fn masked_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.inside.iter().enumerate().filter(|(_, b)| **b).map(|(c, _)| c)
    }

    pub fn masked_count(&self) -> usize {
        self.inside.iter().filter(|b| **b).count()
    }

    /// A node is free iff every adjacent cell exists and is masked; functions
    /// constrained to the mask are forced to 0 at all other nodes.
    pub fn free_nodes(&self) -> Vec<bool> {
        let g = &self.grid;
        let mut free = vec![false; g.node_count()];
        match g.dim() {
            1 => {
                for n in 0..g.node_count() {
                    let (i, _) = g.node_multi(n);
                    free[n] = self.inside[i - 1] && self.inside[i];
                }
            }
            _ => {
                for n in 0..g.node_count() {
                    let (i, j) = g.node_multi(n);
                    free[n] = self.inside[g.cell_linear(i - 1, j - 1)]
                        && self.inside[g.cell_linear(i, j - 1)]
                        && self.inside[g.cell_linear(i - 1, j)]
                        && self.inside[g.cell_linear(i, j)];
                }
            }
        }
        free
    }

    /// Centroid of masked cell centers.
    pub fn centroid(&self) -> [f64; 2] {
        let mut c = [0.0, 0.0];
        let mut count = 0usize;
        for cell in self.masked_cells() {
            let x = self.grid.cell_center(cell);
            c[0] += x[0];
            c[1] += x[1];
            count += 1;
        }
        if count > 0 {
            c[0] /= count as f64;
            c[1] /= count as f64;
        }
        c
    }

    /// Per-axis extent of the masked region's bounding box.
    pub fn bbox_extent(&self) -> [f64; 2] {
        let g = &self.grid;
        let mut min = [f64::INFINITY, f64::INFINITY];
        let mut max = [f64::NEG_INFINITY, f64::NEG_INFINITY];
        for cell in self.masked_cells() {
            let x = g.cell_center(cell);
            for k in 0..g.dim() {
                min[k] = min[k].min(x[k]);
                max[k] = max[k].max(x[k]);
            }
        }
        let mut ext = [0.0, 0.0];
        for k in 0..g.dim() {
            ext[k] = (max[k] - min[k]).max(0.0) + g.spacing(k);
        }
        ext
    }
}

/// Mask of cells whose centers lie within `radius` of `center`, intersected
/// with the domain. Radii below two grid spacings cannot hold any free node
/// pattern worth solving on and are rejected.
pub fn restrict_to_ball(grid: &Arc<Grid>, center: [f64; 2], radius: f64) -> Result<CellMask> {
    let min = 2.0 * grid.max_spacing();
    if !(radius >= min) {
        return Err(Error::BallTooSmall { radius, min });
    }
    let r2 = radius * radius;
    let inside = (0..grid.cell_count())
        .map(|c| grid.dist2(grid.cell_center(c), center) <= r2)
        .collect();
    Ok(CellMask { grid: grid.clone(), inside })
}
