//! Variable exponents p(x), q(x) sampled at cell midpoints, their bounds,
//! Sobolev conjugates, log-Hoelder regularity diagnostics and the critical
//! set where q reaches the conjugate exponent.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{same_grid, Grid};

/// A sampled exponent function with one value per grid cell. Construction
/// enforces 1 < lo <= value <= hi < oo for the declared bounds.
#[derive(Debug, Clone)]
pub struct ExponentField {
    grid: Arc<Grid>,
    values: Vec<f64>,
    declared_bounds: (f64, f64),
}

impl ExponentField {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>, declared_bounds: (f64, f64)) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::InvalidExponent(format!(
                "expected {} cell values, got {}",
                grid.cell_count(),
                values.len()
            )));
        }
        let (lo, hi) = declared_bounds;
        if !(lo > 1.0) || !hi.is_finite() || !(lo <= hi) {
            return Err(Error::InvalidExponent(format!(
                "declared bounds ({lo}, {hi}) must satisfy 1 < lo <= hi < oo"
            )));
        }
        for (c, &v) in values.iter().enumerate() {
            if !v.is_finite() || v < lo || v > hi {
                return Err(Error::InvalidExponent(format!(
                    "value {v} at cell {c} falls outside [{lo}, {hi}]"
                )));
            }
        }
        Ok(ExponentField { grid, values, declared_bounds })
    }

    /// Build from per-cell values, declaring the tight (min, max) bounds.
    pub fn from_values(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidExponent("empty value list".into()));
        }
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Self::new(grid, values, (lo, hi))
    }

    pub fn constant(grid: Arc<Grid>, c: f64) -> Result<Self> {
        let n = grid.cell_count();
        Self::new(grid, vec![c; n], (c, c))
    }

    /// Sample `f` at cell midpoints, declaring tight bounds.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values: Vec<f64> = (0..grid.cell_count())
            .map(|c| {
                let x = grid.cell_center(c);
                f(&x[..grid.dim()])
            })
            .collect();
        Self::from_values(grid, values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, cell: usize) -> f64 {
        self.values[cell]
    }

    /// Value at the cell containing the point (nearest cell center).
    pub fn value_at(&self, point: [f64; 2]) -> f64 {
        let g = &self.grid;
        let mut idx = [0usize, 0];
        for k in 0..g.dim() {
            let (lo, _) = g.extents(k);
            let h = g.spacing(k);
            let i = ((point[k] - lo) / h).floor() as isize;
            idx[k] = i.clamp(0, g.cells_per_axis(k) as isize - 1) as usize;
        }
        self.values[g.cell_linear(idx[0], idx[1])]
    }

    pub fn declared_bounds(&self) -> (f64, f64) {
        self.declared_bounds
    }

    /// Tight (min, max) over cells.
    pub fn bounds(&self) -> (f64, f64) {
        let lo = self.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// Pointwise conjugate exponent p/(p-1).
    pub fn conjugate(&self) -> Result<Self> {
        let values: Vec<f64> = self.values.iter().map(|p| p / (p - 1.0)).collect();
        Self::from_values(self.grid.clone(), values)
    }

    /// Pointwise shift p - eps, declaring tight bounds. Rejects shifts that
    /// push any value to 1 or below.
    pub fn shifted(&self, eps: f64) -> Result<Self> {
        let values: Vec<f64> = self.values.iter().map(|p| p - eps).collect();
        Self::from_values(self.grid.clone(), values)
    }
}

/// Per-cell Sobolev conjugate n p / (n - p); cells with p >= n carry the
/// infinite sentinel `f64::INFINITY` (every finite q is subcritical there).
#[derive(Debug, Clone)]
pub struct SobolevConjugate {
    values: Vec<f64>,
}

impl SobolevConjugate {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, cell: usize) -> f64 {
        self.values[cell]
    }

    pub fn is_finite(&self, cell: usize) -> bool {
        self.values[cell].is_finite()
    }
}

pub fn sobolev_conjugate(f: &ExponentField, dim: usize) -> Result<SobolevConjugate> {
    if dim < 1 {
        return Err(Error::InvalidParameters("dimension must be >= 1".into()));
    }
    let n = dim as f64;
    let values = f
        .values()
        .iter()
        .map(|&p| if p < n { n * p / (n - p) } else { f64::INFINITY })
        .collect();
    Ok(SobolevConjugate { values })
}

/// Max over distinct cell-center pairs with |x - y| < 1/2 of
/// |(p(x) - p(y)) log|x - y||. A diagnostic, not a pass/fail gate.
pub fn log_hoelder_modulus(f: &ExponentField) -> Result<f64> {
    let g = f.grid();
    let n = g.cell_count();
    if n < 2 {
        return Err(Error::InvalidParameters("need at least 2 cells".into()));
    }
    let centers: Vec<[f64; 2]> = (0..n).map(|c| g.cell_center(c)).collect();
    let dim = g.dim();
    let mut modulus: f64 = 0.0;
    for a in 0..n {
        for b in (a + 1)..n {
            let mut d2 = 0.0;
            for k in 0..dim {
                d2 += (centers[a][k] - centers[b][k]).powi(2);
            }
            let d = d2.sqrt();
            if d > 0.0 && d < 0.5 {
                let v = ((f.value(a) - f.value(b)) * d.ln()).abs();
                modulus = modulus.max(v);
            }
        }
    }
    Ok(modulus)
}

/// Cells where q comes within `tolerance` of the Sobolev conjugate of p.
#[derive(Debug, Clone)]
pub struct CriticalSetReport {
    pub cells: Vec<usize>,
    pub gap: Vec<f64>,
    pub tolerance: f64,
}

impl CriticalSetReport {
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, cell: usize) -> bool {
        self.cells.binary_search(&cell).is_ok()
    }
}

/// Lists cells with p*(x) - q(x) <= tol. Rejects supercritical input, i.e.
/// any cell where q exceeds p* by more than tol.
pub fn critical_set(
    p: &ExponentField,
    q: &ExponentField,
    dim: usize,
    tol: f64,
) -> Result<CriticalSetReport> {
    same_grid(p.grid(), q.grid(), "critical_set exponents")?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameters("tolerance must be positive".into()));
    }
    let conj = sobolev_conjugate(p, dim)?;
    let mut cells = Vec::new();
    let mut gap = Vec::with_capacity(p.values().len());
    for c in 0..p.values().len() {
        let g = conj.value(c) - q.value(c);
        if g < -tol {
            return Err(Error::SupercriticalExponent { cell: c, excess: -g });
        }
        if g <= tol {
            cells.push(c);
        }
        gap.push(g);
    }
    Ok(CriticalSetReport { cells, gap, tolerance: tol })
}
