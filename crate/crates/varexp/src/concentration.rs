//! Concentration experiments: subcritical sweeps and their extrapolated
//! limits, localized best constants on shrinking balls, bubble sequences
//! whose gradient energy collapses onto a point, the limit functional over
//! function-plus-atoms pairs, and the compactness/concentration classifier.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exponent::{critical_set, sobolev_conjugate, CriticalSetReport, ExponentField};
use crate::grid::{restrict_to_ball, same_grid, CellMask, Grid, GridFunction};
use crate::modular::{energy_measure, modular};
use crate::solver::{
    quotient_from_record, solve_with_warm_start, ExtremalProblem, ExtremalRecord, SolverOptions,
};

// ---------------------------------------------------------------------------
// extrapolation
// ---------------------------------------------------------------------------

/// Fit y = a + b x^c through the last three points of a sequence ordered by
/// decreasing x >= 0 and report a; falls back to the last y when the fit is
/// ill-conditioned (non-monotone differences or no admissible rate).
pub fn extrapolate_limit(points: &[(f64, f64)]) -> f64 {
    let n = points.len();
    if n == 0 {
        return f64::NAN;
    }
    let fallback = points[n - 1].1;
    if n < 3 {
        return fallback;
    }
    let (x1, y1) = points[n - 3];
    let (x2, y2) = points[n - 2];
    let (x3, y3) = points[n - 1];
    if !(x1 > x2 && x2 > x3 && x3 >= 0.0) {
        return fallback;
    }
    let d1 = y1 - y2;
    let d2 = y2 - y3;
    if d1 * d2 <= 0.0 || d2.abs() >= d1.abs() {
        return fallback;
    }
    let target = d2 / d1;
    let ratio = |c: f64| {
        let a = x1.powf(c);
        let b = x2.powf(c);
        let e = x3.powf(c);
        (b - e) / (a - b) - target
    };
    // bracket the rate on a log-spaced scan, then bisect
    let mut lo = f64::NAN;
    let mut hi = f64::NAN;
    let mut prev_c = 1e-2;
    let mut prev_v = ratio(prev_c);
    for k in 1..=200 {
        let c = 1e-2 * (1000.0f64).powf(k as f64 / 200.0);
        let v = ratio(c);
        if prev_v.is_finite() && v.is_finite() && prev_v * v <= 0.0 {
            lo = prev_c;
            hi = c;
            break;
        }
        prev_c = c;
        prev_v = v;
    }
    if !lo.is_finite() {
        return fallback;
    }
    let mut flo = ratio(lo);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let fm = ratio(mid);
        if !fm.is_finite() {
            return fallback;
        }
        if flo * fm <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    let c = 0.5 * (lo + hi);
    let b = d1 / (x1.powf(c) - x2.powf(c));
    let a = y3 - b * x3.powf(c);
    if a.is_finite() {
        a
    } else {
        fallback
    }
}

// ---------------------------------------------------------------------------
// bubbles
// ---------------------------------------------------------------------------

/// Rescaled profile shape; both are supported in the ball of radius 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BubbleProfile {
    /// exp(1/(|y|^2 - 1/4)) inside |y| < 1/2, smooth and compactly supported.
    SmoothCompact,
    /// 1 - 2|y| inside |y| < 1/2; kept for closed-form cross-checks.
    Tent,
}

impl BubbleProfile {
    fn eval(&self, y2: f64) -> f64 {
        match self {
            BubbleProfile::SmoothCompact => {
                if y2 < 0.25 {
                    (1.0 / (y2 - 0.25)).exp()
                } else {
                    0.0
                }
            }
            BubbleProfile::Tent => {
                let r = y2.sqrt();
                if r < 0.5 {
                    1.0 - 2.0 * r
                } else {
                    0.0
                }
            }
        }
    }
}

/// Bubble t eps^{-(n-p(x0))/p(x0)} phi((x - x0)/eps) interpolated on the
/// grid, with t chosen by a scalar root-find so that the gradient-energy
/// modular equals `target_mass`.
pub fn make_bubble(
    center: [f64; 2],
    eps: f64,
    p: &ExponentField,
    target_mass: f64,
    profile: BubbleProfile,
) -> Result<GridFunction> {
    let g = p.grid().clone();
    if !(target_mass > 0.0 && target_mass <= 1.0) {
        return Err(Error::TargetMassInfeasible(format!(
            "target mass {target_mass} outside (0, 1]"
        )));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameters(format!("eps must be positive, got {eps}")));
    }
    let margin = eps / 2.0 + 2.0 * g.max_spacing();
    for k in 0..g.dim() {
        let (lo, hi) = g.extents(k);
        if center[k] - lo < margin || hi - center[k] < margin {
            return Err(Error::BubbleTouchesBoundary(format!(
                "support radius {} needs {margin} of clearance at axis {k}",
                eps / 2.0
            )));
        }
    }
    let n = g.dim() as f64;
    let p_center = p.value_at(center);
    let amplitude = eps.powf(-(n - p_center) / p_center);
    let dim = g.dim();
    let base = GridFunction::from_fn(g.clone(), |x| {
        let mut y2 = 0.0;
        for k in 0..dim {
            let y = (x[k] - center[k]) / eps;
            y2 += y * y;
        }
        amplitude * profile.eval(y2)
    });
    // per-cell energy coefficients of the unscaled bubble
    let mag = base.gradient().magnitude();
    let vol = g.cell_volume();
    let coeffs: Vec<(f64, f64)> = mag
        .values()
        .iter()
        .zip(p.values())
        .filter(|(s, _)| **s != 0.0)
        .map(|(s, pc)| (s.powf(*pc) * vol, *pc))
        .collect();
    if coeffs.is_empty() {
        return Err(Error::TargetMassInfeasible(
            "bubble support is below grid resolution".into(),
        ));
    }
    let energy = |t: f64| -> f64 { coeffs.iter().map(|(a, pc)| t.powf(*pc) * a).sum() };
    // bracket the scale, then geometric bisection
    let mut t_hi = 1.0f64;
    let mut guard = 0;
    while energy(t_hi) < target_mass {
        t_hi *= 2.0;
        guard += 1;
        if guard > 2000 {
            return Err(Error::TargetMassInfeasible("energy does not reach target".into()));
        }
    }
    let mut t_lo = t_hi;
    guard = 0;
    while energy(t_lo) > target_mass {
        t_lo *= 0.5;
        guard += 1;
        if guard > 2000 {
            return Err(Error::TargetMassInfeasible("energy does not fall below target".into()));
        }
    }
    for _ in 0..200 {
        let mid = if t_hi / t_lo > 4.0 { t_lo * (t_hi / t_lo).sqrt() } else { 0.5 * (t_lo + t_hi) };
        if energy(mid) > target_mass {
            t_hi = mid;
        } else {
            t_lo = mid;
        }
        if t_hi - t_lo <= 1e-14 * t_hi {
            break;
        }
    }
    let t = 0.5 * (t_lo + t_hi);
    if (energy(t) - target_mass).abs() > 1e-9 {
        return Err(Error::TargetMassInfeasible(format!(
            "root-find residual {:.3e}",
            (energy(t) - target_mass).abs()
        )));
    }
    Ok(base.scaled(t))
}

/// Sum of disjoint single bubbles, the one at x_i carrying weight
/// mass_i^{1/p(x_i)} on a unit-energy bubble; total energy is the mass sum.
pub fn make_multi_bubble(
    atoms: &[([f64; 2], f64)],
    eps: f64,
    p: &ExponentField,
    profile: BubbleProfile,
) -> Result<GridFunction> {
    if atoms.is_empty() {
        return Err(Error::InvalidParameters("need at least one atom".into()));
    }
    let g = p.grid().clone();
    let total: f64 = atoms.iter().map(|(_, m)| m).sum();
    if !(total < 1.0) {
        return Err(Error::MassBudgetExceeded(total));
    }
    for (_, m) in atoms {
        if !(*m > 0.0) {
            return Err(Error::InvalidParameters("atom masses must be positive".into()));
        }
    }
    let min_sep = eps + 2.0 * g.max_spacing();
    for i in 0..atoms.len() {
        for j in (i + 1)..atoms.len() {
            let mut d2 = 0.0;
            for k in 0..g.dim() {
                d2 += (atoms[i].0[k] - atoms[j].0[k]).powi(2);
            }
            if d2.sqrt() < min_sep {
                return Err(Error::OverlappingSupports(i, j));
            }
        }
    }
    let mut sum = GridFunction::zero(g.clone());
    for (center, mass) in atoms {
        let unit = make_bubble(*center, eps, p, 1.0, profile)?;
        let weight = mass.powf(1.0 / p.value_at(*center));
        sum = sum.linear_comb(1.0, &unit, weight)?;
    }
    Ok(sum)
}

// ---------------------------------------------------------------------------
// atomic decompositions and the limit functional
// ---------------------------------------------------------------------------

/// Split of a nonnegative cell measure into point atoms at a detection
/// radius and the diffuse remainder.
#[derive(Debug, Clone)]
pub struct AtomicDecomposition {
    /// (cell index, mass collected within the atom radius), in extraction order.
    pub atoms: Vec<(usize, f64)>,
    pub diffuse_mass: f64,
    pub atom_radius: f64,
    pub threshold: f64,
}

impl AtomicDecomposition {
    /// Greedy extraction: repeatedly take the cell collecting the largest
    /// ball mass, keep it when it reaches the threshold, and exclude a
    /// 2-radius neighborhood from later seeds.
    pub fn detect(
        m: &crate::grid::DiscreteMeasure,
        atom_radius: f64,
        threshold: f64,
    ) -> Result<AtomicDecomposition> {
        if !(atom_radius > 0.0) || !(threshold > 0.0) {
            return Err(Error::InvalidParameters(
                "atom radius and threshold must be positive".into(),
            ));
        }
        let g = m.grid().clone();
        let total = m.total_mass();
        let centers: Vec<[f64; 2]> = (0..g.cell_count()).map(|c| g.cell_center(c)).collect();
        let dist2 = |a: usize, b: usize| -> f64 {
            (0..g.dim())
                .map(|k| (centers[a][k] - centers[b][k]).powi(2))
                .sum()
        };
        let r2 = atom_radius * atom_radius;
        let excl2 = 4.0 * r2;
        let mut work: Vec<f64> = m.masses().to_vec();
        let mut atoms: Vec<(usize, f64)> = Vec::new();
        loop {
            let mut best: Option<(usize, f64)> = None;
            for c in 0..g.cell_count() {
                if atoms.iter().any(|(a, _)| dist2(c, *a) < excl2) {
                    continue;
                }
                let ball: f64 = (0..g.cell_count())
                    .filter(|&d| work[d] != 0.0 && dist2(c, d) <= r2)
                    .map(|d| work[d])
                    .sum();
                let better = match best {
                    None => ball > 0.0,
                    Some((_, bm)) => ball > bm,
                };
                if better {
                    best = Some((c, ball));
                }
            }
            match best {
                Some((c, mass)) if mass >= threshold => {
                    for d in 0..g.cell_count() {
                        if dist2(c, d) <= r2 {
                            work[d] = 0.0;
                        }
                    }
                    atoms.push((c, mass));
                }
                _ => break,
            }
        }
        let extracted: f64 = atoms.iter().map(|(_, m)| m).sum();
        let diffuse_mass = (total - extracted).max(0.0);
        Ok(AtomicDecomposition { atoms, diffuse_mass, atom_radius, threshold })
    }

    /// Assemble a decomposition from explicit atoms, validating the
    /// threshold, separation and nonnegative diffuse part.
    pub fn from_atoms(
        grid: &Arc<Grid>,
        atoms: Vec<(usize, f64)>,
        diffuse_mass: f64,
        atom_radius: f64,
        threshold: f64,
    ) -> Result<AtomicDecomposition> {
        if diffuse_mass < 0.0 {
            return Err(Error::InvalidParameters("diffuse mass must be >= 0".into()));
        }
        for (i, (cell_a, mass)) in atoms.iter().enumerate() {
            if *mass < threshold {
                return Err(Error::InvalidParameters(format!(
                    "atom mass {mass} below threshold {threshold}"
                )));
            }
            for (cell_b, _) in atoms.iter().skip(i + 1) {
                let ca = grid.cell_center(*cell_a);
                let cb = grid.cell_center(*cell_b);
                let d2: f64 = (0..grid.dim()).map(|k| (ca[k] - cb[k]).powi(2)).sum();
                if d2.sqrt() < 2.0 * atom_radius {
                    return Err(Error::InvalidParameters(
                        "atoms closer than twice the atom radius".into(),
                    ));
                }
            }
        }
        Ok(AtomicDecomposition { atoms, diffuse_mass, atom_radius, threshold })
    }

    pub fn total_mass(&self) -> f64 {
        self.diffuse_mass + self.atoms.iter().map(|(_, m)| m).sum::<f64>()
    }
}

/// Plain modular with exponent q(x) - eps.
pub fn eval_f_eps(u: &GridFunction, eps: f64, q: &ExponentField) -> Result<f64> {
    let shifted = q.shifted(eps)?;
    modular(u, &shifted)
}

/// Limit functional: modular of |u|^{q(x)} plus the atomic contributions
/// mass_i^{p*(x_i)/p(x_i)} sbar_{x_i}^{-p*(x_i)}, with sbar values supplied
/// per atom cell (quotient-form localized constants).
pub fn eval_f_star(
    u: &GridFunction,
    atoms: &AtomicDecomposition,
    p: &ExponentField,
    q: &ExponentField,
    localized: &HashMap<usize, f64>,
) -> Result<f64> {
    same_grid(p.grid(), q.grid(), "limit functional exponents")?;
    same_grid(u.grid(), p.grid(), "limit functional operands")?;
    let conj = sobolev_conjugate(p, p.grid().dim())?;
    let mut acc = modular(u, q)?;
    for (cell, mass) in &atoms.atoms {
        if !conj.is_finite(*cell) {
            return Err(Error::InfiniteSobolevConjugate(*cell));
        }
        let sbar = localized
            .get(cell)
            .copied()
            .ok_or(Error::MissingLocalizedConstant(*cell))?;
        let pstar = conj.value(*cell);
        let pc = p.value(*cell);
        acc += mass.powf(pstar / pc) * sbar.powf(-pstar);
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// localized constants
// ---------------------------------------------------------------------------

/// Localized best constant: per-radius extremal values on balls around a
/// center, with the shrinking-radius extrapolation.
#[derive(Debug, Clone)]
pub struct LocalizedConstant {
    pub center: [f64; 2],
    /// (radius, extremal value), radii strictly decreasing.
    pub values: Vec<(f64, f64)>,
    pub extrapolated: f64,
}

pub fn localized_constant(
    p: &ExponentField,
    q: &ExponentField,
    center: [f64; 2],
    radii: &[f64],
    eps: f64,
    opts: &SolverOptions,
) -> Result<LocalizedConstant> {
    if radii.is_empty() {
        return Err(Error::InvalidParameters("need at least one radius".into()));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameters("radii must be strictly decreasing".into()));
    }
    let grid = p.grid();
    let per_radius: Vec<Result<(f64, f64)>> = radii
        .par_iter()
        .map(|&r| {
            let mask = restrict_to_ball(grid, center, r)?;
            let prob = ExtremalProblem::new(p.clone(), q.clone(), eps, Some(mask))?;
            let rec = solve_with_warm_start(&prob, opts, None)?;
            Ok((r, rec.objective))
        })
        .collect();
    let mut values = Vec::with_capacity(radii.len());
    for item in per_radius {
        values.push(item?);
    }
    let extrapolated = extrapolate_limit(&values);
    Ok(LocalizedConstant { center, values, extrapolated })
}

/// Per-radius sample of the two routes to the localized constant.
#[derive(Debug, Clone, Copy)]
pub struct SoblocSample {
    pub radius: f64,
    /// modular-form value: the extremal objective on the ball
    pub modular_value: f64,
    /// quotient-form value: gradient norm over the q-norm of the extremal
    pub quotient_value: f64,
    /// |modular - quotient^{-q(center)}| / max at this radius
    pub rel_gap: f64,
}

/// Two-route identity between the modular-form localized constant and the
/// quotient-form constant raised to -q(center).
#[derive(Debug, Clone)]
pub struct SoblocIdentity {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_gap: f64,
    pub per_radius: Vec<SoblocSample>,
}

impl SoblocIdentity {
    pub fn finest(&self) -> &SoblocSample {
        self.per_radius.last().expect("at least one radius")
    }
}

pub fn check_sobloc_identity(
    p: &ExponentField,
    q: &ExponentField,
    center: [f64; 2],
    radii: &[f64],
    opts: &SolverOptions,
) -> Result<SoblocIdentity> {
    if radii.is_empty() {
        return Err(Error::InvalidParameters("need at least one radius".into()));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameters("radii must be strictly decreasing".into()));
    }
    let grid = p.grid();
    let q_center = q.value_at(center);
    let samples: Vec<Result<SoblocSample>> = radii
        .par_iter()
        .map(|&r| {
            let mask = if r >= grid.domain_diameter() {
                CellMask::full(grid.clone())
            } else {
                restrict_to_ball(grid, center, r)?
            };
            let prob = ExtremalProblem::new(p.clone(), q.clone(), 0.0, Some(mask))?;
            let rec = solve_with_warm_start(&prob, opts, None)?;
            let quotient = quotient_from_record(&rec)?;
            let two_route = quotient.powf(-q_center);
            let rel_gap =
                (rec.objective - two_route).abs() / rec.objective.max(two_route);
            Ok(SoblocSample {
                radius: r,
                modular_value: rec.objective,
                quotient_value: quotient,
                rel_gap,
            })
        })
        .collect();
    let mut per_radius = Vec::with_capacity(radii.len());
    for s in samples {
        per_radius.push(s?);
    }
    let modular_series: Vec<(f64, f64)> =
        per_radius.iter().map(|s| (s.radius, s.modular_value)).collect();
    let quotient_series: Vec<(f64, f64)> =
        per_radius.iter().map(|s| (s.radius, s.quotient_value)).collect();
    let lhs = extrapolate_limit(&modular_series);
    let sbar = extrapolate_limit(&quotient_series);
    let rhs = sbar.powf(-q_center);
    let rel_gap = (lhs - rhs).abs() / lhs.max(rhs);
    Ok(SoblocIdentity { lhs, rhs, rel_gap, per_radius })
}

// ---------------------------------------------------------------------------
// sweeps and the dichotomy classifier
// ---------------------------------------------------------------------------

/// The eps-independent part of an extremal problem.
#[derive(Debug, Clone)]
pub struct ProblemFamily {
    pub p: ExponentField,
    pub q: ExponentField,
    pub mask: Option<CellMask>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Compact,
    Concentrating,
    Undecided,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Classification::Compact => write!(f, "compact"),
            Classification::Concentrating => write!(f, "concentrating"),
            Classification::Undecided => write!(f, "undecided"),
        }
    }
}

/// Sweep controls: solver options plus the classifier's desk-scale knobs,
/// surfaced in every report.
#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub solver: SolverOptions,
    /// Concentration probe radius; defaults to 4 grid spacings.
    pub ball_radius: Option<f64>,
    /// Tolerance defining the critical set; defaults to the grid spacing.
    pub crit_tol: Option<f64>,
    /// Energy fraction in the probe ball that counts as concentrating.
    pub conc_threshold: f64,
    /// Difference-modular fraction of the objective that counts as compact.
    pub compact_threshold: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            solver: SolverOptions::default(),
            ball_radius: None,
            crit_tol: None,
            conc_threshold: 0.9,
            compact_threshold: 0.05,
        }
    }
}

/// One sweep step; `record` is None when the solver failed at this eps.
#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub eps: f64,
    pub record: Option<ExtremalRecord>,
    pub conc_ratio: Option<f64>,
    pub argmax_cell: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub entries: Vec<SweepEntry>,
    pub limit_estimate: f64,
    pub classification: Classification,
    pub concentration_point: Option<usize>,
    pub diff_modular: Option<f64>,
    pub ball_radius: f64,
    pub conc_threshold: f64,
    pub compact_threshold: f64,
}

impl SweepReport {
    pub fn successful_records(&self) -> Vec<&ExtremalRecord> {
        self.entries.iter().filter_map(|e| e.record.as_ref()).collect()
    }
}

/// Cell index maximizing |u| among midpoint samples (ties: lowest index).
pub fn argmax_cell(u: &GridFunction) -> usize {
    let cells = u.cell_samples();
    let mut best = 0usize;
    let mut best_v = f64::NEG_INFINITY;
    for (c, v) in cells.values().iter().enumerate() {
        let a = v.abs();
        if a > best_v {
            best_v = a;
            best = c;
        }
    }
    best
}

fn concentration_ratio(rec: &ExtremalRecord, radius: f64) -> Result<(usize, f64)> {
    let cell = argmax_cell(&rec.u);
    let em = energy_measure(&rec.u, rec.problem.p())?;
    let total = em.total_mass();
    let ratio = if total > 0.0 {
        em.mass_in_ball(rec.problem.grid().cell_center(cell), radius) / total
    } else {
        0.0
    };
    Ok((cell, ratio))
}

/// Diagnostics backing a dichotomy classification.
#[derive(Debug, Clone)]
pub struct DichotomyReport {
    pub classification: Classification,
    pub conc_ratio: f64,
    pub argmax_cells: Vec<usize>,
    pub diff_modular: f64,
    pub concentration_point: Option<usize>,
    pub ball_radius: f64,
    pub conc_threshold: f64,
    pub compact_threshold: f64,
}

/// Classify an extremal sequence: concentrating when the last extremal packs
/// more than the threshold fraction of gradient energy into the probe ball
/// around a stable argmax that lies in the critical set; compact when the
/// difference modular of the last two extremals is small against the
/// objective and no such packing occurs; undecided otherwise.
pub fn classify_dichotomy(
    records: &[&ExtremalRecord],
    radius: f64,
    crit: &CriticalSetReport,
    conc_threshold: f64,
    compact_threshold: f64,
) -> Result<DichotomyReport> {
    if records.len() < 3 {
        return Err(Error::TooFewRecords(records.len()));
    }
    let grid = records[0].problem.grid().clone();
    for rec in records {
        same_grid(rec.problem.grid(), &grid, "dichotomy records")?;
    }
    let min_r = 2.0 * grid.max_spacing();
    if !(radius >= min_r) {
        return Err(Error::BallTooSmall { radius, min: min_r });
    }
    let argmax_cells: Vec<usize> = records.iter().map(|r| argmax_cell(&r.u)).collect();
    let last = records[records.len() - 1];
    let prev = records[records.len() - 2];
    let (last_cell, conc_ratio) = concentration_ratio(last, radius)?;

    // sign-aligned difference modular in L^{q(x)} (strong-convergence probe)
    let inner: f64 = last
        .u
        .values()
        .iter()
        .zip(prev.u.values())
        .map(|(a, b)| a * b)
        .sum();
    let sign = if inner < 0.0 { -1.0 } else { 1.0 };
    let diff = last.u.linear_comb(1.0, &prev.u, -sign)?;
    let diff_modular = modular(&diff, last.problem.q())?;

    let tail = &argmax_cells[argmax_cells.len() - 3..];
    let stable = tail.iter().all(|&a| {
        tail.iter().all(|&b| {
            let ca = grid.cell_center(a);
            let cb = grid.cell_center(b);
            let d2: f64 = (0..grid.dim()).map(|k| (ca[k] - cb[k]).powi(2)).sum();
            d2.sqrt() <= radius
        })
    });
    let concentrating = conc_ratio > conc_threshold && stable && crit.contains(last_cell);
    let compact =
        diff_modular < compact_threshold * last.objective && conc_ratio < 0.5;
    let classification = if concentrating {
        Classification::Concentrating
    } else if compact {
        Classification::Compact
    } else {
        Classification::Undecided
    };
    Ok(DichotomyReport {
        classification,
        conc_ratio,
        argmax_cells,
        diff_modular,
        concentration_point: if concentrating { Some(last_cell) } else { None },
        ball_radius: radius,
        conc_threshold,
        compact_threshold,
    })
}

/// Solve the family along a strictly decreasing eps schedule with warm
/// starts, extrapolate the limit and classify the extremal sequence. Solver
/// failures mark their entry and the sweep continues.
pub fn run_sweep(
    family: &ProblemFamily,
    schedule: &[f64],
    opts: &SweepOptions,
) -> Result<SweepReport> {
    if schedule.is_empty() {
        return Err(Error::InvalidParameters("empty eps schedule".into()));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameters(
            "eps schedule must be strictly decreasing".into(),
        ));
    }
    if schedule.iter().any(|e| *e < 0.0) {
        return Err(Error::InvalidParameters("eps must be nonnegative".into()));
    }
    same_grid(family.p.grid(), family.q.grid(), "sweep exponents")?;
    let grid = family.p.grid().clone();
    let radius = opts.ball_radius.unwrap_or(4.0 * grid.max_spacing());
    let crit_tol = opts.crit_tol.unwrap_or(grid.max_spacing());

    let mut entries: Vec<SweepEntry> = Vec::with_capacity(schedule.len());
    let mut warm: Option<GridFunction> = None;
    for &eps in schedule {
        let attempt = ExtremalProblem::new(
            family.p.clone(),
            family.q.clone(),
            eps,
            family.mask.clone(),
        )
        .and_then(|prob| solve_with_warm_start(&prob, &opts.solver, warm.as_ref()));
        match attempt {
            Ok(rec) => {
                warm = Some(rec.u.clone());
                let (cell, ratio) = concentration_ratio(&rec, radius)?;
                entries.push(SweepEntry {
                    eps,
                    record: Some(rec),
                    conc_ratio: Some(ratio),
                    argmax_cell: Some(cell),
                });
            }
            Err(_) => {
                entries.push(SweepEntry {
                    eps,
                    record: None,
                    conc_ratio: None,
                    argmax_cell: None,
                });
            }
        }
    }
    let series: Vec<(f64, f64)> = entries
        .iter()
        .filter_map(|e| e.record.as_ref().map(|r| (e.eps, r.objective)))
        .collect();
    if series.is_empty() {
        return Err(Error::NonConvergence(opts.solver.max_iters));
    }
    let limit_estimate = extrapolate_limit(&series);

    let successes: Vec<&ExtremalRecord> =
        entries.iter().filter_map(|e| e.record.as_ref()).collect();
    let crit = critical_set(&family.p, &family.q, grid.dim(), crit_tol)?;
    let (classification, concentration_point, diff_modular) = if successes.len() >= 3 {
        let rep = classify_dichotomy(
            &successes,
            radius,
            &crit,
            opts.conc_threshold,
            opts.compact_threshold,
        )?;
        (rep.classification, rep.concentration_point, Some(rep.diff_modular))
    } else {
        (Classification::Undecided, None, None)
    };
    Ok(SweepReport {
        entries,
        limit_estimate,
        classification,
        concentration_point,
        diff_modular,
        ball_radius: radius,
        conc_threshold: opts.conc_threshold,
        compact_threshold: opts.compact_threshold,
    })
}

// ---------------------------------------------------------------------------
// sufficient condition
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SufficientConditionOptions {
    /// Shrinking ball radii for the localized solves.
    pub radii: Vec<f64>,
    /// Subcritical shift used in the localized solves.
    pub eps: f64,
    /// Strictness margin: strict when sup_local < global (1 - margin).
    pub margin: f64,
    /// Number of critical cells sampled (evenly over the critical set).
    pub max_cells: usize,
    pub solver: SolverOptions,
}

impl SufficientConditionOptions {
    pub fn new(radii: Vec<f64>, eps: f64) -> Self {
        SufficientConditionOptions {
            radii,
            eps,
            margin: 0.02,
            max_cells: 5,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SufficientCondition {
    pub sup_local: f64,
    pub global: f64,
    pub strict: bool,
    /// (cell, extrapolated localized constant) for each sampled cell.
    pub samples: Vec<(usize, f64)>,
}

/// Compare the localized constants over a sample of critical cells against
/// the global constant.
pub fn check_sufficient_condition(
    p: &ExponentField,
    q: &ExponentField,
    crit: &CriticalSetReport,
    global_value: f64,
    opts: &SufficientConditionOptions,
) -> Result<SufficientCondition> {
    if crit.is_empty() {
        return Err(Error::EmptyCriticalSet);
    }
    let grid = p.grid();
    let count = opts.max_cells.clamp(1, crit.cells.len());
    // deterministic farthest-point sample seeded at the most interior
    // critical cell: localized values are largest where balls fit whole, so
    // an edge-heavy sample would systematically undershoot the sup
    let boundary_distance = |cell: usize| -> f64 {
        let x = grid.cell_center(cell);
        (0..grid.dim())
            .map(|k| {
                let (lo, hi) = grid.extents(k);
                (x[k] - lo).min(hi - x[k])
            })
            .fold(f64::INFINITY, f64::min)
    };
    let dist2 = |a: usize, b: usize| -> f64 {
        let xa = grid.cell_center(a);
        let xb = grid.cell_center(b);
        (0..grid.dim()).map(|k| (xa[k] - xb[k]).powi(2)).sum()
    };
    let seed_cell = *crit
        .cells
        .iter()
        .max_by(|&&a, &&b| {
            boundary_distance(a)
                .partial_cmp(&boundary_distance(b))
                .unwrap()
                .then(b.cmp(&a))
        })
        .expect("non-empty critical set");
    let mut picked = vec![seed_cell];
    while picked.len() < count {
        let next = crit
            .cells
            .iter()
            .filter(|c| !picked.contains(c))
            .max_by(|&&a, &&b| {
                let da = picked.iter().map(|&p| dist2(a, p)).fold(f64::INFINITY, f64::min);
                let db = picked.iter().map(|&p| dist2(b, p)).fold(f64::INFINITY, f64::min);
                da.partial_cmp(&db).unwrap().then(b.cmp(&a))
            });
        match next {
            Some(&c) => picked.push(c),
            None => break,
        }
    }
    let samples: Vec<Result<(usize, f64)>> = picked
        .par_iter()
        .map(|&cell| {
            let center = grid.cell_center(cell);
            let loc = localized_constant(p, q, center, &opts.radii, opts.eps, &opts.solver)?;
            Ok((cell, loc.extrapolated))
        })
        .collect();
    let mut resolved = Vec::with_capacity(samples.len());
    for s in samples {
        resolved.push(s?);
    }
    let sup_local = resolved.iter().map(|(_, v)| *v).fold(f64::NEG_INFINITY, f64::max);
    let strict = sup_local < global_value * (1.0 - opts.margin);
    Ok(SufficientCondition { sup_local, global: global_value, strict, samples: resolved })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::modular::cell_modular;
    use crate::solver::objective;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn unit_interval(n: usize) -> Arc<Grid> {
        Arc::new(Grid::interval(0.0, 1.0, n).unwrap())
    }

    fn unit_square(n: usize) -> Arc<Grid> {
        Arc::new(Grid::rectangle([0.0, 0.0], [1.0, 1.0], [n, n]).unwrap())
    }

    #[test]
    fn extrapolation_recovers_power_law() {
        let pts: Vec<(f64, f64)> = [0.4, 0.2, 0.1, 0.05]
            .iter()
            .map(|&x: &f64| (x, 2.0 + 3.0 * x.powf(1.3)))
            .collect();
        let a = extrapolate_limit(&pts);
        assert_relative_eq!(a, 2.0, max_relative = 1e-6);
    }

    #[test]
    fn extrapolation_single_point_fallback() {
        assert_eq!(extrapolate_limit(&[(0.5, 1.25)]), 1.25);
    }

    #[test]
    fn extrapolation_non_monotone_fallback() {
        let pts = [(0.4, 1.0), (0.2, 2.0), (0.1, 1.5)];
        assert_eq!(extrapolate_limit(&pts), 1.5);
    }

    #[test]
    fn bubble_energy_hits_target() {
        let g = unit_square(32);
        let p = ExponentField::constant(g.clone(), 1.5).unwrap();
        for target in [1.0, 0.4, 0.07] {
            let b = make_bubble([0.5, 0.5], 0.4, &p, target, BubbleProfile::SmoothCompact)
                .unwrap();
            let e = cell_modular(&b.gradient().magnitude(), &p).unwrap();
            assert!((e - target).abs() <= 1e-8, "target {target}, got {e}");
        }
    }

    #[test]
    fn bubble_boundary_clearance_enforced() {
        let g = unit_square(32);
        let p = ExponentField::constant(g.clone(), 1.5).unwrap();
        assert!(matches!(
            make_bubble([0.1, 0.5], 0.4, &p, 0.5, BubbleProfile::SmoothCompact),
            Err(Error::BubbleTouchesBoundary(_))
        ));
    }

    #[test]
    fn bubble_target_mass_validated() {
        let g = unit_square(32);
        let p = ExponentField::constant(g.clone(), 1.5).unwrap();
        assert!(matches!(
            make_bubble([0.5, 0.5], 0.4, &p, 0.0, BubbleProfile::Tent),
            Err(Error::TargetMassInfeasible(_))
        ));
        assert!(matches!(
            make_bubble([0.5, 0.5], 0.4, &p, 1.5, BubbleProfile::Tent),
            Err(Error::TargetMassInfeasible(_))
        ));
    }

    #[test]
    fn bubble_lp_modular_vanishes_with_eps() {
        let g = unit_square(48);
        let p = ExponentField::constant(g.clone(), 1.5).unwrap();
        let diam = g.domain_diameter();
        let mut prev = f64::INFINITY;
        for factor in [0.25, 0.125, 0.0625] {
            let b = make_bubble(
                [0.5, 0.5],
                factor * diam,
                &p,
                1.0,
                BubbleProfile::SmoothCompact,
            )
            .unwrap();
            let lp = modular(&b, &p).unwrap();
            assert!(lp < prev, "L^p modular should decrease, {lp} !< {prev}");
            prev = lp;
        }
    }

    #[test]
    fn bubble_pairing_approaches_dirac() {
        let g = unit_square(48);
        let p = ExponentField::constant(g.clone(), 1.5).unwrap();
        let center = [0.5, 0.5];
        let psi = |x: &[f64]| 1.0 + x[0] + 0.5 * (PI * x[1]).sin();
        let psi_at_center = 1.0 + 0.5 + 0.5;
        let mut gaps = Vec::new();
        for factor in [0.25, 0.125, 0.0625] {
            let eps = factor * g.domain_diameter();
            let b = make_bubble(center, eps, &p, 0.8, BubbleProfile::SmoothCompact).unwrap();
            let em = energy_measure(&b, &p).unwrap();
            let paired: f64 = em
                .masses()
                .iter()
                .enumerate()
                .map(|(c, m)| {
                    let x = g.cell_center(c);
                    psi(&x[..2]) * m
                })
                .sum();
            gaps.push((paired - psi_at_center * 0.8).abs());
        }
        assert!(gaps[1] < gaps[0]);
        assert!(gaps[2] < gaps[1]);
    }

    #[test]
    fn unscaled_bubble_energy_is_scale_invariant() {
        // amplitude eps^{-(n-p)/p} makes the gradient-energy modular of the
        // raw profile independent of eps at constant p (exact in the
        // continuum, small drift on the grid)
        let g = unit_square(48);
        let p = ExponentField::constant(g.clone(), 1.5).unwrap();
        let energy_at = |eps: f64| {
            let amp = eps.powf(-(2.0 - 1.5) / 1.5);
            let u = GridFunction::from_fn(g.clone(), |x| {
                let y2 = ((x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2)) / (eps * eps);
                if y2 < 0.25 {
                    amp * (1.0 / (y2 - 0.25)).exp()
                } else {
                    0.0
                }
            });
            cell_modular(&u.gradient().magnitude(), &p).unwrap()
        };
        let a = energy_at(0.5);
        let b = energy_at(0.25);
        assert!((a - b).abs() / a.max(b) < 0.05, "drift {a} vs {b}");
    }

    #[test]
    fn single_bubble_f_eps_approaches_matched_localized_constant() {
        // shrinking tent bubbles of unit energy, evaluated with the eps
        // shift tied to the bubble scale, approach the localized constant
        // computed on balls of the same support radius
        let g = unit_square(48);
        let p = ExponentField::constant(g.clone(), 1.5).unwrap();
        let q = ExponentField::constant(g.clone(), 6.0).unwrap();
        let opts = SolverOptions::default();
        let mut gaps = Vec::new();
        for eps in [0.3, 0.2, 0.125] {
            let u = make_bubble([0.5, 0.5], eps, &p, 1.0, BubbleProfile::Tent).unwrap();
            let lhs = eval_f_eps(&u, eps, &q).unwrap();
            let loc =
                localized_constant(&p, &q, [0.5, 0.5], &[eps / 2.0], 0.0, &opts).unwrap();
            let rhs = loc.extrapolated;
            gaps.push((lhs - rhs).abs() / rhs.max(lhs));
        }
        assert!(
            gaps[2] < gaps[0],
            "gap should shrink along the schedule: {gaps:?}"
        );
        assert!(gaps[2] < 0.25, "final gap too wide: {gaps:?}");
    }

    #[test]
    fn multi_bubble_energy_additivity() {
        let g = unit_square(48);
        let p = ExponentField::constant(g.clone(), 1.5).unwrap();
        let atoms = [([0.3, 0.3], 0.3), ([0.72, 0.72], 0.4)];
        let u = make_multi_bubble(&atoms, 0.3, &p, BubbleProfile::SmoothCompact).unwrap();
        let e = cell_modular(&u.gradient().magnitude(), &p).unwrap();
        assert!((e - 0.7).abs() < 1e-6, "total energy {e}");
        // each atom's share sits in its own neighborhood
        let em = energy_measure(&u, &p).unwrap();
        let m0 = em.mass_in_ball([0.3, 0.3], 0.3);
        let m1 = em.mass_in_ball([0.72, 0.72], 0.3);
        assert!((m0 - 0.3).abs() < 1e-6);
        assert!((m1 - 0.4).abs() < 1e-6);
    }

    #[test]
    fn multi_bubble_single_atom_reduces_to_make_bubble() {
        let g = unit_square(32);
        let p = ExponentField::constant(g.clone(), 1.5).unwrap();
        let u = make_multi_bubble(&[([0.5, 0.5], 0.25)], 0.3, &p, BubbleProfile::Tent).unwrap();
        let v = make_bubble([0.5, 0.5], 0.3, &p, 0.25, BubbleProfile::Tent).unwrap();
        for (a, b) in u.values().iter().zip(v.values()) {
            assert_relative_eq!(a, b, max_relative = 1e-9, epsilon = 1e-12);
        }
    }

    #[test]
    fn multi_bubble_rejects_overlap_and_budget() {
        let g = unit_square(32);
        let p = ExponentField::constant(g.clone(), 1.5).unwrap();
        assert!(matches!(
            make_multi_bubble(
                &[([0.4, 0.5], 0.3), ([0.5, 0.5], 0.3)],
                0.3,
                &p,
                BubbleProfile::Tent
            ),
            Err(Error::OverlappingSupports(0, 1))
        ));
        assert!(matches!(
            make_multi_bubble(
                &[([0.3, 0.3], 0.6), ([0.7, 0.7], 0.5)],
                0.3,
                &p,
                BubbleProfile::Tent
            ),
            Err(Error::MassBudgetExceeded(_))
        ));
    }

    #[test]
    fn atomic_decomposition_detects_two_bubbles() {
        let g = unit_square(48);
        let p = ExponentField::constant(g.clone(), 1.5).unwrap();
        let atoms = [([0.3, 0.3], 0.3), ([0.72, 0.72], 0.4)];
        let u = make_multi_bubble(&atoms, 0.25, &p, BubbleProfile::SmoothCompact).unwrap();
        let em = energy_measure(&u, &p).unwrap();
        let total = em.total_mass();
        let dec = AtomicDecomposition::detect(&em, 0.18, 0.25 * total).unwrap();
        assert_eq!(dec.atoms.len(), 2);
        assert_relative_eq!(
            dec.atoms.iter().map(|(_, m)| m).sum::<f64>() + dec.diffuse_mass,
            total,
            epsilon = 1e-9
        );
        // the detected seeds sit near the planted centers
        let mut found = [false; 2];
        for (cell, _) in &dec.atoms {
            let x = g.cell_center(*cell);
            for (i, (c, _)) in atoms.iter().enumerate() {
                let d = ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)).sqrt();
                if d < 0.1 {
                    found[i] = true;
                }
            }
        }
        assert!(found[0] && found[1]);
    }

    #[test]
    fn atomic_decomposition_diffuse_measure_has_no_atoms() {
        let g = unit_interval(32);
        let masses = vec![0.01; 32];
        let m = crate::grid::DiscreteMeasure::new(g.clone(), masses).unwrap();
        let dec = AtomicDecomposition::detect(&m, 0.1, 0.25 * m.total_mass()).unwrap();
        assert!(dec.atoms.is_empty());
        assert_relative_eq!(dec.diffuse_mass, m.total_mass(), epsilon = 1e-12);
    }

    #[test]
    fn f_star_no_atoms_is_plain_modular() {
        let g = unit_interval(16);
        let p = ExponentField::constant(g.clone(), 2.0).unwrap();
        let q = ExponentField::constant(g.clone(), 2.0).unwrap();
        let u = GridFunction::from_fn(g.clone(), |x| (PI * x[0]).sin());
        let dec =
            AtomicDecomposition::from_atoms(&g, vec![], 0.0, 0.1, 0.25).unwrap();
        let fstar = eval_f_star(&u, &dec, &p, &q, &HashMap::new()).unwrap();
        assert_relative_eq!(fstar, modular(&u, &q).unwrap(), epsilon = 1e-14);
        assert_relative_eq!(fstar, eval_f_eps(&u, 0.0, &q).unwrap(), epsilon = 1e-14);
    }

    #[test]
    fn f_star_single_unit_atom() {
        let g = unit_square(16);
        let p = ExponentField::constant(g.clone(), 1.5).unwrap();
        let q = ExponentField::constant(g.clone(), 6.0).unwrap();
        let u = GridFunction::zero(g.clone());
        let cell = g.cell_linear(8, 8);
        let dec = AtomicDecomposition::from_atoms(&g, vec![(cell, 1.0)], 0.0, 0.1, 0.25)
            .unwrap();
        let sbar = 1.7;
        let mut loc = HashMap::new();
        loc.insert(cell, sbar);
        let fstar = eval_f_star(&u, &dec, &p, &q, &loc).unwrap();
        // p* = 6 here, so the atom contributes sbar^{-6}
        assert_relative_eq!(fstar, sbar.powf(-6.0), epsilon = 1e-12);
    }

    #[test]
    fn f_star_missing_localized_constant() {
        let g = unit_square(16);
        let p = ExponentField::constant(g.clone(), 1.5).unwrap();
        let q = ExponentField::constant(g.clone(), 6.0).unwrap();
        let u = GridFunction::zero(g.clone());
        let dec = AtomicDecomposition::from_atoms(&g, vec![(12, 0.5)], 0.0, 0.1, 0.25)
            .unwrap();
        assert!(matches!(
            eval_f_star(&u, &dec, &p, &q, &HashMap::new()),
            Err(Error::MissingLocalizedConstant(12))
        ));
    }

    #[test]
    fn f_eps_converges_to_f_star_for_fixed_function() {
        let g = unit_interval(32);
        let q = ExponentField::constant(g.clone(), 3.0).unwrap();
        let u = GridFunction::from_fn(g.clone(), |x| 1.8 * (PI * x[0]).sin());
        let f0 = eval_f_eps(&u, 0.0, &q).unwrap();
        let mut prev_gap = f64::INFINITY;
        for eps in [0.5, 0.25, 0.125, 0.0625] {
            let gap = (eval_f_eps(&u, eps, &q).unwrap() - f0).abs();
            assert!(gap < prev_gap);
            prev_gap = gap;
        }
    }

    #[test]
    fn sweep_subcritical_limit_matches_direct_solve() {
        let g = unit_interval(128);
        let family = ProblemFamily {
            p: ExponentField::constant(g.clone(), 2.0).unwrap(),
            q: ExponentField::constant(g.clone(), 2.0).unwrap(),
            mask: None,
        };
        let opts = SweepOptions { solver: SolverOptions { restarts: 2, ..Default::default() }, ..Default::default() };
        let report = run_sweep(&family, &[0.5, 0.25, 0.125, 0.0], &opts).unwrap();
        let direct = report.entries.last().unwrap().record.as_ref().unwrap().objective;
        assert_relative_eq!(report.limit_estimate, direct, max_relative = 0.01);
        // schedule of length 1 falls back to that objective
        let single = run_sweep(&family, &[0.25], &opts).unwrap();
        let obj = single.entries[0].record.as_ref().unwrap().objective;
        assert_eq!(single.limit_estimate, obj);
    }

    #[test]
    fn classifier_compact_on_repeated_extremal() {
        let g = unit_interval(64);
        let p = ExponentField::constant(g.clone(), 2.0).unwrap();
        let q = ExponentField::constant(g.clone(), 2.0).unwrap();
        let prob = ExtremalProblem::new(p.clone(), q.clone(), 0.0, None).unwrap();
        let rec = solve_with_warm_start(
            &prob,
            &SolverOptions { restarts: 2, ..Default::default() },
            None,
        )
        .unwrap();
        let records = [&rec, &rec, &rec];
        let crit = critical_set(&p, &q, 1, g.spacing(0)).unwrap();
        let rep = classify_dichotomy(&records, 0.1, &crit, 0.9, 0.05).unwrap();
        assert_eq!(rep.classification, Classification::Compact);
        assert!(rep.diff_modular < 1e-12);
        assert!(rep.conc_ratio < 0.5);
    }

    #[test]
    fn classifier_concentrating_on_bubble_sequence() {
        let g = unit_square(48);
        let p = ExponentField::constant(g.clone(), 1.5).unwrap();
        let q = ExponentField::constant(g.clone(), 6.0).unwrap();
        let crit = critical_set(&p, &q, 2, g.spacing(0)).unwrap();
        let mut records = Vec::new();
        for eps in [0.5, 0.35, 0.25] {
            let u = make_bubble([0.5, 0.5], eps, &p, 1.0, BubbleProfile::SmoothCompact)
                .unwrap();
            let prob = ExtremalProblem::new(p.clone(), q.clone(), 0.5, None).unwrap();
            let obj = objective(&u, &prob).unwrap();
            records.push(ExtremalRecord {
                problem: prob,
                grad_norm: 1.0,
                objective: obj,
                iterations: 0,
                restarts_used: 0,
                converged: true,
                critical: false,
                trace: vec![obj],
                u,
            });
        }
        let refs: Vec<&ExtremalRecord> = records.iter().collect();
        let rep = classify_dichotomy(&refs, 0.15, &crit, 0.9, 0.05).unwrap();
        assert_eq!(rep.classification, Classification::Concentrating);
        let cell = rep.concentration_point.unwrap();
        let x = g.cell_center(cell);
        assert!((x[0] - 0.5).abs() < 0.05 && (x[1] - 0.5).abs() < 0.05);
    }

    #[test]
    fn classifier_undecided_on_alternating_argmax() {
        let g = unit_interval(64);
        let p = ExponentField::constant(g.clone(), 2.0).unwrap();
        let q = ExponentField::constant(g.clone(), 2.0).unwrap();
        let crit = critical_set(&p, &q, 1, g.spacing(0)).unwrap();
        let prob = ExtremalProblem::new(p.clone(), q.clone(), 0.0, None).unwrap();
        let mk = |center: f64| {
            // narrow hat concentrating energy away from the other one
            let u = GridFunction::from_fn(g.clone(), |x| {
                let d = (x[0] - center).abs();
                (0.05 - d).max(0.0) / 0.05
            });
            let obj = objective(&u, &prob).unwrap();
            ExtremalRecord {
                problem: prob.clone(),
                grad_norm: 1.0,
                objective: obj,
                iterations: 0,
                restarts_used: 0,
                converged: true,
                critical: false,
                trace: vec![obj],
                u,
            }
        };
        let a = mk(0.2);
        let b = mk(0.8);
        let refs = [&a, &b, &a];
        let rep = classify_dichotomy(&refs, 0.1, &crit, 0.9, 0.05).unwrap();
        assert_eq!(rep.classification, Classification::Undecided);
    }

    #[test]
    fn classifier_needs_three_records() {
        let g = unit_interval(64);
        let p = ExponentField::constant(g.clone(), 2.0).unwrap();
        let q = ExponentField::constant(g.clone(), 2.0).unwrap();
        let crit = critical_set(&p, &q, 1, g.spacing(0)).unwrap();
        let prob = ExtremalProblem::new(p, q, 0.0, None).unwrap();
        let rec = solve_with_warm_start(
            &prob,
            &SolverOptions { restarts: 1, ..Default::default() },
            None,
        )
        .unwrap();
        assert!(matches!(
            classify_dichotomy(&[&rec, &rec], 0.1, &crit, 0.9, 0.05),
            Err(Error::TooFewRecords(2))
        ));
    }

    #[test]
    fn localized_constant_full_domain_matches_global() {
        let g = unit_interval(64);
        let p = ExponentField::constant(g.clone(), 2.0).unwrap();
        let q = ExponentField::constant(g.clone(), 2.0).unwrap();
        let opts = SolverOptions { restarts: 2, ..Default::default() };
        let loc = localized_constant(&p, &q, [0.5, 0.0], &[2.0], 0.0, &opts).unwrap();
        let prob = ExtremalProblem::new(p, q, 0.0, None).unwrap();
        let global = solve_with_warm_start(&prob, &opts, None).unwrap().objective;
        assert_relative_eq!(loc.values[0].1, global, max_relative = 1e-6);
    }

    #[test]
    fn localized_constant_monotone_in_radius() {
        let g = unit_interval(64);
        let p = ExponentField::constant(g.clone(), 2.0).unwrap();
        let q = ExponentField::constant(g.clone(), 2.0).unwrap();
        let opts = SolverOptions { restarts: 2, ..Default::default() };
        let loc =
            localized_constant(&p, &q, [0.5, 0.0], &[0.4, 0.3, 0.2, 0.1], 0.0, &opts).unwrap();
        for w in loc.values.windows(2) {
            assert!(w[1].1 <= w[0].1 * (1.0 + 5e-3), "{:?} -> {:?}", w[0], w[1]);
        }
    }

    #[test]
    fn localized_constant_translation_invariance() {
        let g = unit_interval(96);
        let p = ExponentField::constant(g.clone(), 2.0).unwrap();
        let q = ExponentField::constant(g.clone(), 2.0).unwrap();
        let opts = SolverOptions { restarts: 2, ..Default::default() };
        let a = localized_constant(&p, &q, [0.35, 0.0], &[0.2], 0.0, &opts).unwrap();
        let b = localized_constant(&p, &q, [0.65, 0.0], &[0.2], 0.0, &opts).unwrap();
        assert_relative_eq!(a.values[0].1, b.values[0].1, max_relative = 0.02);
    }

    #[test]
    fn sobloc_identity_constant_exponents_full_domain() {
        // single full-domain radius: the identity is pure algebra between
        // the modular objective and the quotient norm of the same extremal
        let g = unit_interval(128);
        let p = ExponentField::constant(g.clone(), 2.0).unwrap();
        let q = ExponentField::constant(g.clone(), 2.0).unwrap();
        let opts = SolverOptions::default();
        let rep = check_sobloc_identity(&p, &q, [0.5, 0.0], &[2.0], &opts).unwrap();
        assert!(rep.rel_gap < 1e-6, "rel gap {}", rep.rel_gap);
        assert_relative_eq!(rep.lhs, 1.0 / (PI * PI), max_relative = 0.01);
        assert_relative_eq!(rep.rhs, PI.powi(-2), max_relative = 0.01);
    }

    #[test]
    fn sufficient_condition_rejects_empty_critical_set() {
        let g = unit_interval(32);
        let p = ExponentField::constant(g.clone(), 2.0).unwrap();
        let q = ExponentField::constant(g.clone(), 2.0).unwrap();
        let crit = CriticalSetReport { cells: vec![], gap: vec![], tolerance: 1e-6 };
        let opts = SufficientConditionOptions::new(vec![0.2], 0.0);
        assert!(matches!(
            check_sufficient_condition(&p, &q, &crit, 0.1, &opts),
            Err(Error::EmptyCriticalSet)
        ));
    }
}
