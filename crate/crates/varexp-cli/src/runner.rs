//! Mode dispatch: build the experiment from a validated config, run it,
//! persist CSV artifacts plus a flat summary, and map failures to exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use sha2::{Digest, Sha256};

use varexp::solver::SolverOptions;
use varexp::{
    cell_luxemburg_norm, cell_modular, cell_norm_modular_bounds, critical_set,
    elementary_inequality_constant, energy_measure, localized_constant, make_bubble, run_sweep,
    solve, CellFunction, CriticalSetReport, Error as VxError, ExtremalProblem, ExtremalRecord,
    Grid, GridFunction, ProblemFamily, SweepOptions,
};

use crate::config::{ExperimentConfig, FunctionSpec, Mode};

/// Run outcome: summary lines plus the exit code the process should return.
#[derive(Debug)]
pub struct RunSummary {
    /// (key, value) lines in output order.
    pub lines: Vec<(String, String)>,
    #[cfg_attr(not(test), allow(dead_code))]
    pub artifacts: Vec<String>,
    pub exit_code: i32,
}

impl RunSummary {
    #[cfg_attr(not(test), allow(dead_code))]
    pub fn get(&self, key: &str) -> Option<&str> {
        self.lines
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv failure: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Domain(#[from] VxError),
}

struct Artifacts {
    dir: PathBuf,
    files: Vec<String>,
}

impl Artifacts {
    fn new(dir: &Path) -> Result<Artifacts, RunError> {
        fs::create_dir_all(dir)?;
        Ok(Artifacts { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn writer(&mut self, name: &str) -> Result<csv::Writer<fs::File>, RunError> {
        let path = self.dir.join(name);
        let w = csv::Writer::from_path(&path)?;
        self.files.push(name.to_string());
        Ok(w)
    }

    fn write_text(&mut self, name: &str, text: &str) -> Result<(), RunError> {
        fs::write(self.dir.join(name), text)?;
        self.files.push(name.to_string());
        Ok(())
    }
}

fn write_field_csv(
    art: &mut Artifacts,
    name: &str,
    grid: &Arc<Grid>,
    values: &[f64],
) -> Result<(), RunError> {
    let mut w = art.writer(name)?;
    w.write_record(["cell_index", "center_x", "center_y", "value"])?;
    for (c, v) in values.iter().enumerate() {
        let x = grid.cell_center(c);
        w.write_record([
            c.to_string(),
            x[0].to_string(),
            x[1].to_string(),
            v.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_measure_csv(
    art: &mut Artifacts,
    name: &str,
    grid: &Arc<Grid>,
    masses: &[f64],
) -> Result<(), RunError> {
    let mut w = art.writer(name)?;
    w.write_record(["cell_i", "cell_j", "center_x", "center_y", "mass"])?;
    for (c, m) in masses.iter().enumerate() {
        let (i, j) = grid.cell_multi(c);
        let x = grid.cell_center(c);
        w.write_record([
            i.to_string(),
            j.to_string(),
            x[0].to_string(),
            x[1].to_string(),
            m.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_node_csv(art: &mut Artifacts, name: &str, u: &GridFunction) -> Result<(), RunError> {
    let g = u.grid();
    let mut w = art.writer(name)?;
    w.write_record(["node_i", "node_j", "x", "y", "value"])?;
    for (n, v) in u.values().iter().enumerate() {
        let (i, j) = g.node_multi(n);
        let x = g.node_coord(n);
        w.write_record([
            i.to_string(),
            j.to_string(),
            x[0].to_string(),
            x[1].to_string(),
            v.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn build_u(cfg: &ExperimentConfig, grid: &Arc<Grid>) -> CellFunction {
    match &cfg.u_spec {
        FunctionSpec::Constant(c) => CellFunction::constant(grid.clone(), *c),
        FunctionSpec::Sine => {
            let dim = grid.dim();
            let ext: Vec<(f64, f64)> = (0..dim).map(|k| grid.extents(k)).collect();
            GridFunction::from_fn(grid.clone(), move |x| {
                (0..dim)
                    .map(|k| {
                        let (lo, hi) = ext[k];
                        (std::f64::consts::PI * (x[k] - lo) / (hi - lo)).sin()
                    })
                    .product()
            })
            .cell_samples()
        }
        FunctionSpec::Bump(center, r) => {
            let center = center.clone();
            let r = *r;
            let dim = grid.dim();
            GridFunction::from_fn(grid.clone(), move |x| {
                let s2: f64 = (0..dim).map(|k| (x[k] - center[k]).powi(2)).sum();
                let y2 = s2 / (r * r);
                if y2 < 1.0 {
                    (1.0 / (y2 - 1.0)).exp()
                } else {
                    0.0
                }
            })
            .cell_samples()
        }
        FunctionSpec::Random => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
            let vals: Vec<f64> = (0..grid.node_count())
                .map(|_| 2.0 * rng.gen::<f64>() - 1.0)
                .collect();
            GridFunction::new(grid.clone(), vals)
                .expect("node count matches")
                .cell_samples()
        }
    }
}

fn center_point(cfg: &ExperimentConfig) -> [f64; 2] {
    let mut c = [0.0, 0.0];
    for (k, v) in cfg.center.iter().take(2).enumerate() {
        c[k] = *v;
    }
    c
}

fn fmt_g(v: f64) -> String {
    format!("{v:.12e}")
}

/// Execute the configured experiment, writing artifacts under `output_dir`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunSummary, RunError> {
    let started = Instant::now();
    let mut art = Artifacts::new(&cfg.output_dir)?;

    let effective = cfg.render_effective();
    art.write_text("effective_config.txt", &effective)?;
    let config_hash = {
        let mut h = Sha256::new();
        h.update(effective.as_bytes());
        hex_string(&h.finalize())
    };

    let grid = cfg.grid()?;
    let p = cfg.p_spec.build(&grid)?;
    let q = cfg.q_spec.build(&grid)?;
    write_field_csv(&mut art, "p_field.csv", &grid, p.values())?;
    write_field_csv(&mut art, "q_field.csv", &grid, q.values())?;

    let mut lines: Vec<(String, String)> = vec![
        ("tool_version".into(), env!("CARGO_PKG_VERSION").into()),
        ("mode".into(), cfg.mode.as_str().into()),
        ("config_hash".into(), config_hash),
    ];
    let mut exit_code = 0;

    let solver = SolverOptions { seed: cfg.seed, ..cfg.solver };

    match cfg.mode {
        Mode::NormCheck => {
            let u = build_u(cfg, &grid);
            write_field_csv(&mut art, "u_cells.csv", &grid, u.values())?;
            let rho = cell_modular(&u, &p)?;
            let norm = cell_luxemburg_norm(&u, &p)?;
            let (lo, hi) = cell_norm_modular_bounds(&u, &p)?;
            lines.push(("modular".into(), fmt_g(rho)));
            lines.push(("luxemburg".into(), fmt_g(norm.value)));
            lines.push(("residual".into(), fmt_g(norm.residual)));
            lines.push(("iterations".into(), norm.iterations.to_string()));
            lines.push(("bound_lo".into(), fmt_g(lo)));
            lines.push(("bound_hi".into(), fmt_g(hi)));
        }
        Mode::InequalityFuzz => {
            let est = elementary_inequality_constant(
                cfg.fuzz_p_lo,
                cfg.fuzz_p_hi,
                cfg.fuzz_theta,
                cfg.fuzz_samples,
                cfg.seed,
            )?;
            let mut w = art.writer("inequality_fuzz.csv")?;
            w.write_record(["seed", "samples", "p_lo", "p_hi", "theta", "empirical_constant"])?;
            w.write_record([
                cfg.seed.to_string(),
                cfg.fuzz_samples.to_string(),
                cfg.fuzz_p_lo.to_string(),
                cfg.fuzz_p_hi.to_string(),
                cfg.fuzz_theta.to_string(),
                est.to_string(),
            ])?;
            w.flush()?;
            lines.push(("empirical_constant".into(), fmt_g(est)));
        }
        Mode::Solve => {
            let prob = ExtremalProblem::new(p.clone(), q.clone(), cfg.eps, None)?;
            match solve(&prob, &solver) {
                Ok(rec) => {
                    write_solve_artifacts(&mut art, &rec)?;
                    lines.push(("objective".into(), fmt_g(rec.objective)));
                    lines.push(("grad_norm".into(), fmt_g(rec.grad_norm)));
                    lines.push(("iterations".into(), rec.iterations.to_string()));
                    lines.push(("converged".into(), rec.converged.to_string()));
                    lines.push(("critical".into(), rec.critical.to_string()));
                }
                Err(VxError::NonConvergence(n)) => {
                    let mut w = art.writer("record.csv")?;
                    write_record_header(&mut w)?;
                    w.write_record([
                        cfg.eps.to_string(),
                        String::new(),
                        String::new(),
                        n.to_string(),
                        solver.restarts.to_string(),
                        "false".into(),
                        "".into(),
                        "failed".into(),
                    ])?;
                    w.flush()?;
                    lines.push(("converged".into(), "false".into()));
                    exit_code = 2;
                }
                Err(e) => return Err(e.into()),
            }
        }
        Mode::Sweep => {
            let family = ProblemFamily { p: p.clone(), q: q.clone(), mask: None };
            let opts = SweepOptions {
                solver,
                ball_radius: cfg.ball_radius,
                crit_tol: cfg.crit_tol,
                conc_threshold: cfg.conc_threshold,
                compact_threshold: cfg.compact_threshold,
            };
            let report = run_sweep(&family, &cfg.eps_schedule, &opts)?;
            let mut w = art.writer("sweep.csv")?;
            w.write_record([
                "eps",
                "objective",
                "grad_norm",
                "iterations",
                "conc_ratio",
                "argmax_i",
                "argmax_j",
                "limit_estimate",
                "classification",
                "status",
            ])?;
            let mut failures = 0usize;
            for e in &report.entries {
                match (&e.record, e.conc_ratio, e.argmax_cell) {
                    (Some(rec), Some(cr), Some(cell)) => {
                        let (i, j) = grid.cell_multi(cell);
                        w.write_record([
                            e.eps.to_string(),
                            rec.objective.to_string(),
                            rec.grad_norm.to_string(),
                            rec.iterations.to_string(),
                            cr.to_string(),
                            i.to_string(),
                            j.to_string(),
                            report.limit_estimate.to_string(),
                            report.classification.to_string(),
                            "ok".into(),
                        ])?;
                    }
                    _ => {
                        failures += 1;
                        w.write_record([
                            e.eps.to_string(),
                            String::new(),
                            String::new(),
                            String::new(),
                            String::new(),
                            String::new(),
                            String::new(),
                            report.limit_estimate.to_string(),
                            report.classification.to_string(),
                            "failed".into(),
                        ])?;
                    }
                }
            }
            w.flush()?;
            if let Some(rec) = report.entries.iter().rev().find_map(|e| e.record.as_ref()) {
                write_node_csv(&mut art, "extremal_u.csv", &rec.u)?;
            }
            lines.push(("limit_estimate".into(), fmt_g(report.limit_estimate)));
            lines.push(("classification".into(), report.classification.to_string()));
            if let Some(cell) = report.concentration_point {
                let (i, j) = grid.cell_multi(cell);
                lines.push(("concentration_cell".into(), format!("{i},{j}")));
            }
            lines.push(("failed_eps".into(), failures.to_string()));
            if failures > 0 {
                exit_code = 2;
            }
        }
        Mode::Localized => {
            let loc = localized_constant(&p, &q, center_point(cfg), &cfg.radii, cfg.eps, &solver)?;
            let mut w = art.writer("localized.csv")?;
            w.write_record(["center_x", "center_y", "radius", "value", "extrapolation"])?;
            for (r, v) in &loc.values {
                w.write_record([
                    loc.center[0].to_string(),
                    loc.center[1].to_string(),
                    r.to_string(),
                    v.to_string(),
                    loc.extrapolated.to_string(),
                ])?;
            }
            w.flush()?;
            lines.push(("extrapolation".into(), fmt_g(loc.extrapolated)));
            lines.push((
                "finest_value".into(),
                fmt_g(loc.values.last().map(|(_, v)| *v).unwrap_or(f64::NAN)),
            ));
        }
        Mode::BubbleDemo => {
            let center = center_point(cfg);
            let mut w = art.writer("bubble.csv")?;
            w.write_record(["eps", "energy_modular", "lp_modular", "pairing_gap"])?;
            let mut last: Option<GridFunction> = None;
            for &eps in &cfg.bubble_eps {
                let b = make_bubble(center, eps, &p, cfg.target_mass, cfg.profile)?;
                let em = energy_measure(&b, &p)?;
                let lp = varexp::modular(&b, &p)?;
                // pairing of the energy against a fixed affine test function
                let psi = |x: &[f64]| 1.0 + x[0];
                let paired: f64 = em
                    .masses()
                    .iter()
                    .enumerate()
                    .map(|(c, m)| psi(&grid.cell_center(c)[..grid.dim()]) * m)
                    .sum();
                let gap = (paired - psi(&center[..grid.dim()]) * cfg.target_mass).abs();
                w.write_record([
                    eps.to_string(),
                    em.total_mass().to_string(),
                    lp.to_string(),
                    gap.to_string(),
                ])?;
                last = Some(b);
            }
            w.flush()?;
            if let Some(b) = last {
                write_node_csv(&mut art, "bubble_u.csv", &b)?;
                let em = energy_measure(&b, &p)?;
                write_measure_csv(&mut art, "bubble_energy.csv", &grid, em.masses())?;
                lines.push(("final_energy".into(), fmt_g(em.total_mass())));
            }
        }
        Mode::SufficientCondition => {
            let crit_tol = cfg.crit_tol.unwrap_or(grid.max_spacing());
            let crit: CriticalSetReport = critical_set(&p, &q, grid.dim(), crit_tol)?;
            let prob = ExtremalProblem::new(p.clone(), q.clone(), cfg.eps, None)?;
            let global = solve(&prob, &solver)?.objective;
            let opts = varexp::SufficientConditionOptions {
                radii: cfg.radii.clone(),
                eps: cfg.eps,
                margin: cfg.margin,
                max_cells: cfg.max_cells,
                solver,
            };
            let rep = varexp::check_sufficient_condition(&p, &q, &crit, global, &opts)?;
            let mut w = art.writer("sufficient.csv")?;
            w.write_record(["cell_i", "cell_j", "center_x", "center_y", "localized_value"])?;
            for (cell, v) in &rep.samples {
                let (i, j) = grid.cell_multi(*cell);
                let x = grid.cell_center(*cell);
                w.write_record([
                    i.to_string(),
                    j.to_string(),
                    x[0].to_string(),
                    x[1].to_string(),
                    v.to_string(),
                ])?;
            }
            w.flush()?;
            lines.push(("sup_local".into(), fmt_g(rep.sup_local)));
            lines.push(("global".into(), fmt_g(rep.global)));
            lines.push(("strict".into(), rep.strict.to_string()));
        }
    }

    lines.push((
        "status".into(),
        if exit_code == 0 { "ok".into() } else { "nonconvergence".into() },
    ));
    lines.push(("artifacts".into(), art.files.join(",")));
    lines.push((
        "wall_time_s".into(),
        format!("{:.3}", started.elapsed().as_secs_f64()),
    ));

    let mut summary_text = String::new();
    for (k, v) in &lines {
        summary_text.push_str(k);
        summary_text.push_str(" = ");
        summary_text.push_str(v);
        summary_text.push('\n');
    }
    fs::write(cfg.output_dir.join("summary.txt"), &summary_text)?;
    let mut artifacts = art.files.clone();
    artifacts.push("summary.txt".into());
    Ok(RunSummary { lines, artifacts, exit_code })
}

fn write_record_header(w: &mut csv::Writer<fs::File>) -> Result<(), csv::Error> {
    w.write_record([
        "eps",
        "objective",
        "grad_norm",
        "iterations",
        "restarts_used",
        "converged",
        "critical",
        "status",
    ])
}

fn write_solve_artifacts(art: &mut Artifacts, rec: &ExtremalRecord) -> Result<(), RunError> {
    let mut w = art.writer("record.csv")?;
    write_record_header(&mut w)?;
    w.write_record([
        rec.problem.eps().to_string(),
        rec.objective.to_string(),
        rec.grad_norm.to_string(),
        rec.iterations.to_string(),
        rec.restarts_used.to_string(),
        rec.converged.to_string(),
        rec.critical.to_string(),
        "ok".into(),
    ])?;
    w.flush()?;
    write_node_csv(art, "extremal_u.csv", &rec.u)?;
    let em = energy_measure(&rec.u, rec.problem.p())?;
    write_measure_csv(art, "energy_measure.csv", rec.problem.grid(), em.masses())?;
    Ok(())
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn run_text(text: &str, dir: &Path) -> RunSummary {
        let mut cfg = parse_config(text).unwrap();
        cfg.output_dir = dir.to_path_buf();
        run(&cfg).unwrap()
    }

    #[test]
    fn norm_check_two_piece_headline() {
        let dir = tempfile::tempdir().unwrap();
        let summary = run_text(
            "dim = 1\ncells = 32\np = piecewise(0:0.5:2, 0.5:1:4)\nq = constant(2)\nmode = norm-check\nu = constant(2)\n",
            dir.path(),
        );
        assert_eq!(summary.exit_code, 0);
        let lux: f64 = summary.get("luxemburg").unwrap().parse().unwrap();
        let residual: f64 = summary.get("residual").unwrap().parse().unwrap();
        assert!((lux - 2.0).abs() < 2e-10 * 2.0, "luxemburg = {lux}");
        assert!(residual < 1e-10);
        // every listed artifact exists and is non-empty
        for name in &summary.artifacts {
            let meta = fs::metadata(dir.path().join(name)).unwrap();
            assert!(meta.len() > 0, "{name} is empty");
        }
    }

    #[test]
    fn solve_mode_eigenvalue_headline() {
        let dir = tempfile::tempdir().unwrap();
        let summary = run_text(
            "dim = 1\ncells = 64\np = constant(2)\nq = constant(2)\nmode = solve\neps = 0\nrestarts = 2\n",
            dir.path(),
        );
        assert_eq!(summary.exit_code, 0);
        let obj: f64 = summary.get("objective").unwrap().parse().unwrap();
        let target = 1.0 / (std::f64::consts::PI.powi(2));
        assert!((obj - target).abs() / target < 0.02, "objective = {obj}");
        assert_eq!(summary.get("converged"), Some("true"));
        assert!(dir.path().join("extremal_u.csv").exists());
        assert!(dir.path().join("record.csv").exists());
    }

    #[test]
    fn reruns_are_byte_identical_outside_wall_time() {
        let text = "dim = 1\ncells = 48\np = constant(2)\nq = constant(2.5)\nmode = sweep\neps_schedule = 0.5,0.25,0.125\nrestarts = 2\nseed = 11\n";
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        let s1 = run_text(text, d1.path());
        let _s2 = run_text(text, d2.path());
        assert_eq!(s1.exit_code, 0);
        for name in &s1.artifacts {
            if name == "summary.txt" {
                let a = fs::read_to_string(d1.path().join(name)).unwrap();
                let b = fs::read_to_string(d2.path().join(name)).unwrap();
                let strip = |s: &str| -> String {
                    s.lines().filter(|l| !l.starts_with("wall_time_s")).collect::<Vec<_>>().join("\n")
                };
                assert_eq!(strip(&a), strip(&b));
            } else {
                let a = fs::read(d1.path().join(name)).unwrap();
                let b = fs::read(d2.path().join(name)).unwrap();
                assert_eq!(a, b, "artifact {name} differs between reruns");
            }
        }
    }

    #[test]
    fn inequality_fuzz_writes_report_row() {
        let dir = tempfile::tempdir().unwrap();
        let summary = run_text(
            "dim = 1\ncells = 8\np = constant(2)\nq = constant(2)\nmode = inequality-fuzz\np_lo = 2\np_hi = 2\ntheta = 1\nsamples = 20000\nseed = 5\n",
            dir.path(),
        );
        assert_eq!(summary.exit_code, 0);
        let est: f64 = summary.get("empirical_constant").unwrap().parse().unwrap();
        assert!(est <= 1.0 + 1e-12 && est > 0.9);
        let text = fs::read_to_string(dir.path().join("inequality_fuzz.csv")).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "seed,samples,p_lo,p_hi,theta,empirical_constant"
        );
        assert!(lines.next().unwrap().starts_with("5,20000,2,2,1,"));
    }

    #[test]
    fn localized_mode_headline() {
        let dir = tempfile::tempdir().unwrap();
        let summary = run_text(
            "dim = 1\ncells = 64\np = constant(2)\nq = constant(2)\nmode = localized\ncenter = 0.5\nradii = 0.3,0.2\neps = 0\nrestarts = 2\n",
            dir.path(),
        );
        assert_eq!(summary.exit_code, 0);
        let v: f64 = summary.get("finest_value").unwrap().parse().unwrap();
        assert!(v > 0.0 && v < 0.11);
    }
}
