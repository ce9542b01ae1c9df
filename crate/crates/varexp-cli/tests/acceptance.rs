//! Acceptance suite: one test per criterion, each asserting the stated
//! tolerance and printing a pass line. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines.

use std::f64::consts::PI;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use varexp::*;

fn unit_interval(n: usize) -> Arc<Grid> {
    Arc::new(Grid::interval(0.0, 1.0, n).unwrap())
}

fn unit_square(n: usize) -> Arc<Grid> {
    Arc::new(Grid::rectangle([0.0, 0.0], [1.0, 1.0], [n, n]).unwrap())
}

fn pass(criterion: &str, details: String) {
    println!("criterion {criterion}: PASS - {details}");
}

/// Criterion 1: Luxemburg norm against the constant-exponent closed form.
#[test]
fn c01_luxemburg_constant_exponent_oracle() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for trial in 0..50 {
        let n = 8 + (trial % 5) * 7;
        let g = unit_interval(n);
        let vals: Vec<f64> = (0..n).map(|_| 8.0 * rng.gen::<f64>() - 4.0).collect();
        let u = CellFunction::new(g.clone(), vals).unwrap();
        for k in 0..10 {
            let p0 = 1.1 + 6.9 * (k as f64) / 9.0;
            let f = ExponentField::constant(g.clone(), p0).unwrap();
            let norm = cell_luxemburg_norm(&u, &f).unwrap().value;
            let oracle = cell_modular(&u, &f).unwrap().powf(1.0 / p0);
            let rel = (norm - oracle).abs() / oracle.max(f64::MIN_POSITIVE);
            worst = worst.max(rel);
            assert!(rel < 1e-10, "relative error {rel} at p0 = {p0}");
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "too slow: {elapsed:?}");
    pass(
        "01 luxemburg oracle",
        format!("500 cases, worst relative error {worst:.2e}, {elapsed:?}"),
    );
}

/// Criterion 2: Two-piece exponent closed form: the norm of a constant is the constant.
#[test]
fn c02_two_piece_closed_form() {
    let g = unit_interval(64);
    let p = ExponentField::from_fn(g.clone(), |x| if x[0] < 0.5 { 2.0 } else { 4.0 }).unwrap();
    let mut worst: f64 = 0.0;
    for c in [0.25, 1.0, 2.0, 5.5, 80.0] {
        let u = CellFunction::constant(g.clone(), c);
        let norm = cell_luxemburg_norm(&u, &p).unwrap().value;
        let rel = (norm - c).abs() / c;
        worst = worst.max(rel);
        assert!(rel < 1e-10, "norm {norm} differs from {c}");
    }
    pass("02 two-piece closed form", format!("worst relative error {worst:.2e}"));
}

/// Criterion 3: Hoelder inequality fuzz: no violations beyond the fixed slack.
#[test]
fn c03_hoelder_fuzz() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let trials = 10_000;
    for trial in 0..trials {
        let n = 4 + (trial % 21);
        let g = unit_interval(n);
        let f = CellFunction::new(
            g.clone(),
            (0..n).map(|_| 20.0 * rng.gen::<f64>() - 10.0).collect(),
        )
        .unwrap();
        let h = CellFunction::new(
            g.clone(),
            (0..n).map(|_| 20.0 * rng.gen::<f64>() - 10.0).collect(),
        )
        .unwrap();
        let split = rng.gen::<f64>();
        let (pa, pb) = (1.15 + 4.0 * rng.gen::<f64>(), 1.15 + 4.0 * rng.gen::<f64>());
        let p =
            ExponentField::from_fn(g.clone(), |x| if x[0] < split { pa } else { pb }).unwrap();
        let chk = cell_hoelder_check(&f, &h, &p).unwrap();
        assert!(chk.holds, "violation at trial {trial}: {chk:?}");
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "too slow: {elapsed:?}");
    pass("03 hoelder fuzz", format!("{trials} triples, zero violations, {elapsed:?}"));
}

/// Criterion 4: Elementary inequality constant: finite, stable under doubling, and
/// matching the closed form in the inner-product case.
#[test]
fn c04_elementary_inequality_constant() {
    let mut details = Vec::new();
    for (p_lo, p_hi, theta) in [(1.5, 1.5, 0.75), (2.0, 2.0, 1.0), (1.2, 4.0, 0.5)] {
        let single = elementary_inequality_constant(p_lo, p_hi, theta, 100_000, 2024).unwrap();
        let doubled = elementary_inequality_constant(p_lo, p_hi, theta, 200_000, 2024).unwrap();
        assert!(single.is_finite() && doubled.is_finite());
        assert!(doubled >= single, "sup estimate must be monotone in samples");
        assert!(
            doubled <= single * 1.10,
            "doubling moved the estimate too much: {single} -> {doubled}"
        );
        details.push(format!("({p_lo},{p_hi},{theta}): {doubled:.4}"));
        if (p_lo, p_hi, theta) == (2.0, 2.0, 1.0) {
            assert!(
                (doubled - 1.0).abs() <= 0.02,
                "inner-product case should give 1 +- 2%, got {doubled}"
            );
        }
    }
    pass("04 elementary inequality", details.join("; "));
}

/// Criterion 5: Eigenvalue oracle at N = 512 with a refinement check at N = 1024.
#[test]
fn c05_eigenvalue_oracle() {
    let started = Instant::now();
    let mut results = Vec::new();
    for n in [512usize, 1024] {
        let g = unit_interval(n);
        let p = ExponentField::constant(g.clone(), 2.0).unwrap();
        let q = ExponentField::constant(g.clone(), 2.0).unwrap();
        let prob = ExtremalProblem::new(p, q, 0.0, None).unwrap();
        let rec = solve(&prob, &SolverOptions::default()).unwrap();
        let quot = quotient_from_record(&rec).unwrap();
        results.push((rec.objective, quot));
    }
    let target = 1.0 / (PI * PI);
    let (obj, quot) = results[0];
    assert!((obj - target).abs() / target < 0.01, "objective {obj} vs {target}");
    assert!((quot - PI).abs() / PI < 0.01, "quotient {quot} vs pi");
    let (obj2, quot2) = results[1];
    assert!((obj2 - obj).abs() / obj < 0.005, "refinement moved objective {obj} -> {obj2}");
    assert!((quot2 - quot).abs() / quot < 0.005, "refinement moved quotient {quot} -> {quot2}");
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "too slow: {elapsed:?}");
    pass(
        "05 eigenvalue oracle",
        format!(
            "objective {obj:.6} (1/pi^2 {target:.6}), quotient {quot:.4}, refinement drift {:.2e}, {elapsed:?}",
            (obj2 - obj).abs() / obj
        ),
    );
}

/// Criterion 6: Subcritical sweep limit against the direct eps = 0 solve.
#[test]
fn c06_subcritical_sweep_limit() {
    let started = Instant::now();
    let g = unit_interval(256);
    let family = ProblemFamily {
        p: ExponentField::constant(g.clone(), 2.0).unwrap(),
        q: ExponentField::constant(g.clone(), 2.0).unwrap(),
        mask: None,
    };
    let report =
        run_sweep(&family, &[0.5, 0.25, 0.125, 0.0625, 0.0], &SweepOptions::default()).unwrap();
    let objs: Vec<f64> = report
        .entries
        .iter()
        .map(|e| e.record.as_ref().expect("all eps solvable").objective)
        .collect();
    let diffs: Vec<f64> = objs.windows(2).map(|w| (w[0] - w[1]).abs()).collect();
    for w in diffs.windows(2) {
        assert!(w[1] < w[0], "successive differences not strictly decreasing: {diffs:?}");
    }
    let prob = ExtremalProblem::new(family.p.clone(), family.q.clone(), 0.0, None).unwrap();
    let direct = solve(&prob, &SolverOptions::default()).unwrap().objective;
    let rel = (report.limit_estimate - direct).abs() / direct;
    assert!(rel < 0.01, "limit {} vs direct {direct}", report.limit_estimate);
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "too slow: {elapsed:?}");
    pass(
        "06 sweep limit",
        format!(
            "limit {:.8} vs direct {direct:.8} (rel {rel:.2e}), diffs {diffs:?}, {elapsed:?}",
            report.limit_estimate
        ),
    );
}

/// Criterion 7: Two-route identity for the localized constant: algebraic at constant
/// exponents, within 5% at the finest radius for an affine q in 2D.
#[test]
fn c07_localized_identity() {
    let started = Instant::now();
    // constant exponents, full domain: the two routes share one extremal
    let g1 = unit_interval(128);
    let p1 = ExponentField::constant(g1.clone(), 2.0).unwrap();
    let q1 = ExponentField::constant(g1.clone(), 2.0).unwrap();
    let rep1 =
        check_sobloc_identity(&p1, &q1, [0.5, 0.0], &[2.0], &SolverOptions::default()).unwrap();
    assert!(rep1.rel_gap < 1e-6, "constant-exponent gap {}", rep1.rel_gap);

    // affine q over a 2D box, shrinking radii around an interior center
    let g2 = unit_square(48);
    let p2 = ExponentField::constant(g2.clone(), 1.5).unwrap();
    let q2 = ExponentField::from_fn(g2.clone(), |x| 2.0 + 0.5 * x[0]).unwrap();
    let rep2 = check_sobloc_identity(
        &p2,
        &q2,
        [0.5, 0.5],
        &[0.35, 0.25, 0.18],
        &SolverOptions::default(),
    )
    .unwrap();
    let finest = rep2.finest();
    assert!(
        finest.rel_gap < 0.05,
        "affine fixture finest-radius gap {}",
        finest.rel_gap
    );
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "too slow: {elapsed:?}");
    pass(
        "07 localized identity",
        format!(
            "constant gap {:.2e}; affine finest-radius gap {:.4} at r={}, {elapsed:?}",
            rep1.rel_gap, finest.rel_gap, finest.radius
        ),
    );
}

/// Criterion 8: Bubble contract: exact energy, vanishing L^{p(x)} modular, pairing
/// against the point mass improving along the eps schedule.
#[test]
fn c08_bubble_contract() {
    let started = Instant::now();
    let g = unit_square(48);
    let p = ExponentField::constant(g.clone(), 1.5).unwrap();
    let diam = g.domain_diameter();
    let center = [0.5, 0.5];
    // curved test function: an affine one pairs exactly with a radially
    // symmetric bubble and leaves nothing to converge
    let psi = |x: &[f64]| 1.0 + x[0] * x[0] + 0.5 * (PI * x[1]).sin();
    let psi0 = psi(&center[..2]);
    let target = 0.85;
    let mut lp_series = Vec::new();
    let mut pairing = Vec::new();
    for factor in [0.25, 0.125, 0.0625] {
        let eps = factor * diam;
        let b = make_bubble(center, eps, &p, target, BubbleProfile::SmoothCompact).unwrap();
        let energy = cell_modular(&b.gradient().magnitude(), &p).unwrap();
        assert!(
            (energy - target).abs() <= 1e-8,
            "energy {energy} misses target {target}"
        );
        lp_series.push(modular(&b, &p).unwrap());
        let em = energy_measure(&b, &p).unwrap();
        let paired: f64 = em
            .masses()
            .iter()
            .enumerate()
            .map(|(c, m)| psi(&g.cell_center(c)[..2]) * m)
            .sum();
        pairing.push((paired - psi0 * target).abs());
    }
    assert!(lp_series[1] < lp_series[0] && lp_series[2] < lp_series[1], "{lp_series:?}");
    assert!(pairing[1] < pairing[0] && pairing[2] < pairing[1], "{pairing:?}");
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "too slow: {elapsed:?}");
    pass(
        "08 bubble contract",
        format!("lp modulars {lp_series:?}, pairing gaps {pairing:?}, {elapsed:?}"),
    );
}

/// Criterion 9: Multi-bubble additivity and the limit-value comparison against
/// localized constants at matching support scale.
#[test]
fn c09_multi_bubble_additivity() {
    let started = Instant::now();
    let g = unit_square(48);
    let p = ExponentField::constant(g.clone(), 1.5).unwrap();
    let q = ExponentField::constant(g.clone(), 6.0).unwrap();
    let atoms = [([0.3, 0.3], 0.3), ([0.72, 0.72], 0.4)];

    let u = make_multi_bubble(&atoms, 0.3, &p, BubbleProfile::Tent).unwrap();
    let energy = cell_modular(&u.gradient().magnitude(), &p).unwrap();
    assert!((energy - 0.7).abs() <= 1e-6, "total energy {energy}");

    // F_eps of the multi-bubble against sum_i mass^{q/p} * sbar^{-q}; the
    // reference uses localized constants on balls matching the bubble
    // support, i.e. radius eps/2 (q/p = 4 and sbar^{-q} is the modular-form
    // localized value)
    let opts = SolverOptions::default();
    let mut gaps = Vec::new();
    for eps in [0.3, 0.2, 0.15, 0.125, 0.1] {
        let u = make_multi_bubble(&atoms, eps, &p, BubbleProfile::Tent).unwrap();
        let lhs = eval_f_eps(&u, 0.0, &q).unwrap();
        let mut rhs = 0.0;
        for (c, m) in &atoms {
            let loc = localized_constant(&p, &q, *c, &[eps / 2.0], 0.0, &opts).unwrap();
            rhs += m.powi(4) * loc.extrapolated;
        }
        gaps.push((lhs - rhs).abs() / rhs.max(lhs));
    }
    for w in gaps.windows(2) {
        assert!(w[1] < w[0] * 1.25, "gap sequence should trend down: {gaps:?}");
    }
    let final_gap = *gaps.last().unwrap();
    assert!(final_gap < 0.10, "final gap {final_gap} exceeds 10%: {gaps:?}");
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "too slow: {elapsed:?}");
    pass(
        "09 multi-bubble",
        format!("energy {energy:.8}, gap sequence {gaps:?}, {elapsed:?}"),
    );
}

/// Criterion 10: Dichotomy classifier on the synthetic fixture set.
#[test]
fn c10_dichotomy_classifier() {
    let started = Instant::now();
    // concentrating fixture: bubbles with shrinking eps at a critical point
    let g = unit_square(48);
    let p = ExponentField::constant(g.clone(), 1.5).unwrap();
    let q = ExponentField::constant(g.clone(), 6.0).unwrap();
    let crit = critical_set(&p, &q, 2, g.spacing(0)).unwrap();
    let mut records = Vec::new();
    for eps in [0.5, 0.35, 0.25] {
        let u = make_bubble([0.5, 0.5], eps, &p, 1.0, BubbleProfile::SmoothCompact).unwrap();
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
    assert!((x[0] - 0.5).abs() < 0.05 && (x[1] - 0.5).abs() < 0.05, "wrong cell {x:?}");

    // compact fixture: one subcritical extremal repeated
    let g1 = unit_interval(64);
    let p1 = ExponentField::constant(g1.clone(), 2.0).unwrap();
    let q1 = ExponentField::constant(g1.clone(), 2.0).unwrap();
    let prob1 = ExtremalProblem::new(p1.clone(), q1.clone(), 0.0, None).unwrap();
    let rec = solve(&prob1, &SolverOptions { restarts: 2, ..Default::default() }).unwrap();
    let crit1 = critical_set(&p1, &q1, 1, g1.spacing(0)).unwrap();
    let rep1 = classify_dichotomy(&[&rec, &rec, &rec], 0.1, &crit1, 0.9, 0.05).unwrap();
    assert_eq!(rep1.classification, Classification::Compact);

    let elapsed = started.elapsed();
    pass(
        "10 dichotomy classifier",
        format!(
            "concentrating at cell {:?} (ratio {:.3}), compact diff modular {:.2e}, {elapsed:?}",
            g.cell_multi(cell),
            rep.conc_ratio,
            rep1.diff_modular
        ),
    );
}

/// Criterion 11: Localized constants never beat the global one across the fixtures.
#[test]
fn c11_localized_inclusion() {
    let started = Instant::now();
    let opts = SolverOptions::default();
    let mut checked = 0usize;
    let mut worst: f64 = 0.0;

    // 1D constant-exponent fixture
    let g1 = unit_interval(96);
    let p1 = ExponentField::constant(g1.clone(), 2.0).unwrap();
    let q1 = ExponentField::constant(g1.clone(), 2.0).unwrap();
    let prob1 = ExtremalProblem::new(p1.clone(), q1.clone(), 0.0, None).unwrap();
    let global1 = solve(&prob1, &opts).unwrap().objective;
    for center in [0.3, 0.5, 0.7] {
        let loc = localized_constant(&p1, &q1, [center, 0.0], &[0.25, 0.15], 0.0, &opts).unwrap();
        for (_, v) in &loc.values {
            worst = worst.max(v / global1);
            assert!(*v <= global1 * 1.005, "1D localized {v} beats global {global1}");
            checked += 1;
        }
    }

    // 2D critical fixture
    let g2 = unit_square(32);
    let p2 = ExponentField::constant(g2.clone(), 1.5).unwrap();
    let q2 = ExponentField::constant(g2.clone(), 6.0).unwrap();
    let prob2 = ExtremalProblem::new(p2.clone(), q2.clone(), 0.0, None).unwrap();
    let global2 = solve(&prob2, &opts).unwrap().objective;
    for center in [[0.35, 0.35], [0.5, 0.5], [0.65, 0.6]] {
        let loc = localized_constant(&p2, &q2, center, &[0.2, 0.15, 0.1], 0.0, &opts).unwrap();
        for (_, v) in &loc.values {
            worst = worst.max(v / global2);
            assert!(*v <= global2 * 1.005, "2D localized {v} beats global {global2}");
            checked += 1;
        }
    }
    let elapsed = started.elapsed();
    pass(
        "11 localized inclusion",
        format!("{checked} localized values, worst ratio {worst:.4}, {elapsed:?}"),
    );
}

/// Criterion 12: Determinism: rerunning the binary with the same config and seed
/// produces byte-identical artifacts (wall time aside).
#[test]
fn c12_determinism() {
    let started = Instant::now();
    let config_text = "dim = 1\ncells = 96\np = constant(2)\nq = piecewise(0:0.5:2, 0.5:1:2.5)\nmode = sweep\neps_schedule = 0.4,0.2,0.1\nrestarts = 3\nseed = 42\n";
    let dir = tempfile_dir();
    let cfg_path = dir.join("exp.cfg");
    std::fs::write(&cfg_path, config_text).unwrap();
    let out1 = dir.join("run1");
    let out2 = dir.join("run2");
    for out in [&out1, &out2] {
        let status = Command::new(env!("CARGO_BIN_EXE_varexp"))
            .args([
                "run",
                cfg_path.to_str().unwrap(),
                "--output-dir",
                out.to_str().unwrap(),
                "--threads",
                "2",
            ])
            .status()
            .expect("binary runs");
        assert!(status.success(), "run failed: {status:?}");
    }
    let mut compared = Vec::new();
    for entry in std::fs::read_dir(&out1).unwrap() {
        let name = entry.unwrap().file_name();
        let name = name.to_str().unwrap().to_string();
        let a = std::fs::read(out1.join(&name)).unwrap();
        let b = std::fs::read(out2.join(&name)).unwrap();
        if name == "summary.txt" {
            let strip = |bytes: &[u8]| -> String {
                String::from_utf8_lossy(bytes)
                    .lines()
                    .filter(|l| !l.starts_with("wall_time_s"))
                    .collect::<Vec<_>>()
                    .join("\n")
            };
            assert_eq!(strip(&a), strip(&b), "summary differs beyond wall time");
        } else {
            assert_eq!(a, b, "artifact {name} differs between reruns");
        }
        compared.push(name);
    }
    assert!(compared.iter().any(|n| n == "sweep.csv"));
    assert!(compared.iter().any(|n| n == "effective_config.txt"));
    std::fs::remove_dir_all(&dir).ok();
    let elapsed = started.elapsed();
    pass(
        "12 determinism",
        format!("{} artifacts byte-identical across reruns, {elapsed:?}", compared.len()),
    );
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "varexp-acceptance-{}-{}",
        std::process::id(),
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .unwrap()
            .as_nanos()
    ));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
