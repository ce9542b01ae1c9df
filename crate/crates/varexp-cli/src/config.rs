//! Flat key = value experiment configs: parsing with line-level syntax
//! errors and aggregated validation, plus deterministic re-serialization of
//! the defaults-expanded form.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use varexp::solver::SolverOptions;
use varexp::{BubbleProfile, ExponentField, Grid};

/// A single config problem, tied to a line when it came from the text.
#[derive(Debug, Clone)]
pub struct ConfigIssue {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

/// All issues found in a config; parsing reports every problem, not the first.
#[derive(Debug)]
pub struct ConfigError {
    pub issues: Vec<ConfigIssue>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for issue in &self.issues {
            writeln!(f, "{issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

/// Exponent field constructors accepted in configs.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldSpec {
    Constant(f64),
    /// a + b * x1
    Affine(f64, f64),
    /// c + s * |x - x0|
    Radial(f64, f64, Vec<f64>),
    /// boxes with values; later boxes override, every cell must be covered
    Piecewise(Vec<(Vec<(f64, f64)>, f64)>),
}

impl FieldSpec {
    pub fn build(&self, grid: &std::sync::Arc<Grid>) -> varexp::Result<ExponentField> {
        match self {
            FieldSpec::Constant(c) => ExponentField::constant(grid.clone(), *c),
            FieldSpec::Affine(a, b) => {
                ExponentField::from_fn(grid.clone(), move |x| a + b * x[0])
            }
            FieldSpec::Radial(c, s, x0) => {
                let x0 = x0.clone();
                ExponentField::from_fn(grid.clone(), move |x| {
                    let d2: f64 = x
                        .iter()
                        .zip(&x0)
                        .map(|(xi, ci)| (xi - ci) * (xi - ci))
                        .sum();
                    c + s * d2.sqrt()
                })
            }
            FieldSpec::Piecewise(pieces) => {
                let mut values = Vec::with_capacity(grid.cell_count());
                for cell in 0..grid.cell_count() {
                    let x = grid.cell_center(cell);
                    let mut v = None;
                    for (boxes, value) in pieces {
                        let inside = boxes
                            .iter()
                            .enumerate()
                            .all(|(k, (lo, hi))| x[k] >= *lo && x[k] <= *hi);
                        if inside {
                            v = Some(*value);
                        }
                    }
                    match v {
                        Some(v) => values.push(v),
                        None => {
                            return Err(varexp::Error::InvalidExponent(format!(
                                "piecewise spec leaves cell {cell} uncovered"
                            )))
                        }
                    }
                }
                ExponentField::from_values(grid.clone(), values)
            }
        }
    }

    fn render(&self) -> String {
        match self {
            FieldSpec::Constant(c) => format!("constant({c})"),
            FieldSpec::Affine(a, b) => format!("affine({a},{b})"),
            FieldSpec::Radial(c, s, x0) => {
                let coords: Vec<String> = x0.iter().map(|v| v.to_string()).collect();
                format!("radial({c},{s},{})", coords.join(","))
            }
            FieldSpec::Piecewise(pieces) => {
                let parts: Vec<String> = pieces
                    .iter()
                    .map(|(boxes, v)| {
                        let mut b: Vec<String> = Vec::new();
                        for (lo, hi) in boxes {
                            b.push(lo.to_string());
                            b.push(hi.to_string());
                        }
                        format!("{}:{v}", b.join(":"))
                    })
                    .collect();
                format!("piecewise({})", parts.join(", "))
            }
        }
    }
}

/// Seed functions for norm checks.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    Constant(f64),
    /// product of axis sines, vanishing on the boundary
    Sine,
    /// smooth bump at a center with a radius
    Bump(Vec<f64>, f64),
    /// uniform node noise from the run seed
    Random,
}

impl FunctionSpec {
    fn render(&self) -> String {
        match self {
            FunctionSpec::Constant(c) => format!("constant({c})"),
            FunctionSpec::Sine => "sine".into(),
            FunctionSpec::Bump(c, r) => {
                let coords: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                format!("bump({},{r})", coords.join(","))
            }
            FunctionSpec::Random => "random".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    NormCheck,
    InequalityFuzz,
    Solve,
    Sweep,
    Localized,
    BubbleDemo,
    SufficientCondition,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::NormCheck => "norm-check",
            Mode::InequalityFuzz => "inequality-fuzz",
            Mode::Solve => "solve",
            Mode::Sweep => "sweep",
            Mode::Localized => "localized",
            Mode::BubbleDemo => "bubble-demo",
            Mode::SufficientCondition => "sufficient-condition",
        }
    }
}

/// A validated, defaults-expanded experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub extents: Vec<(f64, f64)>,
    pub cells: Vec<usize>,
    pub p_spec: FieldSpec,
    pub q_spec: FieldSpec,
    pub mode: Mode,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub solver: SolverOptions,
    pub eps: f64,
    pub eps_schedule: Vec<f64>,
    pub u_spec: FunctionSpec,
    pub center: Vec<f64>,
    pub radii: Vec<f64>,
    pub bubble_eps: Vec<f64>,
    pub target_mass: f64,
    pub profile: BubbleProfile,
    pub fuzz_p_lo: f64,
    pub fuzz_p_hi: f64,
    pub fuzz_theta: f64,
    pub fuzz_samples: u64,
    pub margin: f64,
    pub max_cells: usize,
    pub crit_tol: Option<f64>,
    pub ball_radius: Option<f64>,
    pub conc_threshold: f64,
    pub compact_threshold: f64,
}

impl ExperimentConfig {
    pub fn grid(&self) -> varexp::Result<std::sync::Arc<Grid>> {
        let g = match self.dim {
            1 => Grid::interval(self.extents[0].0, self.extents[0].1, self.cells[0])?,
            _ => Grid::rectangle(
                [self.extents[0].0, self.extents[1].0],
                [self.extents[0].1, self.extents[1].1],
                [self.cells[0], self.cells[1]],
            )?,
        };
        Ok(std::sync::Arc::new(g))
    }

    /// Deterministic key = value rendering of the defaults-expanded config;
    /// hashing this gives the config identity recorded in summaries.
    pub fn render_effective(&self) -> String {
        let mut out = String::new();
        let mut push = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        push("dim", self.dim.to_string());
        let extents: Vec<String> = self
            .extents
            .iter()
            .flat_map(|(a, b)| [a.to_string(), b.to_string()])
            .collect();
        push("extents", extents.join(","));
        let cells: Vec<String> = self.cells.iter().map(|c| c.to_string()).collect();
        push("cells", cells.join(","));
        push("p", self.p_spec.render());
        push("q", self.q_spec.render());
        push("mode", self.mode.as_str().into());
        push("seed", self.seed.to_string());
        // output_dir is a deployment detail, not part of the experiment
        // identity; reruns into different directories hash identically
        push("tol", self.solver.tol.to_string());
        push("patience", self.solver.patience.to_string());
        push("max_iters", self.solver.max_iters.to_string());
        push("restarts", self.solver.restarts.to_string());
        push("eta0", self.solver.eta0.to_string());
        push("eps", self.eps.to_string());
        if !self.eps_schedule.is_empty() {
            let sched: Vec<String> = self.eps_schedule.iter().map(|e| e.to_string()).collect();
            push("eps_schedule", sched.join(","));
        }
        push("u", self.u_spec.render());
        if !self.center.is_empty() {
            let center: Vec<String> = self.center.iter().map(|c| c.to_string()).collect();
            push("center", center.join(","));
        }
        if !self.radii.is_empty() {
            let radii: Vec<String> = self.radii.iter().map(|r| r.to_string()).collect();
            push("radii", radii.join(","));
        }
        if !self.bubble_eps.is_empty() {
            let beps: Vec<String> = self.bubble_eps.iter().map(|e| e.to_string()).collect();
            push("bubble_eps", beps.join(","));
        }
        push("target_mass", self.target_mass.to_string());
        push(
            "profile",
            match self.profile {
                BubbleProfile::SmoothCompact => "smooth".into(),
                BubbleProfile::Tent => "tent".into(),
            },
        );
        push("p_lo", self.fuzz_p_lo.to_string());
        push("p_hi", self.fuzz_p_hi.to_string());
        push("theta", self.fuzz_theta.to_string());
        push("samples", self.fuzz_samples.to_string());
        push("margin", self.margin.to_string());
        push("max_cells", self.max_cells.to_string());
        if let Some(v) = self.crit_tol {
            push("crit_tol", v.to_string());
        }
        if let Some(v) = self.ball_radius {
            push("ball_radius", v.to_string());
        }
        push("conc_threshold", self.conc_threshold.to_string());
        push("compact_threshold", self.compact_threshold.to_string());
        out
    }
}

fn parse_f64(v: &str) -> Result<f64, String> {
    v.trim()
        .parse::<f64>()
        .map_err(|_| format!("expected a number, got '{v}'"))
}

fn parse_f64_list(v: &str) -> Result<Vec<f64>, String> {
    v.split(',')
        .map(parse_f64)
        .collect::<Result<Vec<_>, _>>()
}

fn parse_call<'a>(v: &'a str, name: &str) -> Option<&'a str> {
    let v = v.trim();
    let inner = v.strip_prefix(name)?.trim();
    let inner = inner.strip_prefix('(')?;
    let inner = inner.strip_suffix(')')?;
    Some(inner)
}

fn parse_field_spec(v: &str, dim: usize) -> Result<FieldSpec, String> {
    if let Some(args) = parse_call(v, "constant") {
        return Ok(FieldSpec::Constant(parse_f64(args)?));
    }
    if let Some(args) = parse_call(v, "affine") {
        let nums = parse_f64_list(args)?;
        if nums.len() != 2 {
            return Err("affine takes (a, b)".into());
        }
        return Ok(FieldSpec::Affine(nums[0], nums[1]));
    }
    if let Some(args) = parse_call(v, "radial") {
        let nums = parse_f64_list(args)?;
        if nums.len() != 2 + dim {
            return Err(format!("radial takes (c, s, x0...) with {dim} center coordinates"));
        }
        return Ok(FieldSpec::Radial(nums[0], nums[1], nums[2..].to_vec()));
    }
    if let Some(args) = parse_call(v, "piecewise") {
        let mut pieces = Vec::new();
        for part in args.split(',') {
            let nums: Result<Vec<f64>, String> =
                part.split(':').map(parse_f64).collect();
            let nums = nums?;
            if nums.len() != 2 * dim + 1 {
                return Err(format!(
                    "each piecewise entry takes {} colon-separated numbers (box bounds then value)",
                    2 * dim + 1
                ));
            }
            let boxes: Vec<(f64, f64)> =
                (0..dim).map(|k| (nums[2 * k], nums[2 * k + 1])).collect();
            pieces.push((boxes, nums[2 * dim]));
        }
        if pieces.is_empty() {
            return Err("piecewise needs at least one box".into());
        }
        return Ok(FieldSpec::Piecewise(pieces));
    }
    Err(format!(
        "unknown exponent constructor '{v}' (expected constant/affine/radial/piecewise)"
    ))
}

fn parse_function_spec(v: &str, dim: usize) -> Result<FunctionSpec, String> {
    if let Some(args) = parse_call(v, "constant") {
        return Ok(FunctionSpec::Constant(parse_f64(args)?));
    }
    if v.trim() == "sine" {
        return Ok(FunctionSpec::Sine);
    }
    if let Some(args) = parse_call(v, "bump") {
        let nums = parse_f64_list(args)?;
        if nums.len() != dim + 1 {
            return Err(format!("bump takes (center..., radius) with {dim} center coordinates"));
        }
        return Ok(FunctionSpec::Bump(nums[..dim].to_vec(), nums[dim]));
    }
    if v.trim() == "random" {
        return Ok(FunctionSpec::Random);
    }
    Err(format!("unknown function '{v}' (expected constant/sine/bump/random)"))
}

/// Parse and validate a config text. Returns either a defaults-expanded
/// config or every problem found.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut issues: Vec<ConfigIssue> = Vec::new();
    let mut raw: BTreeMap<String, (usize, String)> = BTreeMap::new();

    const KNOWN: &[&str] = &[
        "dim", "extents", "cells", "p", "q", "mode", "seed", "output_dir", "tol", "patience",
        "max_iters", "restarts", "eta0", "eps", "eps_schedule", "u", "center", "radii",
        "bubble_eps", "target_mass", "profile", "p_lo", "p_hi", "theta", "samples", "margin",
        "max_cells", "crit_tol", "ball_radius", "conc_threshold", "compact_threshold",
    ];

    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let stripped = match line.find('#') {
            Some(pos) => &line[..pos],
            None => line,
        };
        let stripped = stripped.trim();
        if stripped.is_empty() {
            continue;
        }
        match stripped.split_once('=') {
            Some((k, v)) => {
                let key = k.trim().to_string();
                if !KNOWN.contains(&key.as_str()) {
                    issues.push(ConfigIssue {
                        line: Some(lineno),
                        message: format!("unknown key '{key}'"),
                    });
                    continue;
                }
                if raw.contains_key(&key) {
                    issues.push(ConfigIssue {
                        line: Some(lineno),
                        message: format!("duplicate key '{key}'"),
                    });
                    continue;
                }
                raw.insert(key, (lineno, v.trim().to_string()));
            }
            None => issues.push(ConfigIssue {
                line: Some(lineno),
                message: format!("expected 'key = value', got '{stripped}'"),
            }),
        }
    }

    // typed getters that record issues instead of failing fast
    let get = |key: &str| raw.get(key).cloned();

    let dim = match get("dim") {
        Some((l, v)) => match v.parse::<usize>() {
            Ok(d) if d == 1 || d == 2 => d,
            _ => {
                issues.push(ConfigIssue { line: Some(l), message: "dim must be 1 or 2".into() });
                1
            }
        },
        None => 1,
    };

    let extents = match get("extents") {
        Some((l, v)) => match parse_f64_list(&v) {
            Ok(nums) if nums.len() == 2 * dim => {
                let pairs: Vec<(f64, f64)> =
                    (0..dim).map(|k| (nums[2 * k], nums[2 * k + 1])).collect();
                for (a, b) in &pairs {
                    // negated form also rejects NaN bounds
                    #[allow(clippy::neg_cmp_op_on_partial_ord)]
                    if !(a < b) {
                        issues.push(ConfigIssue {
                            line: Some(l),
                            message: format!("extent ({a}, {b}) must be increasing"),
                        });
                    }
                }
                pairs
            }
            Ok(_) => {
                issues.push(ConfigIssue {
                    line: Some(l),
                    message: format!("extents needs {} numbers for dim {dim}", 2 * dim),
                });
                vec![(0.0, 1.0); dim]
            }
            Err(m) => {
                issues.push(ConfigIssue { line: Some(l), message: m });
                vec![(0.0, 1.0); dim]
            }
        },
        None => vec![(0.0, 1.0); dim],
    };

    let cells = match get("cells") {
        Some((l, v)) => {
            let parsed: Result<Vec<usize>, _> =
                v.split(',').map(|s| s.trim().parse::<usize>()).collect();
            match parsed {
                Ok(ns) if ns.len() == dim && ns.iter().all(|n| *n >= 2) => ns,
                _ => {
                    issues.push(ConfigIssue {
                        line: Some(l),
                        message: format!("cells needs {dim} integers >= 2"),
                    });
                    vec![16; dim]
                }
            }
        }
        None => {
            issues.push(ConfigIssue { line: None, message: "missing required key 'cells'".into() });
            vec![16; dim]
        }
    };

    let field = |key: &str, issues: &mut Vec<ConfigIssue>| -> Option<FieldSpec> {
        match raw.get(key) {
            Some((l, v)) => match parse_field_spec(v, dim) {
                Ok(spec) => Some(spec),
                Err(m) => {
                    issues.push(ConfigIssue { line: Some(*l), message: m });
                    None
                }
            },
            None => {
                issues.push(ConfigIssue {
                    line: None,
                    message: format!("missing required key '{key}'"),
                });
                None
            }
        }
    };
    let p_spec = field("p", &mut issues);
    let q_spec = field("q", &mut issues);

    let mode = match get("mode") {
        Some((l, v)) => match v.as_str() {
            "norm-check" => Some(Mode::NormCheck),
            "inequality-fuzz" => Some(Mode::InequalityFuzz),
            "solve" => Some(Mode::Solve),
            "sweep" => Some(Mode::Sweep),
            "localized" => Some(Mode::Localized),
            "bubble-demo" => Some(Mode::BubbleDemo),
            "sufficient-condition" => Some(Mode::SufficientCondition),
            other => {
                issues.push(ConfigIssue {
                    line: Some(l),
                    message: format!("unknown mode '{other}'"),
                });
                None
            }
        },
        None => {
            issues.push(ConfigIssue { line: None, message: "missing required key 'mode'".into() });
            None
        }
    };

    let num = |key: &str, default: f64, issues: &mut Vec<ConfigIssue>| -> f64 {
        match raw.get(key) {
            Some((l, v)) => match parse_f64(v) {
                Ok(x) => x,
                Err(m) => {
                    issues.push(ConfigIssue { line: Some(*l), message: m });
                    default
                }
            },
            None => default,
        }
    };
    let num_opt = |key: &str, issues: &mut Vec<ConfigIssue>| -> Option<f64> {
        match raw.get(key) {
            Some((l, v)) => match parse_f64(v) {
                Ok(x) => Some(x),
                Err(m) => {
                    issues.push(ConfigIssue { line: Some(*l), message: m });
                    None
                }
            },
            None => None,
        }
    };
    let int = |key: &str, default: u64, issues: &mut Vec<ConfigIssue>| -> u64 {
        match raw.get(key) {
            Some((l, v)) => match v.parse::<u64>() {
                Ok(x) => x,
                Err(_) => {
                    issues.push(ConfigIssue {
                        line: Some(*l),
                        message: format!("expected an integer, got '{v}'"),
                    });
                    default
                }
            },
            None => default,
        }
    };
    let list = |key: &str, issues: &mut Vec<ConfigIssue>| -> Vec<f64> {
        match raw.get(key) {
            Some((l, v)) => match parse_f64_list(v) {
                Ok(ns) => ns,
                Err(m) => {
                    issues.push(ConfigIssue { line: Some(*l), message: m });
                    Vec::new()
                }
            },
            None => Vec::new(),
        }
    };

    let defaults = SolverOptions::default();
    let solver = SolverOptions {
        tol: num("tol", defaults.tol, &mut issues),
        patience: int("patience", defaults.patience as u64, &mut issues) as u32,
        max_iters: int("max_iters", defaults.max_iters as u64, &mut issues) as u32,
        restarts: int("restarts", defaults.restarts as u64, &mut issues) as u32,
        seed: int("seed", 0, &mut issues),
        eta0: num("eta0", defaults.eta0, &mut issues),
    };
    let seed = solver.seed;

    let eps = num("eps", 0.0, &mut issues);
    let eps_schedule = list("eps_schedule", &mut issues);
    let center = list("center", &mut issues);
    let radii = list("radii", &mut issues);
    let bubble_eps = list("bubble_eps", &mut issues);
    let target_mass = num("target_mass", 1.0, &mut issues);
    let margin = num("margin", 0.02, &mut issues);
    let max_cells = int("max_cells", 5, &mut issues) as usize;
    let crit_tol = num_opt("crit_tol", &mut issues);
    let ball_radius = num_opt("ball_radius", &mut issues);
    let conc_threshold = num("conc_threshold", 0.9, &mut issues);
    let compact_threshold = num("compact_threshold", 0.05, &mut issues);
    let fuzz_p_lo = num("p_lo", 1.5, &mut issues);
    let fuzz_p_hi = num("p_hi", 1.5, &mut issues);
    let fuzz_theta = num("theta", 0.75, &mut issues);
    let fuzz_samples = int("samples", 100_000, &mut issues);

    let profile = match get("profile") {
        Some((l, v)) => match v.as_str() {
            "smooth" => BubbleProfile::SmoothCompact,
            "tent" => BubbleProfile::Tent,
            other => {
                issues.push(ConfigIssue {
                    line: Some(l),
                    message: format!("unknown profile '{other}' (expected smooth or tent)"),
                });
                BubbleProfile::SmoothCompact
            }
        },
        None => BubbleProfile::SmoothCompact,
    };

    let u_spec = match get("u") {
        Some((l, v)) => match parse_function_spec(&v, dim) {
            Ok(s) => s,
            Err(m) => {
                issues.push(ConfigIssue { line: Some(l), message: m });
                FunctionSpec::Sine
            }
        },
        None => FunctionSpec::Sine,
    };

    let output_dir = match get("output_dir") {
        Some((_, v)) => PathBuf::from(v),
        None => PathBuf::from("out"),
    };

    // mode-specific validation
    if let Some(mode) = mode {
        match mode {
            Mode::Sweep => {
                if eps_schedule.is_empty() {
                    issues.push(ConfigIssue {
                        line: None,
                        message: "mode sweep requires eps_schedule".into(),
                    });
                } else {
                    if eps_schedule.windows(2).any(|w| w[1] >= w[0]) {
                        issues.push(ConfigIssue {
                            line: None,
                            message: "eps_schedule must be strictly decreasing".into(),
                        });
                    }
                    if eps_schedule.iter().any(|e| *e < 0.0) {
                        issues.push(ConfigIssue {
                            line: None,
                            message: "eps_schedule entries must be >= 0".into(),
                        });
                    }
                }
            }
            Mode::Localized => {
                if center.len() != dim {
                    issues.push(ConfigIssue {
                        line: None,
                        message: format!("mode localized requires center with {dim} coordinates"),
                    });
                }
                if radii.is_empty() {
                    issues.push(ConfigIssue {
                        line: None,
                        message: "mode localized requires radii".into(),
                    });
                } else if radii.windows(2).any(|w| w[1] >= w[0]) {
                    issues.push(ConfigIssue {
                        line: None,
                        message: "radii must be strictly decreasing".into(),
                    });
                }
            }
            Mode::BubbleDemo => {
                if center.len() != dim {
                    issues.push(ConfigIssue {
                        line: None,
                        message: format!("mode bubble-demo requires center with {dim} coordinates"),
                    });
                }
                if bubble_eps.is_empty() {
                    issues.push(ConfigIssue {
                        line: None,
                        message: "mode bubble-demo requires bubble_eps".into(),
                    });
                }
                if !(target_mass > 0.0 && target_mass <= 1.0) {
                    issues.push(ConfigIssue {
                        line: None,
                        message: "target_mass must lie in (0, 1]".into(),
                    });
                }
            }
            Mode::SufficientCondition => {
                if radii.is_empty() {
                    issues.push(ConfigIssue {
                        line: None,
                        message: "mode sufficient-condition requires radii".into(),
                    });
                } else if radii.windows(2).any(|w| w[1] >= w[0]) {
                    issues.push(ConfigIssue {
                        line: None,
                        message: "radii must be strictly decreasing".into(),
                    });
                }
            }
            Mode::InequalityFuzz => {
                if !(fuzz_p_lo > 1.0 && fuzz_p_lo <= fuzz_p_hi) {
                    issues.push(ConfigIssue {
                        line: None,
                        message: "need 1 < p_lo <= p_hi".into(),
                    });
                }
                if !(fuzz_theta > 0.0 && fuzz_theta <= 1.0) {
                    issues.push(ConfigIssue {
                        line: None,
                        message: "theta must lie in (0, 1]".into(),
                    });
                }
                if fuzz_samples == 0 {
                    issues.push(ConfigIssue {
                        line: None,
                        message: "samples must be >= 1".into(),
                    });
                }
            }
            Mode::NormCheck | Mode::Solve => {}
        }
        if matches!(mode, Mode::Solve | Mode::Localized) && eps < 0.0 {
            issues.push(ConfigIssue { line: None, message: "eps must be >= 0".into() });
        }
    }

    if !issues.is_empty() {
        return Err(ConfigError { issues });
    }
    Ok(ExperimentConfig {
        dim,
        extents,
        cells,
        p_spec: p_spec.expect("validated"),
        q_spec: q_spec.expect("validated"),
        mode: mode.expect("validated"),
        seed,
        output_dir,
        solver,
        eps,
        eps_schedule,
        u_spec,
        center,
        radii,
        bubble_eps,
        target_mass,
        profile,
        fuzz_p_lo,
        fuzz_p_hi,
        fuzz_theta,
        fuzz_samples,
        margin,
        max_cells,
        crit_tol,
        ball_radius,
        conc_threshold,
        compact_threshold,
    })
}
