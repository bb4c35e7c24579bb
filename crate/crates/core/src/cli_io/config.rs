//! Line-oriented run configuration: one `section.key = value` per line, `#`
//! starts a comment, blank lines are ignored.
//!
//! ```text
//! params.n = 2
//! params.gamma = 1.4
//! params.u_b = -0.05
//! solver.m = 40
//! solver.nodes = 512
//! solver.t_end = 50
//! solver.snapshot_dt = 1
//! stationary.r_max = 50
//! initial.family = gaussian-bump
//! initial.amp_rho = 0.3
//! output.dir = runs/standard
//! run.seed = 42
//! ```
//!
//! Every key is optional; omitted keys take the defaults of [`RunSpec::default`].

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use crate::solver::{InitialFamily, SolverConfig};
use crate::{Error, Params, Result};

/// Stationary solver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationarySpec {
    pub r_max: f64,
    pub tol: f64,
}

/// Which per-snapshot monitors `evolve` computes and exports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiagnosticsToggles {
    /// Energy and decay ledger (JSON-lines).
    pub ledger: bool,
    /// Sobolev bound, unit-window volumes and `B(t)` envelope.
    pub pointwise: bool,
    /// Weighted interpolation inequalities for `delta` in {0.5, 1, 2}.
    pub eta_norms: bool,
    /// Snapshot CSV.
    pub snapshots: bool,
}

impl Default for DiagnosticsToggles {
    fn default() -> Self {
        Self {
            ledger: true,
            pointwise: true,
            eta_norms: true,
            snapshots: true,
        }
    }
}

/// Member lists of the two sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub m_values: Vec<f64>,
    pub u_b_values: Vec<f64>,
    /// `(r_max, t_max)` of the comparison window of `sweep-m`.
    pub window: (f64, f64),
}

/// Sample counts of the randomized certifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifySpec {
    pub branch_samples: usize,
    pub log_samples: usize,
    pub cutoff_samples: usize,
    pub quadrature_samples: usize,
}

/// Everything one invocation needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub params: Params,
    pub solver: SolverConfig,
    pub stationary: StationarySpec,
    pub initial: InitialFamily,
    pub diagnostics: DiagnosticsToggles,
    pub sweep: SweepSpec,
    pub verify: VerifySpec,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunSpec {
    fn default() -> Self {
        let params = Params::new(2, 1.4, 1.0, 1.0, 1.0, -0.05).expect("default parameters are valid");
        Self {
            params,
            solver: SolverConfig {
                snapshot_dt: Some(1.0),
                ..SolverConfig::new(40.0, 512, 50.0)
            },
            stationary: StationarySpec { r_max: 50.0, tol: 1e-3 },
            initial: InitialFamily::standard(params.rho_plus),
            diagnostics: DiagnosticsToggles::default(),
            sweep: SweepSpec {
                m_values: vec![20.0, 40.0, 80.0],
                u_b_values: vec![-0.02, -0.05, -0.1],
                window: (10.0, 20.0),
            },
            verify: VerifySpec {
                branch_samples: 100_000,
                log_samples: 10_000,
                cutoff_samples: 10_000,
                quadrature_samples: 100_000,
            },
            output_dir: PathBuf::from("outflow-out"),
            seed: 42,
        }
    }
}

const KEYS: &[&str] = &[
    "params.n",
    "params.gamma",
    "params.k",
    "params.mu",
    "params.rho_plus",
    "params.u_b",
    "solver.m",
    "solver.nodes",
    "solver.cfl",
    "solver.t_end",
    "solver.theta",
    "solver.snapshot_stride",
    "solver.snapshot_dt",
    "solver.dt_max",
    "solver.max_retries",
    "solver.outer_grading",
    "stationary.r_max",
    "stationary.tol",
    "initial.family",
    "initial.center",
    "initial.width",
    "initial.amp_rho",
    "initial.amp_u",
    "diagnostics.ledger",
    "diagnostics.pointwise",
    "diagnostics.eta_norms",
    "diagnostics.snapshots",
    "sweep.m_values",
    "sweep.u_b_values",
    "sweep.window_r",
    "sweep.window_t",
    "verify.branch_samples",
    "verify.log_samples",
    "verify.cutoff_samples",
    "verify.quadrature_samples",
    "output.dir",
    "run.seed",
];

fn value_error(key: &str, message: impl Into<String>) -> Error {
    Error::ConfigValue {
        key: key.to_string(),
        message: message.into(),
    }
}

/// One `key = value` line after syntax checks.
struct Entry<'a> {
    line: usize,
    key: &'a str,
    value: &'a str,
}

impl Entry<'_> {
    fn syntax(&self, message: String) -> Error {
        Error::ConfigSyntax {
            line: self.line,
            message,
        }
    }

    fn f64(&self) -> Result<f64> {
        let x: f64 = self
            .value
            .parse()
            .map_err(|_| self.syntax(format!("`{}` expects a number, got `{}`", self.key, self.value)))?;
        if !x.is_finite() {
            return Err(value_error(self.key, format!("must be finite, got {x}")));
        }
        Ok(x)
    }

    fn usize(&self) -> Result<usize> {
        self.value
            .parse()
            .map_err(|_| self.syntax(format!("`{}` expects a nonnegative integer, got `{}`", self.key, self.value)))
    }

    fn u64(&self) -> Result<u64> {
        self.value
            .parse()
            .map_err(|_| self.syntax(format!("`{}` expects a nonnegative integer, got `{}`", self.key, self.value)))
    }

    fn bool(&self) -> Result<bool> {
        match self.value {
            "true" => Ok(true),
            "false" => Ok(false),
            _ => Err(self.syntax(format!("`{}` expects true or false, got `{}`", self.key, self.value))),
        }
    }

    fn list(&self) -> Result<Vec<f64>> {
        let items: Vec<&str> = self.value.split(',').map(str::trim).collect();
        if items.iter().any(|s| s.is_empty()) {
            return Err(self.syntax(format!("`{}` expects a comma-separated list of numbers", self.key)));
        }
        items
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| self.syntax(format!("`{}`: `{s}` is not a finite number", self.key)))
            })
            .collect()
    }

    fn string(&self) -> &str {
        let v = self.value;
        if v.len() >= 2 && v.starts_with('"') && v.ends_with('"') {
            &v[1..v.len() - 1]
        } else {
            v
        }
    }
}

fn split_lines(text: &str) -> Result<Vec<Entry<'_>>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::ConfigSyntax {
            line,
            message: format!("expected `section.key = value`, got `{content}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let well_formed = key
            .split_once('.')
            .map(|(s, k)| !s.is_empty() && !k.is_empty() && !k.contains('.'))
            .unwrap_or(false);
        if !well_formed {
            return Err(Error::ConfigSyntax {
                line,
                message: format!("key `{key}` is not of the form `section.key`"),
            });
        }
        if value.is_empty() {
            return Err(Error::ConfigSyntax {
                line,
                message: format!("`{key}` has no value"),
            });
        }
        if !KEYS.contains(&key) {
            return Err(Error::ConfigSyntax {
                line,
                message: format!("unknown key `{key}`"),
            });
        }
        if !seen.insert(key) {
            return Err(Error::ConfigSyntax {
                line,
                message: format!("`{key}` is set twice"),
            });
        }
        out.push(Entry { line, key, value });
    }
    Ok(out)
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunSpec> {
    let entries = split_lines(text)?;
    let mut spec = RunSpec::default();
    let mut p = spec.params;
    let mut family: Option<String> = None;
    let (mut center, mut width, mut amp_rho, mut amp_u) = (None, None, None, None);
    for e in &entries {
        match e.key {
            "params.n" => p.n = e.usize()?,
            "params.gamma" => p.gamma = e.f64()?,
            "params.k" => p.k = e.f64()?,
            "params.mu" => p.mu = e.f64()?,
            "params.rho_plus" => p.rho_plus = e.f64()?,
            "params.u_b" => p.u_b = e.f64()?,
            "solver.m" => spec.solver.m = e.f64()?,
            "solver.nodes" => spec.solver.nodes = e.usize()?,
            "solver.cfl" => spec.solver.cfl = e.f64()?,
            "solver.t_end" => spec.solver.t_end = e.f64()?,
            "solver.theta" => spec.solver.theta = e.f64()?,
            "solver.snapshot_stride" => {
                spec.solver.snapshot_stride = e.usize()?;
                spec.solver.snapshot_dt = None;
            }
            "solver.snapshot_dt" => spec.solver.snapshot_dt = Some(e.f64()?),
            "solver.dt_max" => spec.solver.dt_max = Some(e.f64()?),
            "solver.max_retries" => spec.solver.max_retries = e.usize()?,
            "solver.outer_grading" => spec.solver.outer_grading = e.f64()?,
            "stationary.r_max" => spec.stationary.r_max = e.f64()?,
            "stationary.tol" => spec.stationary.tol = e.f64()?,
            "initial.family" => family = Some(e.string().to_string()),
            "initial.center" => center = Some(e.f64()?),
            "initial.width" => width = Some(e.f64()?),
            "initial.amp_rho" => amp_rho = Some(e.f64()?),
            "initial.amp_u" => amp_u = Some(e.f64()?),
            "diagnostics.ledger" => spec.diagnostics.ledger = e.bool()?,
            "diagnostics.pointwise" => spec.diagnostics.pointwise = e.bool()?,
            "diagnostics.eta_norms" => spec.diagnostics.eta_norms = e.bool()?,
            "diagnostics.snapshots" => spec.diagnostics.snapshots = e.bool()?,
            "sweep.m_values" => spec.sweep.m_values = e.list()?,
            "sweep.u_b_values" => spec.sweep.u_b_values = e.list()?,
            "sweep.window_r" => spec.sweep.window.0 = e.f64()?,
            "sweep.window_t" => spec.sweep.window.1 = e.f64()?,
            "verify.branch_samples" => spec.verify.branch_samples = e.usize()?,
            "verify.log_samples" => spec.verify.log_samples = e.usize()?,
            "verify.cutoff_samples" => spec.verify.cutoff_samples = e.usize()?,
            "verify.quadrature_samples" => spec.verify.quadrature_samples = e.usize()?,
            "output.dir" => spec.output_dir = PathBuf::from(e.string()),
            "run.seed" => spec.seed = e.u64()?,
            other => unreachable!("key list and match arms disagree on `{other}`"),
        }
    }
    spec.params = validate_params(p)?;
    let set_shape = center.is_some() || width.is_some() || amp_rho.is_some() || amp_u.is_some();
    spec.initial = match family.as_deref().unwrap_or("gaussian-bump") {
        "stationary" => {
            if set_shape {
                return Err(value_error("initial.family", "the stationary family takes no shape parameters"));
            }
            InitialFamily::Stationary
        }
        name @ ("gaussian-bump" | "compact-bump") => {
            let (c0, w0) = (6.0, 2.0);
            let (center, width) = (center.unwrap_or(c0), width.unwrap_or(w0));
            let amp_rho = amp_rho.unwrap_or(0.3 * spec.params.rho_plus);
            let amp_u = amp_u.unwrap_or(0.0);
            if !(width > 0.0) {
                return Err(value_error("initial.width", "must be positive"));
            }
            if !(center >= 1.0) {
                return Err(value_error("initial.center", "must be at least 1"));
            }
            if name == "gaussian-bump" {
                InitialFamily::GaussianBump {
                    center,
                    width,
                    amp_rho,
                    amp_u,
                }
            } else {
                InitialFamily::CompactBump {
                    center,
                    width,
                    amp_rho,
                    amp_u,
                }
            }
        }
        other => {
            return Err(value_error(
                "initial.family",
                format!("unknown family `{other}` (expected stationary, gaussian-bump or compact-bump)"),
            ))
        }
    };
    validate_spec(&spec)?;
    Ok(spec)
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path) -> Result<RunSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

fn validate_params(p: Params) -> Result<Params> {
    if p.n < 2 {
        return Err(value_error("params.n", format!("dimension must be at least 2, got {}", p.n)));
    }
    if !(p.gamma >= 1.0 && p.gamma <= 2.0) {
        return Err(value_error(
            "params.gamma",
            format!("{} lies outside [1, 2], the range covered by the stability theorem", p.gamma),
        ));
    }
    for (key, x) in [("params.k", p.k), ("params.mu", p.mu), ("params.rho_plus", p.rho_plus)] {
        if !(x > 0.0) {
            return Err(value_error(key, format!("must be positive, got {x}")));
        }
    }
    if p.u_b > 0.0 {
        return Err(value_error(
            "params.u_b",
            format!("{} is an inflow velocity; outflow requires u_b < 0 (0 is the no-flow check)", p.u_b),
        ));
    }
    p.validate().map_err(|e| value_error("params", e.to_string()))?;
    Ok(p)
}

/// Key-level checks of everything except the parameters.
pub fn validate_spec(spec: &RunSpec) -> Result<()> {
    let s = &spec.solver;
    if s.nodes < 16 {
        return Err(value_error("solver.nodes", format!("need at least 16 nodes, got {}", s.nodes)));
    }
    if !(s.m > 2.0) {
        return Err(value_error("solver.m", format!("outer radius must exceed 2, got {}", s.m)));
    }
    if !(s.cfl > 0.0 && s.cfl < 1.0) {
        return Err(value_error("solver.cfl", format!("must lie in (0, 1), got {}", s.cfl)));
    }
    if !(s.theta >= 0.5 && s.theta <= 1.0) {
        return Err(value_error("solver.theta", format!("must lie in [0.5, 1], got {}", s.theta)));
    }
    if !(s.t_end >= 0.0) {
        return Err(value_error("solver.t_end", "must be nonnegative"));
    }
    if s.snapshot_stride == 0 {
        return Err(value_error("solver.snapshot_stride", "must be positive"));
    }
    if let Some(dt) = s.snapshot_dt {
        if !(dt > 0.0) {
            return Err(value_error("solver.snapshot_dt", "must be positive"));
        }
    }
    if let Some(dt) = s.dt_max {
        if !(dt > 0.0) {
            return Err(value_error("solver.dt_max", "must be positive"));
        }
    }
    if !(s.outer_grading > 0.0 && s.outer_grading <= 1.0) {
        return Err(value_error("solver.outer_grading", "must lie in (0, 1]"));
    }
    if !(spec.stationary.r_max >= 10.0) {
        return Err(value_error("stationary.r_max", "must be at least 10"));
    }
    if spec.stationary.r_max < s.m {
        return Err(value_error(
            "stationary.r_max",
            format!("profile range {} does not cover the annulus up to m = {}", spec.stationary.r_max, s.m),
        ));
    }
    if !(spec.stationary.tol > 0.0) {
        return Err(value_error("stationary.tol", "must be positive"));
    }
    let sw = &spec.sweep;
    if sw.m_values.len() < 2 || sw.m_values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(value_error("sweep.m_values", "need at least two strictly increasing radii"));
    }
    if sw.m_values.iter().any(|&m| !(m > 2.0)) {
        return Err(value_error("sweep.m_values", "every radius must exceed 2"));
    }
    if sw.u_b_values.is_empty() || sw.u_b_values.iter().any(|&u| u > 0.0) {
        return Err(value_error("sweep.u_b_values", "need at least one value, all nonpositive"));
    }
    if !(sw.window.0 > 1.0 && sw.window.0 <= 0.5 * sw.m_values[0]) {
        return Err(value_error("sweep.window_r", "must lie in (1, m_1 / 2]"));
    }
    if !(sw.window.1 >= 0.0) {
        return Err(value_error("sweep.window_t", "must be nonnegative"));
    }
    let v = &spec.verify;
    for (key, n) in [
        ("verify.branch_samples", v.branch_samples),
        ("verify.log_samples", v.log_samples),
        ("verify.cutoff_samples", v.cutoff_samples),
        ("verify.quadrature_samples", v.quadrature_samples),
    ] {
        if n == 0 {
            return Err(value_error(key, "must be positive"));
        }
    }
    if spec.output_dir.as_os_str().is_empty() {
        return Err(value_error("output.dir", "must not be empty"));
    }
    Ok(())
}
