//! Configuration, experiment orchestration and data export: the process
//! boundary of the lab.
//!
//! Exit codes: 0 when every verdict passes, 1 on a failed verdict, 2 on a
//! configuration or input error, 3 on a numerical failure. Every nonzero exit
//! is preceded by a JSON error record on stderr and, when the output directory
//! is usable, in `error.json`.

pub mod config;
pub mod export;
pub mod verify;

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use clap::{Args, Parser, Subcommand};

use crate::diagnostics::{
    chi_refinement_study, eta_weighted_norms, pointwise_monitors, ChiRun, ChiTable, DiagContext, LedgerBuilder,
};
use crate::solver::{family_initial_data, initialize_lagrangian, LagrangianState};
use crate::stationary::{solve_stationary, stationary_report, DecayReport, StationaryProfile};
use crate::{Error, Params, Result};

pub use config::{load_config, parse_config, validate_spec, DiagnosticsToggles, RunSpec, StationarySpec, SweepSpec, VerifySpec};
pub use export::{read_csv, read_ledger, render_series, write_series, write_text, ProfileRow, SeriesFormat, SeriesRecord, SnapshotRow};
pub use verify::{run_verification, CheckResult, VerifyReport};

/// Environment variable capping the number of concurrent sweep members.
pub const THREADS_ENV: &str = "OUTFLOW_SIM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "outflow-sim", version, about = "Radial viscous outflow: stationary profiles, evolution and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Configuration file (`section.key = value` lines).
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Seed of the randomized verifiers (overrides `run.seed`).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the stationary problem and export the profile and its decay report.
    Stationary(Common),
    /// Run one trajectory with the full diagnostics ledger.
    Evolve(Common),
    /// Self-convergence study in the truncation radius m.
    SweepM {
        #[command(flatten)]
        common: Common,
        /// Radii to compare (overrides `sweep.m_values`).
        #[arg(long, value_delimiter = ',')]
        m_values: Option<Vec<f64>>,
    },
    /// Repeat `evolve` over a list of boundary velocities.
    SweepUb {
        #[command(flatten)]
        common: Common,
        /// Boundary velocities (overrides `sweep.u_b_values`).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        u_b_values: Option<Vec<f64>>,
    },
    /// Randomized certification of the pointwise inequalities.
    Verify(Common),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Stationary(_) => "stationary",
            Command::Evolve(_) => "evolve",
            Command::SweepM { .. } => "sweep-m",
            Command::SweepUb { .. } => "sweep-ub",
            Command::Verify(_) => "verify",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Stationary(c) | Command::Evolve(c) | Command::Verify(c) => c,
            Command::SweepM { common, .. } | Command::SweepUb { common, .. } => common,
        }
    }
}

/// Exit code of an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NonConvergence { .. } | Error::PositivityLoss { .. } | Error::Numerical(_) | Error::InsufficientData(_) => 3,
        _ => 2,
    }
}

/// Verdict of a finished command.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    /// Human-readable lines, one verdict per line.
    pub lines: Vec<String>,
}

/// An error with the state to dump alongside it.
struct Failure {
    error: Error,
    dump: Option<Box<LagrangianState>>,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Self { error, dump: None }
    }
}

/// Machine-readable failure record.
pub fn error_record(command: &str, err: &Error, dump: Option<&Path>) -> serde_json::Value {
    serde_json::json!({
        "status": "error",
        "command": command,
        "kind": err.kind(),
        "exit_code": exit_code(err),
        "message": err.to_string(),
        "dump": dump.map(|p| p.display().to_string()),
    })
}

fn report_failure(command: &str, out: Option<&Path>, failure: Failure) -> i32 {
    let code = exit_code(&failure.error);
    let mut dump_path = None;
    if let (Some(dir), Some(state)) = (out, failure.dump.as_ref()) {
        let path = dir.join("failure_state.csv");
        if export::write_series(&path, &export::snapshot_rows([&**state])).is_ok() {
            dump_path = Some(path);
        }
    }
    let record = error_record(command, &failure.error, dump_path.as_deref());
    let line = record.to_string();
    eprintln!("{line}");
    if let Some(dir) = out {
        // Best effort: the record has already gone to stderr.
        let _ = write_text(&dir.join("error.json"), &format!("{line}\n"));
    }
    code
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run_command(argv: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                print!("{e}");
                return if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand { 2 } else { 0 };
            }
            let err = Error::Input(e.to_string().trim().to_string());
            return report_failure("cli", None, Failure::from(err));
        }
    };
    let name = cli.command.name();
    let spec = match resolve_spec(&cli.command) {
        Ok(s) => s,
        Err(e) => {
            // Only an explicit `--out` is trusted when the configuration is unusable.
            let out = cli.command.common().out.as_deref().filter(|d| std::fs::create_dir_all(d).is_ok());
            return report_failure(name, out, Failure::from(e));
        }
    };
    let out = spec.output_dir.clone();
    if let Err(e) = std::fs::create_dir_all(&out) {
        return report_failure(name, None, Failure::from(Error::io(&out, e)));
    }
    let result = match &cli.command {
        Command::Stationary(_) => cmd_stationary(&spec),
        Command::Evolve(_) => cmd_evolve(&spec),
        Command::SweepM { .. } => cmd_sweep_m(&spec).map_err(Failure::from),
        Command::SweepUb { .. } => cmd_sweep_ub(&spec).map_err(Failure::from),
        Command::Verify(_) => cmd_verify(&spec).map_err(Failure::from),
    };
    match result {
        Ok(outcome) => {
            for line in &outcome.lines {
                println!("{line}");
            }
            if outcome.passed {
                0
            } else {
                1
            }
        }
        Err(f) => report_failure(name, Some(&out), f),
    }
}

fn resolve_spec(cmd: &Command) -> Result<RunSpec> {
    let common = cmd.common();
    let mut spec = match &common.config {
        Some(path) => load_config(path)?,
        None => RunSpec::default(),
    };
    if let Some(out) = &common.out {
        spec.output_dir = out.clone();
    }
    if let Some(seed) = common.seed {
        spec.seed = seed;
    }
    match cmd {
        Command::SweepM { m_values: Some(ms), .. } => spec.sweep.m_values = ms.clone(),
        Command::SweepUb {
            u_b_values: Some(us), ..
        } => spec.sweep.u_b_values = us.clone(),
        _ => {}
    }
    validate_spec(&spec)?;
    Ok(spec)
}

fn json_opt(x: Option<f64>) -> serde_json::Value {
    x.map_or(serde_json::Value::Null, |v| serde_json::json!(v))
}

/// JSON form of a decay report; undefined slopes are `null`.
pub fn decay_report_json(rep: &DecayReport) -> serde_json::Value {
    let defined = rep.worst_slope_error().is_some();
    serde_json::json!({
        "window": [rep.window.0, rep.window.1],
        "nodes_in_window": rep.nodes_in_window,
        "slopes_defined": defined,
        "slopes": {
            "deficit": json_opt(rep.slope_deficit),
            "drho": json_opt(rep.slope_drho),
            "du": json_opt(rep.slope_du),
            "ddrho": json_opt(rep.slope_ddrho),
        },
        "targets": {
            "deficit": rep.target_deficit,
            "drho": rep.target_drho,
            "du": rep.target_du,
            "ddrho": rep.target_ddrho,
        },
        "worst_slope_error": json_opt(rep.worst_slope_error()),
        "rho_increasing": rep.rho_increasing,
        "rho_below_plus": rep.rho_below_plus,
        "du_positive": rep.du_positive,
        "flux_deviation": rep.flux_deviation,
        "algebraic_deviation": rep.algebraic_deviation,
    })
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Input(e.to_string()))?;
    write_text(path, &format!("{text}\n"))
}

fn verdict(lines: &mut Vec<String>, ok: bool, what: String) -> bool {
    lines.push(format!("{} {what}", if ok { "PASS" } else { "FAIL" }));
    ok
}

fn cmd_stationary(spec: &RunSpec) -> std::result::Result<Outcome, Failure> {
    let profile = solve_stationary(&spec.params, spec.stationary.r_max, spec.stationary.tol)?;
    let report = stationary_report(&profile)?;
    let dir = &spec.output_dir;
    write_series(&dir.join("profile.csv"), &export::profile_rows(&profile))?;
    write_json(&dir.join("decay_report.json"), &decay_report_json(&report))?;
    let mut lines = Vec::new();
    let mut ok = verdict(
        &mut lines,
        report.flux_deviation <= 1e-8,
        format!("flux identity: max relative deviation {:.3e}", report.flux_deviation),
    );
    ok &= verdict(&mut lines, report.rho_increasing, "density profile increasing".into());
    if spec.params.u_b < 0.0 {
        ok &= verdict(&mut lines, report.du_positive, "velocity derivative positive".into());
    }
    match report.worst_slope_error() {
        Some(err) => {
            ok &= verdict(&mut lines, err <= 0.3, format!("decay exponents within 0.3 (worst miss {err:.3})"));
        }
        None => lines.push("SKIP decay exponents undefined for a constant profile".into()),
    }
    Ok(Outcome { passed: ok, lines })
}

/// Verdicts and files of one trajectory.
#[derive(Debug, Clone)]
pub struct MemberResult {
    pub label: String,
    pub passed: bool,
    pub lines: Vec<String>,
    pub summary: serde_json::Value,
    pub snapshots: Vec<LagrangianState>,
    pub m0: f64,
}

/// Runs one trajectory of `spec` with `profile`, exporting into `dir`.
fn run_member(
    spec: &RunSpec,
    profile: Arc<StationaryProfile>,
    dir: &Path,
    label: &str,
    keep_snapshots: bool,
) -> std::result::Result<MemberResult, Failure> {
    let p = spec.params;
    let init = family_initial_data(spec.initial, profile.clone(), spec.solver.m)?;
    let mut sim = initialize_lagrangian(&init, &p, &spec.solver)?;
    let ctx = DiagContext::from_simulation(&sim);
    let toggles = spec.diagnostics;
    let map = sim.map.clone();
    let mut ledger = LedgerBuilder::new(ctx.clone());
    ledger.start(&sim.state)?;
    let mut snaps = vec![sim.state.clone()];
    let (mut sob_ok, mut eta_ok, mut eta_margin) = (true, true, f64::INFINITY);
    let (mut win_lo, mut win_hi) = (f64::INFINITY, 0.0f64);
    let mut b_excess = 0.0f64;
    let mut monitor = |s: &LagrangianState| -> Result<()> {
        if toggles.pointwise {
            let pw = pointwise_monitors(s, &map, &p)?;
            sob_ok &= pw.sobolev_holds;
            if let Some((lo, hi)) = pw.window {
                win_lo = win_lo.min(lo);
                win_hi = win_hi.max(hi);
            }
            b_excess = b_excess.max(pw.b_excess);
        }
        if toggles.eta_norms {
            for delta in [0.5, 1.0, 2.0] {
                let e = eta_weighted_norms(s, ctx.m0, &p, delta)?;
                eta_ok &= e.holds_a && e.holds_b;
                eta_margin = eta_margin.min(e.rhs_a - e.lhs_a).min(e.rhs_b - e.lhs_b);
            }
        }
        Ok(())
    };
    monitor(&sim.state)?;
    let run = sim.evolve_with(spec.solver.t_end, |prev, next, is_snap| {
        ledger.push(prev, next, is_snap)?;
        if is_snap {
            monitor(next)?;
            if toggles.snapshots || keep_snapshots {
                snaps.push(next.clone());
            }
        }
        Ok(())
    });
    if let Err(error) = run {
        return Err(Failure {
            error,
            dump: Some(Box::new(sim.state.clone())),
        });
    }
    if toggles.ledger {
        write_series(&dir.join("ledger.jsonl"), &ledger.records)?;
    }
    if toggles.snapshots {
        write_series(&dir.join("snapshots.csv"), &export::snapshot_rows(&snaps))?;
    } else {
        write_series(&dir.join("final.csv"), &export::snapshot_rows([&sim.state]))?;
    }
    let mut lines = Vec::new();
    let energy = &ledger.energy;
    let mut ok = verdict(
        &mut lines,
        energy.iter().all(|e| e.nonincreasing),
        format!("{label}: energy nonincreasing up to eps_disc (eps_total {:.3e})", ledger.eps_total()),
    );
    ok &= verdict(
        &mut lines,
        energy.iter().all(|e| e.inequality_holds),
        format!("{label}: energy inequality at every snapshot"),
    );
    let diss_ok = ledger
        .records
        .iter()
        .all(|r| r.dissipation_visc >= 0.0 && r.dissipation_bdry >= 0.0 && r.sink_psi >= 0.0 && r.sink_g >= 0.0);
    ok &= verdict(&mut lines, diss_ok, format!("{label}: dissipation entries nonnegative"));
    let v_min = ledger.records.iter().map(|r| r.v_min).fold(f64::INFINITY, f64::min);
    let v_max = ledger.records.iter().map(|r| r.v_max).fold(0.0, f64::max);
    ok &= verdict(&mut lines, v_min > 0.0, format!("{label}: v in [{v_min:.4}, {v_max:.4}]"));
    if toggles.pointwise {
        ok &= verdict(&mut lines, sob_ok, format!("{label}: sup bound on r^(n-2) psi^2 at every snapshot"));
    }
    if toggles.eta_norms {
        ok &= verdict(
            &mut lines,
            eta_ok,
            format!("{label}: weighted interpolation inequalities (min margin {eta_margin:.3e})"),
        );
    }
    let first = ledger.records.first().copied();
    let last = ledger.records.last().copied();
    let summary = serde_json::json!({
        "label": label,
        "passed": ok,
        "m": spec.solver.m,
        "nodes": spec.solver.nodes,
        "u_b": p.u_b,
        "t_end": sim.state.t,
        "steps": sim.state.step,
        "m0": ctx.m0,
        "eps_total": ledger.eps_total(),
        "energy": [first.map(|r| r.energy), last.map(|r| r.energy)],
        "conv_metric": [first.map(|r| r.conv_metric), last.map(|r| r.conv_metric)],
        "v_range": [v_min, v_max],
        "unit_window_range": if win_hi > 0.0 { serde_json::json!([win_lo, win_hi]) } else { serde_json::Value::Null },
        "b_envelope_excess": b_excess,
    });
    Ok(MemberResult {
        label: label.to_string(),
        passed: ok,
        lines,
        summary,
        snapshots: snaps,
        m0: ctx.m0,
    })
}

fn cmd_evolve(spec: &RunSpec) -> std::result::Result<Outcome, Failure> {
    let profile = Arc::new(solve_stationary(&spec.params, spec.stationary.r_max, spec.stationary.tol)?);
    let member = run_member(spec, profile, &spec.output_dir, "evolve", false)?;
    write_json(&spec.output_dir.join("summary.json"), &member.summary)?;
    Ok(Outcome {
        passed: member.passed,
        lines: member.lines,
    })
}

/// Number of worker threads: `OUTFLOW_SIM_THREADS` if set, else the machine's parallelism.
pub fn thread_cap() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs `jobs` independent tasks on at most `threads` workers; results keep job order.
pub fn run_parallel<T, F>(jobs: usize, threads: usize, task: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..jobs).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads.clamp(1, jobs.max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= jobs {
                    break;
                }
                let out = task(i);
                slots.lock().expect("result slots poisoned")[i] = Some(out);
            });
        }
    });
    slots
        .into_inner()
        .expect("result slots poisoned")
        .into_iter()
        .map(|s| s.expect("every job ran"))
        .collect()
}

/// Serializes writes to the sweep summary. Lines are kept in member order so
/// the final file does not depend on completion order.
pub struct SummaryWriter {
    path: PathBuf,
    lines: Mutex<Vec<Option<String>>>,
}

impl SummaryWriter {
    pub fn new(path: PathBuf, members: usize) -> Self {
        Self {
            path,
            lines: Mutex::new(vec![None; members]),
        }
    }

    pub fn record(&self, member: usize, value: &serde_json::Value) -> Result<()> {
        let mut lines = self.lines.lock().expect("summary writer poisoned");
        lines[member] = Some(value.to_string());
        let mut text = String::new();
        for l in lines.iter().flatten() {
            text.push_str(l);
            text.push('\n');
        }
        write_text(&self.path, &text)
    }
}

/// One sweep member: its spec, shared profile and subdirectory label.
type Member = (RunSpec, Arc<StationaryProfile>, String);

/// Runs the members concurrently, each in its own subdirectory.
fn run_members(
    specs: &[Member],
    out: &Path,
    keep_snapshots: bool,
) -> Result<Vec<MemberResult>> {
    let writer = SummaryWriter::new(out.join("summary.jsonl"), specs.len());
    let results = run_parallel(specs.len(), thread_cap(), |i| {
        let (spec, profile, label) = &specs[i];
        let dir = out.join(label);
        let res = std::fs::create_dir_all(&dir)
            .map_err(|e| Failure::from(Error::io(&dir, e)))
            .and_then(|_| run_member(spec, profile.clone(), &dir, label, keep_snapshots));
        let entry = match &res {
            Ok(m) => m.summary.clone(),
            Err(f) => {
                let mut dump = None;
                if let Some(state) = &f.dump {
                    let path = dir.join("failure_state.csv");
                    if write_series(&path, &export::snapshot_rows([&**state])).is_ok() {
                        dump = Some(path);
                    }
                }
                error_record(label, &f.error, dump.as_deref())
            }
        };
        writer.record(i, &entry).map(|_| res)
    });
    let mut members = Vec::with_capacity(results.len());
    for r in results {
        match r? {
            Ok(m) => members.push(m),
            Err(f) => return Err(f.error),
        }
    }
    Ok(members)
}

fn member_label(prefix: &str, x: f64) -> String {
    format!("{prefix}_{x}")
}

fn chi_table_json(t: &ChiTable) -> serde_json::Value {
    let pairs: Vec<serde_json::Value> = t
        .pairs
        .iter()
        .map(|&(a, b, d)| serde_json::json!({ "m_i": a, "m_j": b, "sup_diff": d }))
        .collect();
    serde_json::json!({
        "ms": t.ms,
        "window": { "r_max": t.window.0, "t_max": t.window.1 },
        "pairs": pairs,
        "consecutive": t.consecutive,
        "decreasing": t.decreasing,
        "chi_is_one": t.chi_is_one,
    })
}

/// Member specs of `sweep-m`: node counts scale with `m` so the radial spacing is shared.
pub fn sweep_m_specs(spec: &RunSpec) -> Result<Vec<RunSpec>> {
    if spec.solver.snapshot_dt.is_none() {
        return Err(Error::ConfigValue {
            key: "solver.snapshot_dt".into(),
            message: "sweep-m compares runs at common times and needs time-based snapshots".into(),
        });
    }
    Ok(spec
        .sweep
        .m_values
        .iter()
        .map(|&m| {
            let mut s = spec.clone();
            s.solver.m = m;
            s.solver.nodes = ((spec.solver.nodes as f64 * m / spec.solver.m).round() as usize).max(16);
            s.solver.t_end = spec.sweep.window.1;
            s.diagnostics.snapshots = false;
            s
        })
        .collect())
}

fn cmd_sweep_m(spec: &RunSpec) -> Result<Outcome> {
    let members = sweep_m_specs(spec)?;
    let m_max = spec.sweep.m_values.iter().cloned().fold(0.0, f64::max);
    let r_max = spec.stationary.r_max.max(m_max);
    let profile = Arc::new(solve_stationary(&spec.params, r_max, spec.stationary.tol)?);
    let jobs: Vec<Member> = members
        .into_iter()
        .map(|s| {
            let label = member_label("m", s.solver.m);
            (s, profile.clone(), label)
        })
        .collect();
    let results = run_members(&jobs, &spec.output_dir, true)?;
    let runs: Vec<ChiRun> = results
        .into_iter()
        .zip(&jobs)
        .map(|(r, (s, _, _))| ChiRun {
            m: s.solver.m,
            m0: r.m0,
            profile: profile.clone(),
            snapshots: r.snapshots,
        })
        .collect();
    let table = chi_refinement_study(&runs, spec.sweep.window.0, spec.sweep.window.1)?;
    write_json(&spec.output_dir.join("chi_table.json"), &chi_table_json(&table))?;
    let mut lines: Vec<String> = table
        .pairs
        .iter()
        .map(|(a, b, d)| format!("m = {a} vs m = {b}: sup difference {d:.3e}"))
        .collect();
    let ok = verdict(
        &mut lines,
        table.decreasing,
        format!("pairwise differences decrease in m: {:?}", table.consecutive),
    );
    Ok(Outcome { passed: ok, lines })
}

fn cmd_sweep_ub(spec: &RunSpec) -> Result<Outcome> {
    let mut jobs = Vec::new();
    for &u_b in &spec.sweep.u_b_values {
        let mut s = spec.clone();
        s.params = Params { u_b, ..spec.params };
        let profile = Arc::new(solve_stationary(&s.params, s.stationary.r_max, s.stationary.tol)?);
        jobs.push((s, profile, member_label("ub", u_b)));
    }
    let results = run_members(&jobs, &spec.output_dir, false)?;
    let mut lines = Vec::new();
    let mut ok = true;
    for r in results {
        ok &= r.passed;
        lines.extend(r.lines);
    }
    Ok(Outcome { passed: ok, lines })
}

fn cmd_verify(spec: &RunSpec) -> Result<Outcome> {
    let report = run_verification(spec.seed, &spec.verify)?;
    write_json(&spec.output_dir.join("verify_report.json"), &report.to_json())?;
    Ok(Outcome {
        passed: report.passed(),
        lines: report.lines(),
    })
}
