//! The `detplace` command line.
//!
//! Every subcommand reads one scenario document. JSON output has sorted keys
//! and floats rounded to nine significant digits, so repeated runs are
//! byte-identical. Exit codes: 0 success, 1 internal error, 2 invalid input,
//! 3 resource limit.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::coverage::{build_coverage, CoverageTable};
use crate::objective::{expected_casualties, ObjectiveBreakdown};
use crate::pathing::{all_paths, ThreatPath};
use crate::report::{format_sig, to_stable_json, to_stable_line};
use crate::scenario::{parse_scenario, validate_scenario, GridScenario, Pair};
use crate::solver::{
    enumerate_optimal, solve_bnb_traced, Budgets, NodeEvent, SolveError, SolveOptions,
    SolveResult, SolveStatus,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "detplace", version, about = "Two-layer detector placement on a threat grid")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a scenario and list its violations.
    Validate { scenario: PathBuf },
    /// Shortest attacker route per entrance/target pair, one JSON line each.
    Paths { scenario: PathBuf },
    /// Detection probabilities and candidate sets.
    Coverage { scenario: PathBuf },
    /// Optimal placement by branch-and-bound.
    Solve {
        scenario: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Optimal placement by exhaustive enumeration (small instances).
    Enumerate { scenario: PathBuf },
    /// Re-solve while one parameter varies; CSV on stdout.
    Sweep {
        scenario: PathBuf,
        #[arg(long, value_enum)]
        param: SweepParam,
        /// Comma-separated, strictly increasing.
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        values: Vec<f64>,
        #[arg(long, value_enum, default_value_t = SweepMode::TwoLayer)]
        mode: SweepMode,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Relative optimality gap.
    #[arg(long, default_value_t = 1e-6)]
    pub gap: f64,
    #[arg(long, default_value_t = 10_000_000)]
    pub node_limit: u64,
    /// Seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
    /// McCormick segments on the primary miss probability.
    #[arg(long, default_value_t = 4)]
    pub partitions: usize,
    /// Tangent cuts per exponential term.
    #[arg(long, default_value_t = 4)]
    pub tangents: usize,
    /// Log every branch-and-bound node to stderr as a JSON line.
    #[arg(long)]
    pub trace: bool,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

impl SolverArgs {
    pub fn options(&self) -> SolveOptions {
        SolveOptions {
            gap_tolerance: self.gap,
            node_limit: self.node_limit,
            mccormick_partitions: self.partitions,
            tangent_breakpoints: self.tangents,
            time_limit: self.time_limit,
            parallel_nodes: self.threads.max(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum SweepParam {
    AlphaP,
    AlphaS,
    BetaP,
    BetaS,
    BudgetP,
    BudgetS,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::AlphaP => "alpha_p",
            SweepParam::AlphaS => "alpha_s",
            SweepParam::BetaP => "beta_p",
            SweepParam::BetaS => "beta_s",
            SweepParam::BudgetP => "budget_p",
            SweepParam::BudgetS => "budget_s",
        }
    }

    /// Copy of `s` with this parameter set to `value`.
    pub fn apply(self, s: &GridScenario, value: f64) -> GridScenario {
        let mut s = s.clone();
        let slot = match self {
            SweepParam::AlphaP => &mut s.primary.alpha_m,
            SweepParam::AlphaS => &mut s.secondary.alpha_m,
            SweepParam::BetaP => &mut s.primary.beta_per_m,
            SweepParam::BetaS => &mut s.secondary.beta_per_m,
            SweepParam::BudgetP => &mut s.primary.budget,
            SweepParam::BudgetS => &mut s.secondary.budget,
        };
        *slot = value;
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum SweepMode {
    TwoLayer,
    OneLayer,
    Both,
}

/// One evaluated point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub mode: &'static str,
    pub result: Result<SolveResult, String>,
    pub seconds: f64,
}

impl SweepRow {
    pub fn status(&self) -> String {
        match &self.result {
            Ok(r) => format!("{:?}", r.status),
            Err(e) => format!("Error: {}", e.replace(',', ";")),
        }
    }
}

pub const SWEEP_HEADER: &str = "param,value,mode,objective,gap,nodes,seconds,status";

#[derive(Serialize)]
struct SolveReport<'a> {
    result: &'a SolveResult,
    breakdown: &'a ObjectiveBreakdown,
}

#[derive(Serialize)]
struct TraceLine {
    id: u64,
    depth: u32,
    bound: f64,
    status: &'static str,
    fallback: bool,
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

/// Failure that ends a command with the given exit code.
struct Exit(i32);

type Outcome = Result<i32, Exit>;

impl Io<'_> {
    fn fail(&mut self, code: i32, msg: impl std::fmt::Display) -> Exit {
        let _ = writeln!(self.err, "error: {msg}");
        Exit(code)
    }
}

/// Parses `args` (program name first) and runs the command, writing to the
/// given streams. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let mut io = Io { out, err };
    let code = match dispatch(cli.command, &mut io) {
        Ok(code) | Err(Exit(code)) => code,
    };
    let _ = io.out.flush();
    code
}

fn dispatch(cmd: Command, io: &mut Io) -> Outcome {
    match cmd {
        Command::Validate { scenario } => cmd_validate(&scenario, io),
        Command::Paths { scenario } => cmd_paths(&scenario, io),
        Command::Coverage { scenario } => cmd_coverage(&scenario, io),
        Command::Solve { scenario, solver } => cmd_solve(&scenario, &solver, io),
        Command::Enumerate { scenario } => cmd_enumerate(&scenario, io),
        Command::Sweep { scenario, param, values, mode, solver } => {
            cmd_sweep(&scenario, param, &values, mode, &solver, io)
        }
    }
}

fn emit(io: &mut Io, text: &str) -> Result<(), Exit> {
    writeln!(io.out, "{text}").map_err(|e| io.fail(EXIT_INTERNAL, e))
}

fn read_scenario(path: &Path, io: &mut Io) -> Result<GridScenario, Exit> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| io.fail(EXIT_INVALID, format!("{}: {e}", path.display())))?;
    parse_scenario(&text).map_err(|e| io.fail(EXIT_INVALID, format!("{}: {e}", path.display())))
}

/// Reads and validates; violations go to stderr as JSON.
fn load(path: &Path, io: &mut Io) -> Result<GridScenario, Exit> {
    let s = read_scenario(path, io)?;
    let report = validate_scenario(&s);
    if !report.is_valid() {
        let _ = writeln!(io.err, "{}", to_stable_json(&report));
        return Err(io.fail(EXIT_INVALID, format!("{}: invalid scenario", path.display())));
    }
    Ok(s)
}

fn paths_and_coverage(
    s: &GridScenario,
    io: &mut Io,
) -> Result<(std::collections::BTreeMap<Pair, ThreatPath>, CoverageTable), Exit> {
    let paths = all_paths(s).map_err(|e| io.fail(EXIT_INVALID, e))?;
    let cov = build_coverage(s, &paths);
    Ok((paths, cov))
}

fn cmd_validate(path: &Path, io: &mut Io) -> Outcome {
    let s = read_scenario(path, io)?;
    let report = validate_scenario(&s);
    emit(io, &to_stable_json(&report))?;
    Ok(if report.is_valid() { EXIT_OK } else { EXIT_INVALID })
}

fn cmd_paths(path: &Path, io: &mut Io) -> Outcome {
    let s = load(path, io)?;
    let (paths, _) = paths_and_coverage(&s, io)?;
    for p in paths.values() {
        emit(io, &to_stable_line(p))?;
    }
    Ok(EXIT_OK)
}

fn cmd_coverage(path: &Path, io: &mut Io) -> Outcome {
    let s = load(path, io)?;
    let (_, cov) = paths_and_coverage(&s, io)?;
    emit(io, &to_stable_json(&cov.to_json_value()))?;
    Ok(EXIT_OK)
}

fn report(s: &GridScenario, cov: &CoverageTable, r: &SolveResult, io: &mut Io) -> Outcome {
    let breakdown = expected_casualties(s, cov, &r.placement).map_err(|e| io.fail(EXIT_INTERNAL, e))?;
    emit(io, &to_stable_json(&SolveReport { result: r, breakdown: &breakdown }))?;
    Ok(match r.status {
        SolveStatus::Optimal | SolveStatus::GapReached => EXIT_OK,
        SolveStatus::NodeLimit | SolveStatus::TimeLimit => EXIT_LIMIT,
        SolveStatus::Infeasible => EXIT_INTERNAL,
    })
}

fn solver_error(io: &mut Io, e: SolveError) -> Exit {
    let code = match e {
        SolveError::InstanceTooLarge { .. } => EXIT_LIMIT,
        SolveError::BadOptions(_) => EXIT_INVALID,
    };
    io.fail(code, e)
}

fn solve_one(
    s: &GridScenario,
    cov: &CoverageTable,
    budgets: Budgets,
    args: &SolverArgs,
    err: &mut dyn Write,
) -> Result<SolveResult, SolveError> {
    let opts = args.options();
    if args.trace {
        let mut log = |ev: &NodeEvent| {
            let line = TraceLine {
                id: ev.node.id,
                depth: ev.node.depth,
                bound: ev.bound,
                status: ev.outcome.as_str(),
                fallback: ev.fallback,
            };
            let _ = writeln!(err, "{}", to_stable_line(&line));
        };
        solve_bnb_traced(s, cov, budgets, &opts, &mut log)
    } else {
        solve_bnb_traced(s, cov, budgets, &opts, &mut |_| {})
    }
}

fn cmd_solve(path: &Path, args: &SolverArgs, io: &mut Io) -> Outcome {
    let s = load(path, io)?;
    let (_, cov) = paths_and_coverage(&s, io)?;
    let r = solve_one(&s, &cov, Budgets::from_scenario(&s), args, io.err)
        .map_err(|e| solver_error(io, e))?;
    report(&s, &cov, &r, io)
}

fn cmd_enumerate(path: &Path, io: &mut Io) -> Outcome {
    let s = load(path, io)?;
    let (_, cov) = paths_and_coverage(&s, io)?;
    let r = enumerate_optimal(&s, &cov, Budgets::from_scenario(&s)).map_err(|e| solver_error(io, e))?;
    report(&s, &cov, &r, io)
}

/// Solves `s` at every value of `param` in each requested mode. Rows are
/// ordered by value, then two-layer before one-layer.
pub fn run_sweep(
    s: &GridScenario,
    param: SweepParam,
    values: &[f64],
    mode: SweepMode,
    args: &SolverArgs,
    err: &mut dyn Write,
) -> Vec<SweepRow> {
    let modes: &[&'static str] = match mode {
        SweepMode::TwoLayer => &["two_layer"],
        SweepMode::OneLayer => &["one_layer"],
        SweepMode::Both => &["two_layer", "one_layer"],
    };
    let mut rows = Vec::new();
    for &value in values {
        let point = param.apply(s, value);
        let report = validate_scenario(&point);
        let prepared = if report.is_valid() {
            all_paths(&point)
                .map(|paths| build_coverage(&point, &paths))
                .map_err(|e| e.to_string())
        } else {
            Err(report.violations.iter().map(|v| v.message.as_str()).collect::<Vec<_>>().join("; "))
        };
        for &m in modes {
            let start = Instant::now();
            let result = prepared.clone().and_then(|cov| {
                let mut budgets = Budgets::from_scenario(&point);
                if m == "one_layer" {
                    budgets = budgets.one_layer();
                }
                solve_one(&point, &cov, budgets, args, err).map_err(|e| e.to_string())
            });
            rows.push(SweepRow { value, mode: m, result, seconds: start.elapsed().as_secs_f64() });
        }
    }
    rows
}

/// Monotonicity problems in sweep rows: objectives must not rise along the
/// sweep within a mode, and two-layer must not exceed one-layer at a value.
pub fn sweep_violations(rows: &[SweepRow], gap: f64) -> Vec<String> {
    let solved = |r: &SweepRow| match &r.result {
        Ok(res) if matches!(res.status, SolveStatus::Optimal | SolveStatus::GapReached) => {
            Some(res.objective)
        }
        _ => None,
    };
    let tol = |a: f64, b: f64| 1e-9 + 2.0 * gap * a.abs().max(b.abs());
    let mut out = Vec::new();
    for mode in ["two_layer", "one_layer"] {
        let mut prev: Option<(f64, f64)> = None;
        for r in rows.iter().filter(|r| r.mode == mode) {
            if let Some(obj) = solved(r) {
                if let Some((pv, po)) = prev {
                    if obj > po + tol(obj, po) {
                        out.push(format!("{mode}: objective rose from {po} at {pv} to {obj} at {}", r.value));
                    }
                }
                prev = Some((r.value, obj));
            }
        }
    }
    for pair in rows.windows(2) {
        if pair[0].mode == "two_layer" && pair[1].mode == "one_layer" && pair[0].value == pair[1].value {
            if let (Some(two), Some(one)) = (solved(&pair[0]), solved(&pair[1])) {
                if two > one + tol(two, one) {
                    out.push(format!("two_layer {two} exceeds one_layer {one} at {}", pair[0].value));
                }
            }
        }
    }
    out
}

pub fn sweep_csv_line(param: SweepParam, row: &SweepRow) -> String {
    let (objective, gap, nodes) = match &row.result {
        Ok(r) => (
            format_sig(r.objective),
            format_sig(r.relative_gap),
            r.nodes_explored.to_string(),
        ),
        Err(_) => (String::new(), String::new(), String::new()),
    };
    format!(
        "{},{},{},{},{},{},{:.6},{}",
        param.name(),
        format_sig(row.value),
        row.mode,
        objective,
        gap,
        nodes,
        row.seconds,
        row.status()
    )
}

fn cmd_sweep(
    path: &Path,
    param: SweepParam,
    values: &[f64],
    mode: SweepMode,
    args: &SolverArgs,
    io: &mut Io,
) -> Outcome {
    if values.is_empty() || values.windows(2).any(|w| !(w[0] < w[1])) || values.iter().any(|v| !v.is_finite()) {
        return Err(io.fail(EXIT_INVALID, "--values must be finite and strictly increasing"));
    }
    let s = load(path, io)?;
    let rows = run_sweep(&s, param, values, mode, args, io.err);
    emit(io, SWEEP_HEADER)?;
    for row in &rows {
        emit(io, &sweep_csv_line(param, row))?;
    }
    let problems = sweep_violations(&rows, args.gap);
    if !problems.is_empty() {
        for p in &problems {
            let _ = writeln!(io.err, "monotonicity violation: {p}");
        }
        return Ok(EXIT_INTERNAL);
    }
    let limited = rows.iter().any(|r| {
        matches!(&r.result, Ok(res) if matches!(res.status, SolveStatus::NodeLimit | SolveStatus::TimeLimit))
    });
    let failed = rows.iter().any(|r| r.result.is_err());
    Ok(if failed {
        EXIT_INVALID
    } else if limited {
        EXIT_LIMIT
    } else {
        EXIT_OK
    })
}

