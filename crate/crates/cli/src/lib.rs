//! Command-line front end for the disclosure decision engine.
//!
//! [`run`] parses arguments, dispatches to the engine and returns the exit
//! code together with everything that should be printed, so the whole
//! interface can be exercised without spawning a process.
//!
//! Exit codes: `0` success (a withhold verdict or an infeasible balance is
//! still a successful answer), `2` bad input of any kind, `1` internal
//! failures such as an unwritable output file or a failed oracle check.

mod report;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use disclosure_core::continuous::spec::{ConsumerFamilies, ContinuousSection, FamilySpec};
use disclosure_core::continuous::{
    cdf_sup_distance, risk_density, solve_matching_disclosure, ConsumerDensities, DEFAULT_GRID_N,
};
use disclosure_core::format::parse_scenario_file;
use disclosure_core::impact::{uniform_grid, SweepRow};
use disclosure_core::montecarlo::{oracle_compare, simulate, SimConfig, SimResult};
use disclosure_core::propagation::{path_disclosure, simple_paths, DEFAULT_PATH_CAP};
use disclosure_core::scenario::Finding;
use disclosure_core::{
    balance_q2, evaluate, message_distribution, sweep, AgentId, Balance, BinaryCase, DecisionReport64, Error, Hop,
    ParallelKind, Scenario64, SerialKind,
};

use report::{banner, cell, decision_block, digest, num, opt_cell, vector, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "disclosure", version)]
#[command(about = "Decide whether to share a possibly degraded message with consumers in a trust network")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Scenario file (JSON)
    #[arg(value_name = "SCENARIO")]
    pub scenario: PathBuf,

    /// Restrict the report to one consumer
    #[arg(long)]
    pub consumer: Option<String>,

    /// Serial operator along a path: product | min
    #[arg(long, value_name = "OP")]
    pub serial: Option<SerialKind>,

    /// Parallel operator across paths: min | product
    #[arg(long, value_name = "OP")]
    pub parallel: Option<ParallelKind>,

    /// Also write machine-readable output to this file
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a scenario file and list findings
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Effective disclosure degree and delivered message per consumer
    Propagate {
        #[command(flatten)]
        common: Common,
    },
    /// Expected benefit, risk and net impact per consumer
    Evaluate {
        #[command(flatten)]
        common: Common,
    },
    /// Share/withhold verdict with the two-outcome threshold when it applies
    Decide {
        #[command(flatten)]
        common: Common,
    },
    /// Inference probability at which consumer 2 matches consumer 1's expected risk
    Balance(BalanceArgs),
    /// Evaluate over a grid of disclosure degrees
    Sweep {
        #[command(flatten)]
        common: Common,

        /// Number of equally spaced degrees in [0, 1]
        #[arg(long, default_value_t = 11, conflicts_with = "grid")]
        points: usize,

        /// Explicit comma-separated degrees
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
    },
    /// Monte Carlo estimate of the expectations
    Simulate {
        #[command(flatten)]
        common: Common,

        #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,

        #[arg(long, default_value_t = 0)]
        seed: u64,

        /// Check the estimates against the analytic values (3 standard errors)
        #[arg(long)]
        compare: bool,
    },
    /// Risk density of the continuous model and equal-impact matching
    Continuous(ContinuousArgs),
}

#[derive(Args, Debug)]
pub struct BalanceArgs {
    /// Scenario to take both consumers' parameters from
    #[arg(value_name = "SCENARIO")]
    pub scenario: Option<PathBuf>,

    /// Consumer 1 (scenario mode)
    #[arg(long, requires = "scenario")]
    pub consumer: Option<String>,

    /// Consumer 2 (scenario mode)
    #[arg(long, requires = "scenario")]
    pub versus: Option<String>,

    /// Consumer 1's inference probability
    #[arg(long, conflicts_with = "scenario")]
    pub q1: Option<f64>,

    /// Consumer 1's low-risk probabilities `w(0),w(1)`
    #[arg(long, value_delimiter = ',', conflicts_with = "scenario")]
    pub w1: Option<Vec<f64>>,

    /// Consumer 2's low-risk probabilities `w(0),w(1)`
    #[arg(long, value_delimiter = ',', conflicts_with = "scenario")]
    pub w2: Option<Vec<f64>>,

    /// Risk levels `r_A,r_B` used to print the matched expected risks
    #[arg(long, value_delimiter = ',', conflicts_with = "scenario")]
    pub levels: Option<Vec<f64>>,

    #[arg(long, value_name = "OP")]
    pub serial: Option<SerialKind>,

    #[arg(long, value_name = "OP")]
    pub parallel: Option<ParallelKind>,

    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ContinuousArgs {
    #[command(flatten)]
    pub common: Common,

    /// Grid intervals on [0, 1]
    #[arg(long)]
    pub grid_n: Option<usize>,

    /// `CONSUMER.inference=SPEC` or `CONSUMER.impact=SPEC`, e.g. `James.inference=tilt(-1,2)`
    #[arg(long = "family", value_name = "SPEC")]
    pub families: Vec<String>,

    /// Disclosure degree at which to report the risk density
    #[arg(long)]
    pub x: Option<f64>,

    /// Find the degree for `--versus` whose mean impact equals the consumer's at this degree
    #[arg(long, value_name = "X1", requires = "versus")]
    pub match_x1: Option<f64>,

    /// Second consumer for `--match-x1`
    #[arg(long)]
    pub versus: Option<String>,
}

/// Exit code plus the text destined for stdout and stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Failure {
    Input(String),
    Internal(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Self::Input(_) => EXIT_INPUT,
            Self::Internal(_) => EXIT_INTERNAL,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Input(m) | Self::Internal(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::Input(e.to_string())
    }
}

type CmdResult = Result<Report, Failure>;

#[derive(Default)]
struct Report {
    text: String,
    warnings: String,
    table: Option<Table>,
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: EXIT_INPUT,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: EXIT_OK,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    let (result, csv) = dispatch(&cli.command);
    let report = match result {
        Ok(r) => r,
        Err(f) => {
            return Outcome {
                code: f.code(),
                stdout: String::new(),
                stderr: format!("error: {}\n", f.message()),
            }
        }
    };
    if let (Some(path), Some(table)) = (csv, report.table) {
        if let Err(e) = table.save(path) {
            return Outcome {
                code: EXIT_INTERNAL,
                stdout: report.text,
                stderr: format!("{}error: cannot write {}: {e}\n", report.warnings, path.display()),
            };
        }
    }
    Outcome {
        code: EXIT_OK,
        stdout: report.text,
        stderr: report.warnings,
    }
}

fn dispatch(command: &Command) -> (CmdResult, Option<&Path>) {
    match command {
        Command::Validate { common } => (validate(common), common.csv.as_deref()),
        Command::Propagate { common } => (propagate(common), common.csv.as_deref()),
        Command::Evaluate { common } => (evaluate_cmd(common, false), common.csv.as_deref()),
        Command::Decide { common } => (evaluate_cmd(common, true), common.csv.as_deref()),
        Command::Balance(args) => (balance(args), args.csv.as_deref()),
        Command::Sweep { common, points, grid } => (sweep_cmd(common, *points, grid.as_deref()), common.csv.as_deref()),
        Command::Simulate {
            common,
            trials,
            seed,
            compare,
        } => (simulate_cmd(common, *trials, *seed, *compare), common.csv.as_deref()),
        Command::Continuous(args) => (continuous(args), args.common.csv.as_deref()),
    }
}

/// A validated scenario plus the parts of the file the discrete model does
/// not carry.
pub struct Loaded {
    pub source: String,
    pub scenario: Scenario64,
    pub continuous: Option<ContinuousSection>,
    pub warnings: Vec<Finding>,
}

/// Reads, parses and validates a scenario file. Every failure is an input
/// error.
pub fn load_scenario(path: &Path) -> Result<Loaded, Failure> {
    let source = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {source}: {e}")))?;
    let file = parse_scenario_file(&text)
        .map_err(|e| Failure::Input(format!("{source}:{}:{}: parse error: {}", e.line, e.column, e.message)))?;
    let continuous = file.continuous.clone();
    let scenario = file
        .into_scenario()
        .map_err(|e| Failure::Input(format!("{source}: malformed scenario: {e}")))?;
    let report = disclosure_core::validate_scenario(&scenario);
    if !report.ok() {
        let mut msg = format!("{source}: scenario is invalid");
        for f in report.errors() {
            let _ = write!(msg, "\n  {f}");
        }
        return Err(Failure::Input(msg));
    }
    let warnings = report.findings.into_iter().filter(|f| !report_is_error(f)).collect();
    Ok(Loaded {
        source,
        scenario,
        continuous,
        warnings,
    })
}

fn report_is_error(f: &Finding) -> bool {
    f.severity == disclosure_core::scenario::Severity::Error
}

fn load(common: &Common) -> Result<Loaded, Failure> {
    let mut loaded = load_scenario(&common.scenario)?;
    let ops = &mut loaded.scenario.operators;
    ops.serial = common.serial.unwrap_or(ops.serial);
    ops.parallel = common.parallel.unwrap_or(ops.parallel);
    Ok(loaded)
}

fn warnings_text(warnings: &[Finding]) -> String {
    warnings.iter().map(|w| format!("{w}\n")).collect()
}

fn consumers(s: &Scenario64, only: Option<&str>) -> Result<Vec<AgentId>, Failure> {
    match only {
        Some(id) => {
            let id = AgentId::new(id);
            if s.consumer(&id).is_none() {
                return Err(Failure::Input(format!("no consumer model for `{id}`")));
            }
            Ok(vec![id])
        }
        None => Ok(s.consumers.iter().map(|c| c.id.clone()).collect()),
    }
}

fn effective_delta(s: &Scenario64, id: &AgentId) -> Option<f64> {
    message_distribution(s, id, &s.operators.serial, &s.operators.parallel)
        .ok()
        .and_then(|x| x.effective_disclosure)
}

fn evaluate_one(s: &Scenario64, id: &AgentId) -> Result<DecisionReport64, Failure> {
    Ok(evaluate(s, id, &s.operators.serial, &s.operators.parallel)?)
}

fn message_id(s: &Scenario64, index: Option<usize>) -> Option<&str> {
    index.map(|i| s.messages.messages[i].id.as_str())
}

fn validate(common: &Common) -> CmdResult {
    let loaded = load(common)?;
    let s = &loaded.scenario;
    let mut out = String::new();
    let mut table = Table::new(&["severity", "location", "description"]);
    for id in consumers(s, common.consumer.as_deref())? {
        digest(&mut out, &loaded.source, s.producer.as_str(), id.as_str(), effective_delta(s, &id));
    }
    let _ = writeln!(
        out,
        "valid: {} agents, {} edges, {} messages, {} consumers (serial {}, parallel {})",
        s.agents.len(),
        s.edges.len(),
        s.messages.len(),
        s.consumers.len(),
        s.operators.serial,
        s.operators.parallel
    );
    for w in &loaded.warnings {
        let _ = writeln!(out, "  {w}");
        table.row([w.severity.to_string(), w.location.clone(), w.description.clone()]);
    }
    Ok(Report {
        text: out,
        warnings: String::new(),
        table: Some(table),
    })
}

fn propagate(common: &Common) -> CmdResult {
    let loaded = load(common)?;
    let s = &loaded.scenario;
    let mut out = String::new();
    let mut table = Table::new(&["consumer", "paths", "delta", "message"]);
    for id in consumers(s, common.consumer.as_deref())? {
        let x = message_distribution(s, &id, &s.operators.serial, &s.operators.parallel)?;
        digest(&mut out, &loaded.source, s.producer.as_str(), id.as_str(), x.effective_disclosure);
        let mut count = String::new();
        if x.effective_disclosure.is_some() {
            let paths = simple_paths(s, &id, DEFAULT_PATH_CAP)?;
            let _ = writeln!(out, "  {} simple path(s):", paths.len());
            for path in &paths {
                let hops: Vec<Hop<f64>> = path
                    .iter()
                    .map(|&e| Hop::new(s.edges[e].forward_prob, s.edges[e].disclosure))
                    .collect();
                let value = path_disclosure(&hops, &s.operators.serial)?;
                let mut names = vec![s.producer.as_str()];
                names.extend(path.iter().map(|&e| s.edges[e].to.as_str()));
                let _ = writeln!(out, "    {}  -> {}", names.join(" → "), num(value));
            }
            count = paths.len().to_string();
        }
        let delivered = message_id(s, x.delivered());
        let _ = writeln!(out, "  received distribution x = {}", vector(&x.x));
        if let Some(m) = delivered {
            let _ = writeln!(out, "  delivered message: {m}");
        }
        table.row([
            id.to_string(),
            count,
            opt_cell(x.effective_disclosure),
            delivered.unwrap_or("").to_string(),
        ]);
    }
    Ok(Report {
        text: out,
        warnings: warnings_text(&loaded.warnings),
        table: Some(table),
    })
}

fn evaluate_cmd(common: &Common, decide: bool) -> CmdResult {
    let loaded = load(common)?;
    let s = &loaded.scenario;
    let mut out = String::new();
    let mut header = vec!["consumer", "delta", "EB", "ER", "EC", "verdict"];
    if decide {
        header.extend(["lhs", "rhs"]);
    }
    let mut table = Table::new(&header);
    for id in consumers(s, common.consumer.as_deref())? {
        let r = evaluate_one(s, &id)?;
        digest(&mut out, &loaded.source, s.producer.as_str(), id.as_str(), r.effective_disclosure);
        decision_block(&mut out, &r, message_id(s, r.delivered));
        let mut row = vec![
            id.to_string(),
            opt_cell(r.effective_disclosure),
            cell(r.expected_benefit),
            cell(r.expected_risk),
            cell(r.expected_net),
            r.verdict.to_string(),
        ];
        if decide {
            match &r.threshold {
                Some(t) => {
                    let _ = writeln!(
                        out,
                        "  threshold: (r_B − B̄)/(r_B − r_A) = {} {} Pr(r_A) = {}",
                        num(t.lhs),
                        if t.lhs <= t.rhs { "≤" } else { ">" },
                        num(t.rhs)
                    );
                    if !t.benefit_covers_min_risk {
                        let _ = writeln!(out, "  note: the benefit does not cover the lower risk level");
                    }
                    row.extend([cell(t.lhs), cell(t.rhs)]);
                }
                None => row.extend([String::new(), String::new()]),
            }
            let _ = writeln!(out, "  {} with {id}", banner(r.verdict));
        }
        table.row(row);
    }
    Ok(Report {
        text: out,
        warnings: warnings_text(&loaded.warnings),
        table: Some(table),
    })
}

fn pair(v: &Option<Vec<f64>>, flag: &str) -> Result<(f64, f64), Failure> {
    match v.as_deref() {
        Some([a, b]) => Ok((*a, *b)),
        Some(_) => Err(Failure::Input(format!("--{flag} takes exactly two comma-separated values"))),
        None => Err(Failure::Input(format!("--{flag} is required without a scenario"))),
    }
}

fn binary_case(s: &Scenario64, id: &AgentId) -> Result<BinaryCase<f64>, Failure> {
    let r = evaluate_one(s, id)?;
    let model = s.consumer(id).expect("consumer checked");
    r.delivered
        .and_then(|d| BinaryCase::from_consumer(s, model, d))
        .ok_or_else(|| {
            Failure::Input(format!(
                "consumer `{id}` is not a two-inference, two-risk-level model with a fixed benefit and one delivered message"
            ))
        })
}

fn balance(args: &BalanceArgs) -> CmdResult {
    let mut out = String::new();
    let mut warnings = String::new();
    let (q1, w1, w2, levels, q2_now) = match &args.scenario {
        Some(path) => {
            let mut loaded = load_scenario(path)?;
            let ops = &mut loaded.scenario.operators;
            ops.serial = args.serial.unwrap_or(ops.serial);
            ops.parallel = args.parallel.unwrap_or(ops.parallel);
            let s = &loaded.scenario;
            let (Some(c1), Some(c2)) = (&args.consumer, &args.versus) else {
                return Err(Failure::Input("scenario mode needs --consumer and --versus".into()));
            };
            let ids = [consumers(s, Some(c1))?.remove(0), consumers(s, Some(c2))?.remove(0)];
            for id in &ids {
                digest(&mut out, &loaded.source, s.producer.as_str(), id.as_str(), effective_delta(s, id));
            }
            let (a, b) = (binary_case(s, &ids[0])?, binary_case(s, &ids[1])?);
            warnings = warnings_text(&loaded.warnings);
            (a.u_delivered, (a.w_y0, a.w_y1), (b.w_y0, b.w_y1), Some((a.r_a, a.r_b)), Some(b.u_delivered))
        }
        None => {
            let q1 = args
                .q1
                .ok_or_else(|| Failure::Input("--q1 is required without a scenario".into()))?;
            let levels = match &args.levels {
                Some(_) => Some(pair(&args.levels, "levels")?),
                None => None,
            };
            let _ = writeln!(out, "scenario: none (parameters from the command line)");
            let _ = writeln!(out, "producer: n/a  consumer: 1 vs 2  effective δ: n/a");
            (q1, pair(&args.w1, "w1")?, pair(&args.w2, "w2")?, levels, None)
        }
    };
    for (name, v) in [("q1", q1), ("w1(0)", w1.0), ("w1(1)", w1.1), ("w2(0)", w2.0), ("w2(1)", w2.1)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Failure::Input(format!("{name} = {v} is not a probability")));
        }
    }
    let result = balance_q2(&q1, &w1, &w2)?;
    let q2 = *result.value();
    let _ = writeln!(
        out,
        "  q1 = {}, w1 = ({}, {}), w2 = ({}, {})",
        num(q1),
        num(w1.0),
        num(w1.1),
        num(w2.0),
        num(w2.1)
    );
    match result {
        Balance::Feasible(_) => {
            let _ = writeln!(out, "  q2 = {} (feasible)", num(q2));
        }
        Balance::Infeasible(_) => {
            let _ = writeln!(out, "  q2 = {} (infeasible: outside [0, 1], no equal-risk q2 exists)", num(q2));
        }
    }
    if let Some(now) = q2_now {
        let _ = writeln!(out, "  consumer 2 currently has q = {}", num(now));
    }
    if let (Some((r_a, r_b)), true) = (levels, result.is_feasible()) {
        let risk = |q: f64, w: (f64, f64)| {
            let p = disclosure_core::impact::low_risk_probability(&q, &w);
            r_a * p + r_b * (1.0 - p)
        };
        let _ = writeln!(
            out,
            "  E[R] at r = ({}, {}): consumer 1 {}, consumer 2 {}",
            num(r_a),
            num(r_b),
            num(risk(q1, w1)),
            num(risk(q2, w2))
        );
    }
    let mut table = Table::new(&["q1", "w1_0", "w1_1", "w2_0", "w2_1", "q2", "feasible"]);
    table.row([
        cell(q1),
        cell(w1.0),
        cell(w1.1),
        cell(w2.0),
        cell(w2.1),
        cell(q2),
        result.is_feasible().to_string(),
    ]);
    Ok(Report {
        text: out,
        warnings,
        table: Some(table),
    })
}

fn sweep_cmd(common: &Common, points: usize, grid: Option<&[f64]>) -> CmdResult {
    let loaded = load(common)?;
    let s = &loaded.scenario;
    let grid: Vec<f64> = match grid {
        Some(g) => g.to_vec(),
        None if points >= 2 => uniform_grid(points),
        None => return Err(Failure::Input("--points must be at least 2".into())),
    };
    let mut out = String::new();
    let mut table = Table::new(&["consumer", "delta", "EB", "ER", "EC", "verdict"]);
    for id in consumers(s, common.consumer.as_deref())? {
        let rows: Vec<SweepRow<f64>> = sweep(s, &id, &grid)?;
        digest(&mut out, &loaded.source, s.producer.as_str(), id.as_str(), effective_delta(s, &id));
        let _ = writeln!(out, "  {:>8}  {:>8}  {:>14}  {:>14}  {:>14}  verdict", "δ", "message", "E[B]", "E[R]", "E[C]");
        for row in rows {
            let r = &row.report;
            let _ = writeln!(
                out,
                "  {:>8}  {:>8}  {:>14}  {:>14}  {:>14}  {}",
                num(row.delta),
                message_id(s, r.delivered).unwrap_or("-"),
                num(r.expected_benefit),
                num(r.expected_risk),
                num(r.expected_net),
                banner(r.verdict)
            );
            table.row([
                id.to_string(),
                cell(row.delta),
                cell(r.expected_benefit),
                cell(r.expected_risk),
                cell(r.expected_net),
                r.verdict.to_string(),
            ]);
        }
    }
    Ok(Report {
        text: out,
        warnings: warnings_text(&loaded.warnings),
        table: Some(table),
    })
}

fn simulate_cmd(common: &Common, trials: u64, seed: u64, compare: bool) -> CmdResult {
    let loaded = load(common)?;
    let s = &loaded.scenario;
    let mut out = String::new();
    let mut table = Table::new(&["consumer", "trials", "seed", "estEB", "seEB", "estER", "seER", "estEC", "seEC"]);
    let mut failed = Vec::new();
    for id in consumers(s, common.consumer.as_deref())? {
        let cfg = SimConfig {
            trials,
            seed,
            consumer: id.clone(),
        };
        digest(&mut out, &loaded.source, s.producer.as_str(), id.as_str(), effective_delta(s, &id));
        let _ = writeln!(out, "  trials = {trials}, seed = {seed}");
        let sim: SimResult = if compare {
            let (_, sim, oracle) = oracle_compare(s, &cfg)?;
            for c in &oracle.checks {
                let _ = writeln!(
                    out,
                    "  {}: analytic {}  estimate {} ± {}  z = {}  {}",
                    c.quantity,
                    num(c.analytic),
                    num(c.estimate),
                    num(c.stderr),
                    num(c.z_score),
                    if c.pass { "ok" } else { "MISMATCH" }
                );
            }
            let _ = writeln!(out, "  oracle: {}", if oracle.pass() { "PASS" } else { "FAIL" });
            if !oracle.pass() {
                failed.push(id.to_string());
            }
            sim
        } else {
            let sim = simulate(s, &cfg)?;
            let _ = writeln!(out, "  E[B] ≈ {} ± {}", num(sim.est_eb), num(sim.stderr_eb));
            let _ = writeln!(out, "  E[R] ≈ {} ± {}", num(sim.est_er), num(sim.stderr_er));
            let _ = writeln!(out, "  E[C] ≈ {} ± {}", num(sim.est_ec), num(sim.stderr_ec));
            sim
        };
        let _ = writeln!(out, "  empirical x = {}", vector(&sim.empirical_x));
        table.row([
            id.to_string(),
            trials.to_string(),
            seed.to_string(),
            cell(sim.est_eb),
            cell(sim.stderr_eb),
            cell(sim.est_er),
            cell(sim.stderr_er),
            cell(sim.est_ec),
            cell(sim.stderr_ec),
        ]);
    }
    if !failed.is_empty() {
        return Err(Failure::Internal(format!(
            "{out}simulation disagrees with the analytic model for {}",
            failed.join(", ")
        )));
    }
    Ok(Report {
        text: out,
        warnings: warnings_text(&loaded.warnings),
        table: Some(table),
    })
}

fn apply_family_flags(section: &mut ContinuousSection, flags: &[String]) -> Result<(), Failure> {
    for flag in flags {
        let (target, spec) = flag
            .split_once('=')
            .ok_or_else(|| Failure::Input(format!("--family `{flag}`: expected CONSUMER.inference=SPEC")))?;
        let (id, which) = target
            .rsplit_once('.')
            .ok_or_else(|| Failure::Input(format!("--family `{flag}`: expected CONSUMER.inference=SPEC")))?;
        let spec: FamilySpec = spec.parse()?;
        let entry = match section.consumers.iter_mut().position(|c| c.id == id) {
            Some(i) => &mut section.consumers[i],
            None => {
                section.consumers.push(ConsumerFamilies {
                    id: id.to_string(),
                    inference: FamilySpec::Uniform,
                    impact: FamilySpec::Uniform,
                    x: None,
                });
                section.consumers.last_mut().expect("just pushed")
            }
        };
        match which {
            "inference" => entry.inference = spec,
            "impact" => entry.impact = spec,
            other => {
                return Err(Failure::Input(format!(
                    "--family `{flag}`: `{other}` is neither `inference` nor `impact`"
                )))
            }
        }
    }
    Ok(())
}

fn unit_degree(v: f64, what: &str) -> Result<f64, Failure> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(Failure::Input(format!("{what} = {v} is outside [0, 1]")))
    }
}

fn continuous(args: &ContinuousArgs) -> CmdResult {
    let loaded = load(&args.common)?;
    let s = &loaded.scenario;
    let mut section = loaded.continuous.clone().unwrap_or(ContinuousSection {
        grid_n: DEFAULT_GRID_N,
        consumers: Vec::new(),
    });
    apply_family_flags(&mut section, &args.families)?;
    let n = args.grid_n.unwrap_or(section.grid_n);
    if n < 1 {
        return Err(Failure::Input("--grid-n must be at least 1".into()));
    }
    let find = |id: &str| {
        section
            .consumers
            .iter()
            .find(|c| c.id == id)
            .ok_or_else(|| Failure::Input(format!("no density families for `{id}` (use --family {id}.inference=SPEC)")))
    };
    let first = match (&args.common.consumer, section.consumers.as_slice()) {
        (Some(id), _) => find(id)?,
        (None, [only]) => only,
        (None, []) => return Err(Failure::Input("no density families given (use --family)".into())),
        (None, _) => return Err(Failure::Input("several consumers have density families; pick one with --consumer".into())),
    };
    let id = AgentId::new(first.id.clone());
    let delta = effective_delta(s, &id);
    let x = match (args.match_x1, args.x, first.x, delta) {
        (Some(v), ..) | (None, Some(v), ..) | (None, None, Some(v), _) | (None, None, None, Some(v)) => v,
        _ => {
            return Err(Failure::Input(format!(
                "no disclosure degree for `{id}`: pass --x or connect it in the graph"
            )))
        }
    };
    let x = unit_degree(x, "x")?;
    let d1: ConsumerDensities<f64> = first.build(n)?;
    let r = risk_density(&d1.impact, &d1.inference, x)?;

    let mut out = String::new();
    digest(&mut out, &loaded.source, s.producer.as_str(), id.as_str(), delta);
    let _ = writeln!(out, "  grid intervals = {n}, x = {}", num(x));
    let _ = writeln!(out, "  mean impact E[Z] = {}", num(r.density.mean()));
    let _ = writeln!(
        out,
        "  mass before renormalisation = {}{}",
        num(1.0 + r.drift),
        if r.renormalized { " (renormalised)" } else { "" }
    );
    if let Some(x1) = args.match_x1 {
        let other = args.versus.as_deref().expect("clap enforces --versus");
        let second = find(other)?;
        let d2: ConsumerDensities<f64> = second.build(n)?;
        let _ = writeln!(
            out,
            "producer: {}  consumer: {other}  effective δ: {}",
            s.producer,
            report::opt_num(effective_delta(s, &AgentId::new(other)))
        );
        match solve_matching_disclosure(&d1, &d2, x1)? {
            Some(x2) => {
                let r2 = risk_density(&d2.impact, &d2.inference, x2)?;
                let _ = writeln!(out, "  matching x2 = {} for x1 = {}", num(x2), num(x1));
                let _ = writeln!(
                    out,
                    "  sup |F1 − F2| at the match = {} (diagnostic only)",
                    num(cdf_sup_distance(&r.density, &r2.density)?)
                );
            }
            None => {
                let _ = writeln!(out, "  no x2 in [0, 1] gives {other} the same mean impact as {id} at x1 = {}", num(x1));
            }
        }
    }
    let mut table = Table::new(&["z", "f_R"]);
    let h = 1.0 / n as f64;
    for (k, v) in r.density.values().iter().enumerate() {
        table.row([cell(k as f64 * h), cell(*v)]);
    }
    Ok(Report {
        text: out,
        warnings: warnings_text(&loaded.warnings),
        table: Some(table),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bundled() -> String {
        concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/james_alec.json").to_string()
    }

    #[test]
    fn decide_reports_verdicts() {
        let out = run(["disclosure", "decide", &bundled(), "--consumer", "James"]);
        assert_eq!(out.code, 0, "{}", out.stderr);
        assert!(out.stdout.contains("SHARE"));
        assert!(out.stdout.contains("E[C] = 6000"));
        let out = run(["disclosure", "decide", &bundled(), "--consumer", "Alec"]);
        assert_eq!(out.code, 0);
        assert!(out.stdout.contains("WITHHOLD"));
        assert!(out.stdout.contains("E[C] = -28200"));
    }

    #[test]
    fn usage_errors_exit_2_and_help_exits_0() {
        assert_eq!(run(["disclosure", "frobnicate"]).code, EXIT_INPUT);
        assert_eq!(run(["disclosure", "simulate", &bundled(), "--trials", "0"]).code, EXIT_INPUT);
        let help = run(["disclosure", "--help"]);
        assert_eq!(help.code, 0);
        assert!(help.stdout.contains("continuous"));
    }

    #[test]
    fn family_flags() {
        let mut section = ContinuousSection {
            grid_n: 8,
            consumers: vec![],
        };
        apply_family_flags(&mut section, &["A.inference=tilt(0,1)".into(), "A.impact=beta(1,0,1,0)".into()]).unwrap();
        assert_eq!(section.consumers.len(), 1);
        assert!(matches!(section.consumers[0].impact, FamilySpec::Beta { .. }));
        assert!(apply_family_flags(&mut section, &["A.risk=uniform".into()]).is_err());
        assert!(apply_family_flags(&mut section, &["A=uniform".into()]).is_err());
    }
}
