//! `vilab` command-line harness.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use vilab::conditions::{
    check_sequence_condition_orbits, classify_conditions, default_candidates, default_starts, Condition,
    ConditionReport, DEFAULT_MU, DEFAULT_ORBITS, DEFAULT_SEQUENCE_LENGTH,
};
use vilab::harness::{
    check_all, check_suite, fit_rates, log_checkpoints, rate_csv, run_experiment, CheckRequest, ExperimentConfig,
    ExperimentSummary, ProblemRef, RateFit, RateMetric, RateOutcome, StartSpec, SuiteReport,
};
use vilab::merit::merit_report;
use vilab::problems::list_problems;
use vilab::{Error, SolverConfig, SolverKind, VIProblem, Vector};

const EXIT_USAGE: u8 = 1;
const EXIT_MISMATCH: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "vilab", version, about = "Solve, diagnose and benchmark variational inequalities")]
struct Cli {
    /// Default seed for sampling and start points.
    #[arg(long, global = true, env = "VILAB_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Directory for output files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a solver and report the summary.
    Solve(SolveArgs),
    /// Evaluate the merit functions at a point.
    Merit(MeritArgs),
    /// Check structural or sequence conditions.
    Check(CheckArgs),
    /// Fit empirical convergence rates.
    Rate(RateArgs),
    /// Replay the expected verdicts of registry problems.
    Suite(SuiteArgs),
    /// List the registry.
    List,
}

#[derive(Args, Debug)]
struct ProblemArg {
    /// Registry name, or a path to a JSON problem document.
    #[arg(long)]
    problem: String,
}

#[derive(Args, Debug)]
struct SolverArgs {
    #[arg(long, value_enum, default_value_t = SolverArg::Eg)]
    solver: SolverArg,
    #[arg(long, default_value_t = 1)]
    order: u32,
    /// Step size; defaults to 1/(sqrt(2) L).
    #[arg(long)]
    step: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    /// Comma-separated start point; a seeded sample from the set when absent.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x0: Option<Vec<f64>>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SolverArg {
    Gp,
    Eg,
    Are,
}

impl From<SolverArg> for SolverKind {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Gp => SolverKind::Gp,
            SolverArg::Eg => SolverKind::Eg,
            SolverArg::Are => SolverKind::Are,
        }
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArg,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Conditions to check alongside the run.
    #[arg(long = "check", value_delimiter = ',')]
    checks: Vec<Condition>,
    /// Record wall time in the summary (breaks byte-identical output).
    #[arg(long)]
    wall_time: bool,
}

#[derive(Args, Debug)]
struct MeritArgs {
    #[command(flatten)]
    problem: ProblemArg,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    x0: Vec<f64>,
    /// Step of the projection residual.
    #[arg(long, default_value_t = 0.5)]
    t: f64,
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[command(flatten)]
    problem: ProblemArg,
    /// Conditions to check; all structural ones when absent.
    #[arg(long = "condition", value_delimiter = ',')]
    conditions: Vec<Condition>,
    #[arg(long, default_value_t = 0.5)]
    t: f64,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long, default_value_t = DEFAULT_MU)]
    mu: f64,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = DEFAULT_SEQUENCE_LENGTH)]
    length: usize,
    /// Start of a single orbit; seeded starts when absent.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x0: Option<Vec<f64>>,
    #[arg(long, default_value_t = DEFAULT_ORBITS)]
    orbits: usize,
}

#[derive(Args, Debug)]
struct RateArgs {
    #[command(flatten)]
    problem: ProblemArg,
    #[command(flatten)]
    solver: SolverArgs,
    /// Metrics to fit; both when absent.
    #[arg(long = "metric", value_delimiter = ',')]
    metrics: Vec<RateMetric>,
    #[arg(long, default_value_t = 100)]
    min_n: usize,
    #[arg(long, default_value_t = 10_000)]
    max_n: usize,
    #[arg(long, default_value_t = 12)]
    checkpoints: usize,
}

#[derive(Args, Debug)]
struct SuiteArgs {
    /// Registry problem; the whole registry when absent.
    #[arg(long)]
    problem: Option<String>,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Diverged { .. } | Error::InnerSolver { .. } | Error::NonFinite { .. } => EXIT_SOLVER,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Error::from(e).into()
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn problem_ref(arg: &str) -> CliResult<ProblemRef> {
    let path = Path::new(arg);
    if path.extension().is_some_and(|e| e == "json") && path.is_file() {
        let spec = serde_json::from_str(&fs::read_to_string(path)?)?;
        Ok(ProblemRef::Inline(spec))
    } else {
        Ok(ProblemRef::Name(arg.to_string()))
    }
}

fn load_problem(arg: &str) -> CliResult<VIProblem> {
    Ok(problem_ref(arg)?.resolve()?)
}

fn start(x0: &Option<Vec<f64>>, seed: u64) -> StartSpec {
    match x0 {
        Some(p) => StartSpec::Point(p.clone()),
        None => StartSpec::Seed(seed),
    }
}

fn solver_config(problem: &VIProblem, args: &SolverArgs, seed: u64) -> CliResult<SolverConfig> {
    let step = match args.step {
        Some(t) => t,
        None => 1.0 / (std::f64::consts::SQRT_2 * problem.lipschitz_or_estimate(seed)?),
    };
    let mut config = SolverConfig::new(step, args.iters).with_order(args.order);
    config.seed = seed;
    Ok(config)
}

fn emit(out: &Option<PathBuf>, file: &str, contents: &str) -> CliResult<()> {
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(file), contents)?;
        info!("wrote {}", dir.join(file).display());
    }
    Ok(())
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}

fn summary_table(s: &ExperimentSummary) -> String {
    let mut rows = vec![
        ("problem", s.problem.clone()),
        ("solver", format!("{} (order {})", s.solver, s.order)),
        ("step", format!("{}", s.step)),
        ("tau", format!("{}", s.tau)),
        ("iterations", s.iterations.to_string()),
        ("k_N", s.k_n.to_string()),
        ("min residual", format!("{:.6e}", s.min_residual_sq)),
        ("gap at k_N", format!("{:.6e}", s.gap_at_kn)),
        ("final gap", format!("{:.6e}", s.final_gap)),
        ("final x", fmt_vec(&s.final_x)),
    ];
    if let Some(ms) = s.wall_time_ms {
        rows.push(("wall time", format!("{ms:.1} ms")));
    }
    rows.iter().map(|(k, v)| format!("{k:<14}{v}\n")).collect()
}

fn summary_csv(s: &ExperimentSummary) -> String {
    format!(
        "problem,solver,order,step,iterations,k_N,min_residual_sq,gap_at_kn,final_gap\n{},{},{},{},{},{},{:e},{:e},{:e}\n",
        s.problem, s.solver, s.order, s.step, s.iterations, s.k_n, s.min_residual_sq, s.gap_at_kn, s.final_gap
    )
}

fn reports_table(reports: &[ConditionReport]) -> String {
    reports.iter().map(|r| r.table_row() + "\n").collect()
}

fn reports_csv(reports: &[ConditionReport]) -> String {
    let mut out = String::from("condition,verdict,witness_value,witness_k\n");
    for r in reports {
        let (v, k) = match &r.witness {
            Some(w) => (format!("{:e}", w.value), w.k.map(|k| k.to_string()).unwrap_or_default()),
            None => (String::new(), String::new()),
        };
        out.push_str(&format!("{},{},{v},{k}\n", r.condition, r.verdict));
    }
    out
}

fn solve_cmd(cli: &Cli, args: &SolveArgs) -> CliResult<String> {
    let problem = load_problem(&args.problem.problem)?;
    let mut solver_config = solver_config(&problem, &args.solver, cli.seed)?;
    solver_config.delta = args.delta;
    let config = ExperimentConfig {
        problem: problem_ref(&args.problem.problem)?,
        solver: args.solver.solver.into(),
        solver_config,
        x0: start(&args.solver.x0, cli.seed),
        out_dir: cli.out.clone(),
        checks: args
            .checks
            .iter()
            .map(|&c| CheckRequest {
                seed: cli.seed,
                ..CheckRequest::new(c)
            })
            .collect(),
        record_wall_time: args.wall_time,
    };
    let result = run_experiment(&config)?;
    Ok(match cli.format {
        Format::Json => {
            let mut v = serde_json::to_value(&result.summary)?;
            if !result.checks.is_empty() {
                v["checks"] = serde_json::to_value(&result.checks)?;
            }
            serde_json::to_string_pretty(&v)? + "\n"
        }
        Format::Csv => summary_csv(&result.summary),
        Format::Table => summary_table(&result.summary) + &reports_table(&result.checks),
    })
}

fn merit_cmd(cli: &Cli, args: &MeritArgs) -> CliResult<String> {
    let problem = load_problem(&args.problem.problem)?;
    let x = Vector::from_column_slice(&args.x0);
    let report = merit_report(&problem, &x, args.t, args.epsilon, args.samples, cli.seed)?;
    let json = serde_json::to_string_pretty(&report)? + "\n";
    emit(&cli.out, "merit.json", &json)?;
    Ok(match cli.format {
        Format::Json => json,
        Format::Csv => format!(
            "gap,dual_gap_estimate,proj_residual,sample_count\n{:e},{:e},{:e},{}\n",
            report.gap, report.dual_gap_estimate, report.proj_residual, report.sample_count
        ),
        Format::Table => report.to_table(),
    })
}

fn check_cmd(cli: &Cli, args: &CheckArgs) -> CliResult<String> {
    let problem = load_problem(&args.problem.problem)?;
    let conditions = if args.conditions.is_empty() {
        Condition::STRUCTURAL.to_vec()
    } else {
        args.conditions.clone()
    };
    let (sequence, structural): (Vec<Condition>, Vec<Condition>) =
        conditions.iter().partition(|c| c.is_sequence());
    let mut reports = Vec::new();
    if !structural.is_empty() {
        reports.extend(classify_conditions(&problem, &structural, args.samples, cli.seed, args.mu)?);
    }
    if !sequence.is_empty() {
        let starts = match &args.x0 {
            Some(p) => vec![Vector::from_column_slice(p)],
            None => default_starts(&problem, args.orbits, cli.seed),
        };
        let candidates = default_candidates(&problem, 2001)?;
        for c in sequence {
            reports.push(check_sequence_condition_orbits(
                &problem, c, &starts, args.t, args.delta, args.length, &candidates,
            )?);
        }
    }
    // keep the requested order
    reports.sort_by_key(|r| conditions.iter().position(|c| *c == r.condition));
    let json = serde_json::to_string_pretty(&reports)? + "\n";
    emit(&cli.out, "conditions.json", &json)?;
    Ok(match cli.format {
        Format::Json => json,
        Format::Csv => reports_csv(&reports),
        Format::Table => reports_table(&reports),
    })
}

fn rate_table(fits: &[RateFit]) -> String {
    fits.iter()
        .map(|f| {
            let result = match f.outcome {
                RateOutcome::Fitted {
                    slope,
                    intercept,
                    r_squared,
                } => format!("slope {slope:.4}  intercept {intercept:.4}  r^2 {r_squared:.4}"),
                RateOutcome::ExactConvergence => "EXACT_CONVERGENCE".to_string(),
            };
            format!("{:<16}N in [{}, {}]  {result}\n", f.metric.name(), f.window.0, f.window.1)
        })
        .collect()
}

fn rate_cmd(cli: &Cli, args: &RateArgs) -> CliResult<String> {
    let problem = load_problem(&args.problem.problem)?;
    let config = solver_config(&problem, &args.solver, cli.seed)?;
    let x0 = start(&args.solver.x0, cli.seed).resolve(&problem);
    let metrics = if args.metrics.is_empty() {
        RateMetric::ALL.to_vec()
    } else {
        args.metrics.clone()
    };
    let checkpoints = log_checkpoints(args.min_n, args.max_n, args.checkpoints);
    let fits = fit_rates(&problem, args.solver.solver.into(), &config, &x0, &metrics, &checkpoints)?;
    let csv = rate_csv(&fits);
    let json = serde_json::to_string_pretty(&fits)? + "\n";
    emit(&cli.out, "rates.csv", &csv)?;
    emit(&cli.out, "rates.json", &json)?;
    Ok(match cli.format {
        Format::Json => json,
        Format::Csv => csv,
        Format::Table => rate_table(&fits),
    })
}

fn suite_cmd(cli: &Cli, args: &SuiteArgs) -> CliResult<(String, bool)> {
    let reports: Vec<SuiteReport> = match &args.problem {
        Some(name) => vec![check_suite(name)?],
        None => check_all()?,
    };
    let ok = reports.iter().all(SuiteReport::all_match);
    let json = serde_json::to_string_pretty(&reports)? + "\n";
    emit(&cli.out, "suite.json", &json)?;
    let text = match cli.format {
        Format::Json => json,
        Format::Csv => {
            let mut out = String::from("problem,condition,expected,actual,match\n");
            for r in &reports {
                for e in &r.entries {
                    out.push_str(&format!(
                        "{},{},{},{},{}\n",
                        r.problem,
                        e.condition,
                        e.expected,
                        e.actual,
                        e.matches()
                    ));
                }
            }
            out
        }
        Format::Table => reports.iter().map(SuiteReport::to_table).collect(),
    };
    Ok((text, ok))
}

fn list_cmd(cli: &Cli) -> CliResult<String> {
    let list = list_problems();
    Ok(match cli.format {
        Format::Json => serde_json::to_string_pretty(&list)? + "\n",
        Format::Csv => {
            let mut out = String::from("name,dimension,tags\n");
            for p in &list {
                out.push_str(&format!("{},{},{}\n", p.name, p.dimension, p.tags.join(";")));
            }
            out
        }
        Format::Table => list
            .iter()
            .map(|p| format!("{:<26}{:>3}  {}\n", p.name, p.dimension, p.tags.join(", ")))
            .collect(),
    })
}

fn run(cli: &Cli) -> CliResult<(String, u8)> {
    let text = match &cli.command {
        Command::Solve(a) => solve_cmd(cli, a)?,
        Command::Merit(a) => merit_cmd(cli, a)?,
        Command::Check(a) => check_cmd(cli, a)?,
        Command::Rate(a) => rate_cmd(cli, a)?,
        Command::Suite(a) => {
            let (text, ok) = suite_cmd(cli, a)?;
            return Ok((text, if ok { 0 } else { EXIT_MISMATCH }));
        }
        Command::List => list_cmd(cli)?,
    };
    Ok((text, 0))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok((text, code)) => {
            print!("{text}");
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
