//! Experiment driver: runs a solver and writes its outputs, fits empirical
//! convergence rates, and replays the registry's expected verdicts.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conditions::{
    check_sequence_condition_orbits, classify_conditions, default_candidates, Condition, ConditionReport, Verdict,
    DEFAULT_MU, DEFAULT_SEQUENCE_LENGTH,
};
use crate::error::{Error, Result};
use crate::merit::gap;
use crate::problem::{ProblemSpec, VIProblem};
use crate::problems::{all_problems, get_problem, ProblemRecord};
use crate::solvers::solve;
use crate::trajectory::{SolverConfig, SolverKind, Trajectory};
use crate::Vector;

/// Fewest checkpoints a rate fit accepts.
pub const MIN_CHECKPOINTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RateMetric {
    /// `min_{k < N} ||x^{k+1/2} - x^k||^2`.
    MinResidualSq,
    /// `G` at the test point of `k_N`, the argmin of the residual over `k < N`.
    GapAtKn,
}

impl RateMetric {
    pub const ALL: [RateMetric; 2] = [RateMetric::MinResidualSq, RateMetric::GapAtKn];

    pub fn name(self) -> &'static str {
        match self {
            RateMetric::MinResidualSq => "MIN_RESIDUAL_SQ",
            RateMetric::GapAtKn => "GAP_AT_KN",
        }
    }
}

impl fmt::Display for RateMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for RateMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "MIN_RESIDUAL_SQ" | "RESIDUAL" => Ok(RateMetric::MinResidualSq),
            "GAP_AT_KN" | "GAP" => Ok(RateMetric::GapAtKn),
            other => Err(Error::InvalidConfig(format!("unknown metric `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub n: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RateOutcome {
    /// Least-squares line `log value = intercept + slope log N`.
    Fitted { slope: f64, intercept: f64, r_squared: f64 },
    /// The metric is zero at every checkpoint.
    ExactConvergence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub metric: RateMetric,
    pub window: (usize, usize),
    pub outcome: RateOutcome,
    pub points: Vec<RatePoint>,
    /// Checkpoints left out of the fit because the metric was exactly zero.
    pub zero_points: usize,
}

impl RateFit {
    pub fn slope(&self) -> Option<f64> {
        match self.outcome {
            RateOutcome::Fitted { slope, .. } => Some(slope),
            RateOutcome::ExactConvergence => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.outcome == RateOutcome::ExactConvergence
    }

    /// Exact convergence, or a slope at or below `threshold`.
    pub fn meets(&self, threshold: f64) -> bool {
        self.slope().is_none_or(|s| s <= threshold)
    }
}

/// `count` log-spaced integers in `[lo, hi]`, deduplicated.
pub fn log_checkpoints(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    if count <= 1 || hi <= lo {
        return vec![hi.max(lo)];
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut out: Vec<usize> = (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp().round() as usize)
        .collect();
    out.dedup();
    out
}

/// 12 log-spaced checkpoints in `[10^2, 10^4]`.
pub fn default_checkpoints() -> Vec<usize> {
    log_checkpoints(100, 10_000, 12)
}

fn validate_checkpoints(checkpoints: &[usize]) -> Result<()> {
    if checkpoints.len() < MIN_CHECKPOINTS {
        return Err(Error::InvalidConfig(format!(
            "a rate fit needs at least {MIN_CHECKPOINTS} checkpoints, got {}",
            checkpoints.len()
        )));
    }
    if checkpoints[0] == 0 || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig("checkpoints must be positive and strictly increasing".into()));
    }
    Ok(())
}

/// Least-squares line through `(x, y)`: `(slope, intercept, r^2)`.
fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    (slope, intercept, r2)
}

/// Fits `log value` against `log N` over the checkpoints.
///
/// Zero values have no logarithm: an all-zero metric reports exact
/// convergence, otherwise only the positive checkpoints enter the fit.
pub fn fit_points(metric: RateMetric, points: Vec<RatePoint>) -> Result<RateFit> {
    let window = (
        points.first().map_or(0, |p| p.n),
        points.last().map_or(0, |p| p.n),
    );
    if let Some(p) = points.iter().find(|p| !p.value.is_finite() || p.value < 0.0) {
        return Err(Error::NonFinite {
            what: format!("{metric} at N={}: {}", p.n, p.value),
        });
    }
    let positive: Vec<&RatePoint> = points.iter().filter(|p| p.value > 0.0).collect();
    let zero_points = points.len() - positive.len();
    let outcome = if positive.len() < 2 {
        RateOutcome::ExactConvergence
    } else {
        let xs: Vec<f64> = positive.iter().map(|p| (p.n as f64).ln()).collect();
        let ys: Vec<f64> = positive.iter().map(|p| p.value.ln()).collect();
        let (slope, intercept, r_squared) = least_squares(&xs, &ys);
        RateOutcome::Fitted {
            slope,
            intercept,
            r_squared,
        }
    };
    Ok(RateFit {
        metric,
        window,
        outcome,
        points,
        zero_points,
    })
}

/// Metric values of a finished run at each checkpoint prefix.
pub fn metric_points(
    problem: &VIProblem,
    traj: &Trajectory,
    metric: RateMetric,
    checkpoints: &[usize],
) -> Result<Vec<RatePoint>> {
    let mut cached: Option<(usize, f64)> = None;
    checkpoints
        .iter()
        .map(|&n| {
            let (k_n, min_res) = traj.argmin_residual(n).ok_or_else(|| {
                Error::InvalidConfig(format!("checkpoint {n} exceeds the run length {}", traj.len()))
            })?;
            let value = match metric {
                RateMetric::MinResidualSq => min_res,
                RateMetric::GapAtKn => match cached {
                    Some((k, g)) if k == k_n => g,
                    _ => {
                        let g = gap(problem, &traj.test_point(k_n))?;
                        cached = Some((k_n, g));
                        g
                    }
                },
            };
            Ok(RatePoint { n, value })
        })
        .collect()
}

/// Runs once to the last checkpoint and fits every requested metric.
pub fn fit_rates(
    problem: &VIProblem,
    solver: SolverKind,
    config: &SolverConfig,
    x0: &Vector,
    metrics: &[RateMetric],
    checkpoints: &[usize],
) -> Result<Vec<RateFit>> {
    validate_checkpoints(checkpoints)?;
    let mut config = config.clone();
    config.max_iters = *checkpoints.last().expect("validated non-empty");
    let traj = solve(solver, problem, &config, x0)?;
    metrics
        .iter()
        .map(|&m| fit_points(m, metric_points(problem, &traj, m, checkpoints)?))
        .collect()
}

pub fn fit_rate(
    problem: &VIProblem,
    solver: SolverKind,
    config: &SolverConfig,
    x0: &Vector,
    metric: RateMetric,
    checkpoints: &[usize],
) -> Result<RateFit> {
    Ok(fit_rates(problem, solver, config, x0, &[metric], checkpoints)?.remove(0))
}

/// CSV with header `metric,N,value`.
pub fn rate_csv(fits: &[RateFit]) -> String {
    let mut out = String::from("metric,N,value\n");
    for fit in fits {
        for p in &fit.points {
            out.push_str(&format!("{},{},{:e}\n", fit.metric, p.n, p.value));
        }
    }
    out
}

/// A registry name or an inline problem document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProblemRef {
    Name(String),
    Inline(ProblemSpec),
}

impl ProblemRef {
    pub fn resolve(&self) -> Result<VIProblem> {
        match self {
            ProblemRef::Name(name) => Ok(get_problem(name)?.problem),
            ProblemRef::Inline(spec) => VIProblem::from_spec(spec),
        }
    }
}

/// An explicit start point, or a seed for a uniform draw from the set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartSpec {
    Point(Vec<f64>),
    Seed(u64),
}

impl StartSpec {
    pub fn resolve(&self, problem: &VIProblem) -> Vector {
        match self {
            StartSpec::Point(p) => Vector::from_column_slice(p),
            StartSpec::Seed(seed) => problem.set().sample(&mut ChaCha8Rng::seed_from_u64(*seed)),
        }
    }
}

/// A condition to check alongside a run. Sequence conditions start their
/// orbit at the run's `x0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRequest {
    pub condition: Condition,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_samples() -> usize {
    10_000
}

impl CheckRequest {
    pub fn new(condition: Condition) -> Self {
        CheckRequest {
            condition,
            t: None,
            delta: None,
            samples: default_samples(),
            seed: 0,
        }
    }

    pub fn run(&self, problem: &VIProblem, x0: &Vector, config: &SolverConfig) -> Result<ConditionReport> {
        if self.condition.is_sequence() {
            let candidates = default_candidates(problem, self.samples)?;
            check_sequence_condition_orbits(
                problem,
                self.condition,
                std::slice::from_ref(x0),
                self.t.unwrap_or(config.step),
                self.delta.unwrap_or(config.delta),
                DEFAULT_SEQUENCE_LENGTH,
                &candidates,
            )
        } else {
            let mut r = classify_conditions(problem, &[self.condition], self.samples, self.seed, DEFAULT_MU)?;
            Ok(r.remove(0))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: ProblemRef,
    pub solver: SolverKind,
    #[serde(default)]
    pub solver_config: SolverConfig,
    pub x0: StartSpec,
    /// Output directory; nothing is written when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckRequest>,
    /// Wall time varies between runs, so it is left out by default to keep
    /// outputs byte-identical.
    #[serde(default)]
    pub record_wall_time: bool,
}

impl ExperimentConfig {
    pub fn new(problem: impl Into<String>, solver: SolverKind, solver_config: SolverConfig, x0: StartSpec) -> Self {
        ExperimentConfig {
            problem: ProblemRef::Name(problem.into()),
            solver,
            solver_config,
            x0,
            out_dir: None,
            checks: Vec::new(),
            record_wall_time: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub problem: String,
    pub solver: SolverKind,
    pub order: u32,
    pub step: f64,
    pub tau: f64,
    pub iterations: usize,
    #[serde(rename = "k_N")]
    pub k_n: usize,
    pub min_residual_sq: f64,
    /// `G` at the test point of `k_N`.
    pub gap_at_kn: f64,
    pub kn_test_point: Vec<f64>,
    /// `G` at the test point of the last iteration.
    pub final_gap: f64,
    pub final_test_point: Vec<f64>,
    pub final_x: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub summary: ExperimentSummary,
    pub trajectory: Trajectory,
    pub checks: Vec<ConditionReport>,
}

pub const TRAJECTORY_FILE: &str = "trajectory.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";
pub const CONDITIONS_FILE: &str = "conditions.json";

pub fn summarize(problem: &VIProblem, traj: &Trajectory) -> Result<ExperimentSummary> {
    let last = traj
        .len()
        .checked_sub(1)
        .ok_or_else(|| Error::InvalidConfig("empty trajectory".into()))?;
    let kn_point = traj.test_point(traj.k_n);
    let final_point = traj.test_point(last);
    let final_gap = match traj.iterates[last].gap {
        Some(g) => g,
        None => gap(problem, &final_point)?,
    };
    Ok(ExperimentSummary {
        problem: traj.problem_name.clone(),
        solver: traj.solver,
        order: traj.order,
        step: traj.step,
        tau: traj.tau,
        iterations: traj.len(),
        k_n: traj.k_n,
        min_residual_sq: traj.min_residual_sq(),
        gap_at_kn: gap(problem, &kn_point)?,
        kn_test_point: kn_point.iter().copied().collect(),
        final_gap,
        final_test_point: final_point.iter().copied().collect(),
        final_x: traj.final_x.clone(),
        wall_time_ms: None,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let problem = config.problem.resolve()?;
    let x0 = config.x0.resolve(&problem);
    let start = Instant::now();
    let trajectory = solve(config.solver, &problem, &config.solver_config, &x0)?;
    let elapsed = start.elapsed();
    let mut summary = summarize(&problem, &trajectory)?;
    if config.record_wall_time {
        summary.wall_time_ms = Some(elapsed.as_secs_f64() * 1e3);
    }
    let checks = config
        .checks
        .iter()
        .map(|c| c.run(&problem, &x0, &config.solver_config))
        .collect::<Result<Vec<_>>>()?;
    if let Some(dir) = &config.out_dir {
        fs::create_dir_all(dir)?;
        let mut out = BufWriter::new(fs::File::create(dir.join(TRAJECTORY_FILE))?);
        trajectory.write_jsonl(&mut out)?;
        out.flush()?;
        write_json(&dir.join(SUMMARY_FILE), &summary)?;
        if !checks.is_empty() {
            write_json(&dir.join(CONDITIONS_FILE), &checks)?;
        }
    }
    Ok(ExperimentResult {
        summary,
        trajectory,
        checks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub condition: Condition,
    pub expected: Verdict,
    pub actual: Verdict,
    pub report: ConditionReport,
}

impl SuiteEntry {
    pub fn matches(&self) -> bool {
        self.expected == self.actual
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub problem: String,
    pub entries: Vec<SuiteEntry>,
}

impl SuiteReport {
    pub fn all_match(&self) -> bool {
        self.entries.iter().all(SuiteEntry::matches)
    }

    pub fn mismatches(&self) -> Vec<&SuiteEntry> {
        self.entries.iter().filter(|e| !e.matches()).collect()
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("{}\n", self.problem);
        for e in &self.entries {
            let mark = if e.matches() { "ok" } else { "MISMATCH" };
            out.push_str(&format!(
                "  {:<9}expected {:<22} {}\n",
                mark,
                e.expected.to_string(),
                e.report.table_row()
            ));
        }
        out
    }
}

/// Replays every expected verdict of a registry record.
pub fn check_record(record: &ProblemRecord) -> Result<SuiteReport> {
    let entries = record
        .expected
        .par_iter()
        .map(|exp| {
            let report = exp.run(&record.problem)?;
            Ok(SuiteEntry {
                condition: exp.condition,
                expected: exp.verdict,
                actual: report.verdict,
                report,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport {
        problem: record.problem.name().to_string(),
        entries,
    })
}

pub fn check_suite(name: &str) -> Result<SuiteReport> {
    check_record(&get_problem(name)?)
}

/// Suites for the whole registry, in registry order.
pub fn check_all() -> Result<Vec<SuiteReport>> {
    all_problems().par_iter().map(check_record).collect()
}
