//! Sampled checks of operator structure (monotonicity and its relaxations)
//! and of the sequence conditions along orbits of `M` or `M+`.
//!
//! `SATISFIED_ON_SAMPLES` only means no sampled violation was found.
//! `VIOLATED` carries a witness that can be re-evaluated.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::merit::gap_unchecked;
use crate::problem::VIProblem;
use crate::projection::{extra_step, grad_step, FEASIBILITY_TOL};
use crate::Vector;

/// Values below `-SLACK_TOL` count as violations.
pub const SLACK_TOL: f64 = 1e-10;
/// Modulus for the strong variants when none is given.
pub const DEFAULT_MU: f64 = 1e-6;
pub const DEFAULT_SEQUENCE_LENGTH: usize = 100;
pub const DEFAULT_ORBITS: usize = 32;
/// Grid points with a gap below this become candidates when no solutions are declared.
pub const CANDIDATE_GAP_TOL: f64 = 1e-6;
/// Extra-gradient iterations when no grid point is a candidate.
const POLISH_ITERS: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Condition {
    Monotone,
    StronglyMonotone,
    PseudoMonotone,
    StrongPseudo,
    QuasiMonotone,
    WeakSharp,
    Minty,
    StrongMinty,
    LocalMinty,
    LocalMintyPlus,
    LocalMintyStar,
    Gp,
    GpPlus,
    GpStar,
}

impl Condition {
    pub const STRUCTURAL: [Condition; 8] = [
        Condition::Monotone,
        Condition::StronglyMonotone,
        Condition::PseudoMonotone,
        Condition::StrongPseudo,
        Condition::QuasiMonotone,
        Condition::WeakSharp,
        Condition::Minty,
        Condition::StrongMinty,
    ];

    pub const SEQUENCE: [Condition; 6] = [
        Condition::LocalMinty,
        Condition::LocalMintyPlus,
        Condition::LocalMintyStar,
        Condition::Gp,
        Condition::GpPlus,
        Condition::GpStar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Condition::Monotone => "MONOTONE",
            Condition::StronglyMonotone => "STRONGLY_MONOTONE",
            Condition::PseudoMonotone => "PSEUDO_MONOTONE",
            Condition::StrongPseudo => "STRONG_PSEUDO",
            Condition::QuasiMonotone => "QUASI_MONOTONE",
            Condition::WeakSharp => "WEAK_SHARP",
            Condition::Minty => "MINTY",
            Condition::StrongMinty => "STRONG_MINTY",
            Condition::LocalMinty => "LOCAL_MINTY",
            Condition::LocalMintyPlus => "LOCAL_MINTY_PLUS",
            Condition::LocalMintyStar => "LOCAL_MINTY_STAR",
            Condition::Gp => "GP",
            Condition::GpPlus => "GP_PLUS",
            Condition::GpStar => "GP_STAR",
        }
    }

    pub fn is_sequence(self) -> bool {
        Condition::SEQUENCE.contains(&self)
    }

    /// Orbits follow `M+` instead of `M`.
    pub fn follows_extra_gradient(self) -> bool {
        matches!(self, Condition::LocalMintyPlus | Condition::GpPlus)
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace(['-', ' '], "_");
        Condition::STRUCTURAL
            .iter()
            .chain(Condition::SEQUENCE.iter())
            .copied()
            .find(|c| c.name() == norm)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown condition `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    SatisfiedOnSamples,
    Violated,
}

impl Verdict {
    pub fn is_satisfied(self) -> bool {
        self == Verdict::SatisfiedOnSamples
    }

    fn from_ok(ok: bool) -> Self {
        if ok {
            Verdict::SatisfiedOnSamples
        } else {
            Verdict::Violated
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::SatisfiedOnSamples => "SATISFIED_ON_SAMPLES",
            Verdict::Violated => "VIOLATED",
        })
    }
}

/// A point where the defining inequality fails.
///
/// For pairwise conditions `x_star` holds the second point `y`; for the
/// candidate-based ones it holds the candidate solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vec<f64>,
    pub x_star: Vec<f64>,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbit: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckParameters {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    pub sample_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence_length: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateOutcome {
    pub candidate: Vec<f64>,
    pub satisfied: bool,
    /// First sample (or orbit term) index with a violation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_violation: Option<usize>,
    /// Smallest value of the defining expression.
    pub worst_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitOutcome {
    pub start: Vec<f64>,
    pub candidates: Vec<CandidateOutcome>,
}

impl OrbitOutcome {
    pub fn satisfied(&self) -> bool {
        self.candidates.iter().any(|c| c.satisfied)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: Condition,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub parameters: CheckParameters,
    /// Per-candidate outcomes for the candidate-based structural conditions.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<CandidateOutcome>,
    /// Per-orbit outcomes for the sequence conditions.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub orbits: Vec<OrbitOutcome>,
    /// A single candidate that works for every tested orbit, if one exists.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniform_candidate: Option<Vec<f64>>,
}

impl ConditionReport {
    /// One table row: condition, verdict and a witness excerpt.
    pub fn table_row(&self) -> String {
        let witness = match &self.witness {
            Some(w) => {
                let k = w.k.map(|k| format!(" k={k}")).unwrap_or_default();
                format!("value={:.3e}{k} x={}", w.value, short_vec(&w.x))
            }
            None => String::new(),
        };
        format!("{:<20}{:<24}{witness}", self.condition.name(), self.verdict.to_string())
    }
}

fn short_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().take(4).map(|x| format!("{x:.4}")).collect();
    let more = if v.len() > 4 { ", ..." } else { "" };
    format!("({}{more})", parts.join(", "))
}

fn to_vec(x: &Vector) -> Vec<f64> {
    x.iter().copied().collect()
}

/// Value of the defining inequality of a structural condition at the pair
/// `(x, other)`, where `other` is `y` or the candidate `x*`. Implication-type
/// conditions return the value of the conclusion.
pub fn structural_value(problem: &VIProblem, condition: Condition, x: &Vector, other: &Vector, mu: f64) -> Result<f64> {
    let d = x - other;
    let sq = d.norm_squared();
    Ok(match condition {
        Condition::Monotone => (problem.eval(x)? - problem.eval(other)?).dot(&d),
        Condition::StronglyMonotone => (problem.eval(x)? - problem.eval(other)?).dot(&d) - mu * sq,
        Condition::PseudoMonotone | Condition::QuasiMonotone | Condition::Minty => problem.eval(x)?.dot(&d),
        Condition::StrongPseudo | Condition::StrongMinty => problem.eval(x)?.dot(&d) - mu * sq,
        Condition::WeakSharp => problem.eval(other)?.dot(&d) - mu * sq,
        seq => {
            return Err(Error::InvalidConfig(format!(
                "{seq} is a sequence condition and needs t and delta"
            )))
        }
    })
}

/// Value of the defining inequality of a sequence condition at orbit term `x`.
pub fn sequence_value(
    problem: &VIProblem,
    condition: Condition,
    x: &Vector,
    x_star: &Vector,
    t: f64,
    delta: f64,
) -> Result<f64> {
    Ok(SequenceTerm::new(problem, condition, x, t, delta)?.value(x_star))
}

/// The parts of a sequence condition at one term, independent of `x*`:
/// `value = coef <a, p - x*> + extra`.
struct SequenceTerm {
    coef: f64,
    a: Vector,
    p: Vector,
    extra: f64,
    next: Vector,
}

impl SequenceTerm {
    fn new(problem: &VIProblem, condition: Condition, x: &Vector, t: f64, delta: f64) -> Result<Self> {
        let m = grad_step(problem, x, t)?;
        let next = if condition.follows_extra_gradient() {
            extra_step(problem, x, &m, t)?
        } else {
            m.clone()
        };
        let residual = (&m - x).norm_squared();
        let (coef, a, p, extra) = match condition {
            Condition::LocalMinty => (1.0, problem.eval(x)?, x.clone(), 0.0),
            Condition::LocalMintyPlus => (1.0, problem.eval(&m)?, m, 0.0),
            Condition::LocalMintyStar => (1.0, problem.eval(x)?, m, 0.0),
            Condition::Gp | Condition::GpPlus => (4.0 * (1.0 + delta) * t, problem.eval(&m)?, m, residual),
            Condition::GpStar => (2.0 * (1.0 + delta) * t, problem.eval(x)?, m, residual),
            other => {
                return Err(Error::InvalidConfig(format!("{other} is not a sequence condition")));
            }
        };
        Ok(SequenceTerm { coef, a, p, extra, next })
    }

    fn value(&self, x_star: &Vector) -> f64 {
        self.coef * self.a.dot(&(&self.p - x_star)) + self.extra
    }
}

/// Re-evaluates the witness of a report; `None` when there is no witness.
pub fn reevaluate_witness(problem: &VIProblem, report: &ConditionReport) -> Result<Option<f64>> {
    let Some(w) = &report.witness else {
        return Ok(None);
    };
    let x = Vector::from_column_slice(&w.x);
    let other = Vector::from_column_slice(&w.x_star);
    let p = &report.parameters;
    let value = if report.condition.is_sequence() {
        let t = p.t.ok_or_else(|| Error::InvalidConfig("sequence report without t".into()))?;
        sequence_value(problem, report.condition, &x, &other, t, p.delta.unwrap_or(1.0))?
    } else {
        structural_value(problem, report.condition, &x, &other, p.mu.unwrap_or(0.0))?
    };
    Ok(Some(value))
}

/// Candidate solutions: the declared ones or, when none are declared and the
/// dimension is at most 3, points with a small gap among the center, the
/// coordinate-direction extreme points and a grid. If none qualifies, the
/// best of them is refined by extra-gradient and kept if its gap is small.
pub fn default_candidates(problem: &VIProblem, grid_budget: usize) -> Result<Vec<Vector>> {
    if !problem.declared_solutions().is_empty() {
        return Ok(problem.declared_solutions().to_vec());
    }
    if problem.dim() > crate::merit::GRID_MAX_DIM {
        return Ok(Vec::new());
    }
    let set = problem.set();
    let mut probes = vec![set.center()];
    for i in 0..problem.dim() {
        for sign in [1.0, -1.0] {
            let mut e = Vector::zeros(problem.dim());
            e[i] = sign;
            probes.push(set.linear_minimize(&e)?.0);
        }
    }
    probes.extend(set.grid(grid_budget));
    let mut out: Vec<Vector> = Vec::new();
    let mut best: Option<(f64, Vector)> = None;
    for y in probes {
        if out.iter().any(|c| (c - &y).norm() <= 1e-12) {
            continue;
        }
        let g = gap_unchecked(problem, &y)?;
        if g <= CANDIDATE_GAP_TOL {
            out.push(y);
        } else if best.as_ref().is_none_or(|(b, _)| g < *b) {
            best = Some((g, y));
        }
    }
    if out.is_empty() {
        if let Some((_, start)) = best {
            out.extend(polish(problem, &start)?);
        }
    }
    Ok(out)
}

/// Extra-gradient from the best grid point, for solutions off the grid.
fn polish(problem: &VIProblem, start: &Vector) -> Result<Option<Vector>> {
    let t = 1.0 / (std::f64::consts::SQRT_2 * problem.lipschitz_or_estimate(0)?);
    let mut x = start.clone();
    for _ in 0..POLISH_ITERS {
        let m = grad_step(problem, &x, t)?;
        x = extra_step(problem, &x, &m, t)?;
    }
    Ok((gap_unchecked(problem, &x)? <= CANDIDATE_GAP_TOL).then_some(x))
}

/// Seeded uniform start points.
pub fn default_starts(problem: &VIProblem, count: usize, seed: u64) -> Vec<Vector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| problem.set().sample(&mut rng)).collect()
}

/// All eight structural conditions.
pub fn classify_operator(problem: &VIProblem, samples: usize, seed: u64, mu: f64) -> Result<Vec<ConditionReport>> {
    classify_conditions(problem, &Condition::STRUCTURAL, samples, seed, mu)
}

/// Structural checks over `samples` seeded feasible pairs `(x, y)`.
///
/// The candidate-based checks (weak sharpness, Minty, strong Minty) test the
/// sampled points against each candidate from [`default_candidates`].
pub fn classify_conditions(
    problem: &VIProblem,
    conditions: &[Condition],
    samples: usize,
    seed: u64,
    mu: f64,
) -> Result<Vec<ConditionReport>> {
    if samples < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 samples, got {samples}")));
    }
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::InvalidConfig(format!("mu must be nonnegative, got {mu}")));
    }
    if let Some(c) = conditions.iter().find(|c| c.is_sequence()) {
        return Err(Error::InvalidConfig(format!("{c} is a sequence condition")));
    }
    let needs_candidates = conditions
        .iter()
        .any(|c| matches!(c, Condition::WeakSharp | Condition::Minty | Condition::StrongMinty));
    let candidates = if needs_candidates {
        let c = default_candidates(problem, 2001)?;
        if c.is_empty() {
            return Err(Error::NoCandidates(if problem.dim() > crate::merit::GRID_MAX_DIM {
                format!(
                    "`{}` declares no solutions and has dimension {} > {}",
                    problem.name(),
                    problem.dim(),
                    crate::merit::GRID_MAX_DIM
                )
            } else {
                format!("`{}` declares no solutions and the grid search found none", problem.name())
            }));
        }
        c
    } else {
        Vec::new()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(Vector, Vector)> = (0..samples)
        .map(|_| (problem.set().sample(&mut rng), problem.set().sample(&mut rng)))
        .collect();
    let values: Vec<(Vector, Vector)> = pairs
        .iter()
        .map(|(x, y)| Ok((problem.eval(x)?, problem.eval(y)?)))
        .collect::<Result<_>>()?;
    let sampled = Sampled {
        pairs: &pairs,
        values: &values,
        candidates: &candidates,
    };

    let params = CheckParameters {
        mu: Some(mu),
        sample_count: samples,
        seed: Some(seed),
        ..Default::default()
    };
    conditions
        .par_iter()
        .map(|&c| sampled.check(problem, c, mu, params.clone()))
        .collect()
}

struct Sampled<'a> {
    pairs: &'a [(Vector, Vector)],
    values: &'a [(Vector, Vector)],
    candidates: &'a [Vector],
}

impl Sampled<'_> {
    fn check(&self, problem: &VIProblem, condition: Condition, mu: f64, parameters: CheckParameters) -> Result<ConditionReport> {
        match condition {
            Condition::WeakSharp | Condition::Minty | Condition::StrongMinty => {
                self.check_candidates(problem, condition, mu, parameters)
            }
            _ => Ok(self.check_pairs(condition, mu, parameters)),
        }
    }

    fn check_pairs(&self, condition: Condition, mu: f64, parameters: CheckParameters) -> ConditionReport {
        let mut worst: Option<Witness> = None;
        for ((x, y), (fx, fy)) in self.pairs.iter().zip(self.values) {
            // both orientations of the pair
            for (a, b, fa, fb) in [(x, y, fx, fy), (y, x, fy, fx)] {
                let d = a - b;
                let sq = d.norm_squared();
                let premise = fb.dot(&d);
                let value = match condition {
                    Condition::Monotone => (fa - fb).dot(&d),
                    Condition::StronglyMonotone => (fa - fb).dot(&d) - mu * sq,
                    Condition::PseudoMonotone if premise >= 0.0 => fa.dot(&d),
                    Condition::StrongPseudo if premise >= 0.0 => fa.dot(&d) - mu * sq,
                    Condition::QuasiMonotone if premise > 0.0 => fa.dot(&d),
                    _ => continue,
                };
                if value < -SLACK_TOL && worst.as_ref().is_none_or(|w| value < w.value) {
                    worst = Some(Witness {
                        x: to_vec(a),
                        x_star: to_vec(b),
                        value,
                        k: None,
                        orbit: None,
                    });
                }
            }
        }
        ConditionReport {
            condition,
            verdict: Verdict::from_ok(worst.is_none()),
            witness: worst,
            parameters,
            candidates: Vec::new(),
            orbits: Vec::new(),
            uniform_candidate: None,
        }
    }

    fn check_candidates(
        &self,
        problem: &VIProblem,
        condition: Condition,
        mu: f64,
        parameters: CheckParameters,
    ) -> Result<ConditionReport> {
        let points: Vec<(&Vector, &Vector)> = self
            .pairs
            .iter()
            .zip(self.values)
            .flat_map(|((x, y), (fx, fy))| [(x, fx), (y, fy)])
            .collect();
        let mut outcomes = Vec::with_capacity(self.candidates.len());
        let mut witnesses = Vec::with_capacity(self.candidates.len());
        for c in self.candidates {
            let fc = problem.eval(c)?;
            let mut worst = f64::INFINITY;
            let mut first = None;
            let mut witness = None;
            for (i, (x, fx)) in points.iter().enumerate() {
                let d = *x - c;
                let value = match condition {
                    Condition::Minty => fx.dot(&d),
                    Condition::StrongMinty => fx.dot(&d) - mu * d.norm_squared(),
                    _ => fc.dot(&d) - mu * d.norm_squared(),
                };
                if value < worst {
                    worst = value;
                    if value < -SLACK_TOL {
                        witness = Some(Witness {
                            x: to_vec(x),
                            x_star: to_vec(c),
                            value,
                            k: None,
                            orbit: None,
                        });
                    }
                }
                if value < -SLACK_TOL && first.is_none() {
                    first = Some(i);
                }
            }
            outcomes.push(CandidateOutcome {
                candidate: to_vec(c),
                satisfied: first.is_none(),
                first_violation: first,
                worst_value: worst,
            });
            witnesses.push(witness);
        }
        // weak sharpness quantifies over all solutions, the Minty variants over some
        let ok = if condition == Condition::WeakSharp {
            outcomes.iter().all(|o| o.satisfied)
        } else {
            outcomes.iter().any(|o| o.satisfied)
        };
        let witness = if ok {
            None
        } else {
            // the failing candidate with the mildest worst violation
            outcomes
                .iter()
                .zip(witnesses)
                .filter(|(o, _)| !o.satisfied)
                .max_by(|(a, _), (b, _)| a.worst_value.total_cmp(&b.worst_value))
                .and_then(|(_, w)| w)
        };
        Ok(ConditionReport {
            condition,
            verdict: Verdict::from_ok(ok),
            witness,
            parameters,
            candidates: outcomes,
            orbits: Vec::new(),
            uniform_candidate: None,
        })
    }
}

/// Checks a sequence condition along the orbit from a single start.
pub fn check_sequence_condition(
    problem: &VIProblem,
    condition: Condition,
    x0: &Vector,
    t: f64,
    delta: f64,
    length: usize,
    candidates: &[Vector],
) -> Result<ConditionReport> {
    check_sequence_condition_orbits(problem, condition, std::slice::from_ref(x0), t, delta, length, candidates)
}

/// Checks a sequence condition along the orbits from several starts.
///
/// An orbit passes if some candidate keeps the defining value at or above
/// `-SLACK_TOL` at every term. The report passes if every orbit does.
/// For a failing orbit the witness comes from the candidate whose first
/// violation is latest (ties: the mildest worst value) and is that first
/// violating term.
pub fn check_sequence_condition_orbits(
    problem: &VIProblem,
    condition: Condition,
    starts: &[Vector],
    t: f64,
    delta: f64,
    length: usize,
    candidates: &[Vector],
) -> Result<ConditionReport> {
    if !condition.is_sequence() {
        return Err(Error::InvalidConfig(format!("{condition} is not a sequence condition")));
    }
    if candidates.is_empty() {
        return Err(Error::NoCandidates("the candidate list is empty".into()));
    }
    if starts.is_empty() || length == 0 {
        return Err(Error::InvalidConfig("need at least one start and a positive length".into()));
    }
    if !(t > 0.0 && t.is_finite()) || !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidConfig(format!("t and delta must be positive, got {t} and {delta}")));
    }
    for c in candidates.iter().chain(starts) {
        if c.len() != problem.dim() {
            return Err(Error::DimensionMismatch {
                expected: problem.dim(),
                got: c.len(),
            });
        }
        problem.set().ensure_contains(c, FEASIBILITY_TOL)?;
    }

    let per_orbit: Vec<(OrbitOutcome, Option<Witness>)> = starts
        .par_iter()
        .enumerate()
        .map(|(i, x0)| check_orbit(problem, condition, i, x0, t, delta, length, candidates))
        .collect::<Result<_>>()?;

    let uniform_candidate = (0..candidates.len())
        .find(|&j| per_orbit.iter().all(|(o, _)| o.candidates[j].satisfied))
        .map(|j| to_vec(&candidates[j]));
    let witness = per_orbit.iter().find_map(|(_, w)| w.clone());
    Ok(ConditionReport {
        condition,
        verdict: Verdict::from_ok(witness.is_none()),
        witness,
        parameters: CheckParameters {
            t: Some(t),
            delta: Some(delta),
            mu: None,
            sample_count: starts.len(),
            sequence_length: Some(length),
            seed: None,
        },
        candidates: Vec::new(),
        orbits: per_orbit.into_iter().map(|(o, _)| o).collect(),
        uniform_candidate,
    })
}

#[allow(clippy::too_many_arguments)]
fn check_orbit(
    problem: &VIProblem,
    condition: Condition,
    orbit: usize,
    x0: &Vector,
    t: f64,
    delta: f64,
    length: usize,
    candidates: &[Vector],
) -> Result<(OrbitOutcome, Option<Witness>)> {
    let mut terms = Vec::with_capacity(length);
    let mut x = x0.clone();
    for _ in 0..length {
        let term = SequenceTerm::new(problem, condition, &x, t, delta)?;
        let next = term.next.clone();
        terms.push((x, term));
        x = next;
    }
    let mut outcomes = Vec::with_capacity(candidates.len());
    let mut witnesses = Vec::with_capacity(candidates.len());
    for c in candidates {
        let mut worst = f64::INFINITY;
        let mut first: Option<(usize, f64)> = None;
        for (k, (_, term)) in terms.iter().enumerate() {
            let v = term.value(c);
            worst = worst.min(v);
            if v < -SLACK_TOL && first.is_none() {
                first = Some((k, v));
            }
        }
        outcomes.push(CandidateOutcome {
            candidate: to_vec(c),
            satisfied: first.is_none(),
            first_violation: first.map(|(k, _)| k),
            worst_value: worst,
        });
        witnesses.push(first.map(|(k, value)| Witness {
            x: to_vec(&terms[k].0),
            x_star: to_vec(c),
            value,
            k: Some(k),
            orbit: Some(orbit),
        }));
    }
    let outcome = OrbitOutcome {
        start: to_vec(x0),
        candidates: outcomes,
    };
    let witness = if outcome.satisfied() {
        None
    } else {
        (0..candidates.len())
            .max_by(|&a, &b| {
                let (oa, ob) = (&outcome.candidates[a], &outcome.candidates[b]);
                oa.first_violation
                    .cmp(&ob.first_violation)
                    .then(oa.worst_value.total_cmp(&ob.worst_value))
                    // prefer the earlier candidate on exact ties
                    .then(b.cmp(&a))
            })
            .and_then(|j| witnesses[j].clone())
    };
    Ok((outcome, witness))
}

/// `max(0, -min_x <F(x), x - candidate>)` over the probe set of
/// [`crate::merit::probe_points`]. Zero means no sampled violation.
pub fn minty_residual(problem: &VIProblem, candidate: &Vector, samples: usize, seed: u64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::InvalidConfig("minty residual needs at least one sample".into()));
    }
    problem.set().ensure_contains(candidate, FEASIBILITY_TOL)?;
    let mut worst = 0.0f64;
    for x in crate::merit::probe_points(problem, samples, seed) {
        worst = worst.max(-problem.eval(&x)?.dot(&(&x - candidate)));
    }
    Ok(worst)
}
