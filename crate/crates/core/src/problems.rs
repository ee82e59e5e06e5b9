//! Built-in problem registry with declared solutions and the verdicts each
//! problem is expected to produce under pinned check parameters.

use std::f64::consts::SQRT_2;

use nalgebra::{dmatrix, dvector, DMatrix};
use serde::{Deserialize, Serialize};

use crate::conditions::{
    check_sequence_condition_orbits, classify_conditions, default_starts, Condition, ConditionReport, Verdict,
    DEFAULT_MU, DEFAULT_ORBITS, DEFAULT_SEQUENCE_LENGTH,
};
use crate::error::{Error, Result};
use crate::problem::{spectral_norm, Operator, VIProblem};
use crate::set::FeasibleSet;
use crate::{Matrix, Vector};

/// Ids accepted by [`builtin_operator`].
pub const BUILTIN_OPERATORS: [&str; 1] = ["cubic-skew"];

/// Nonlinear operators that problem documents can reference by id.
pub fn builtin_operator(id: &str) -> Result<Operator> {
    match id {
        // F(x) = x^3 (componentwise) + S x with S = [[0, 1], [-1, 0]]
        "cubic-skew" => Ok(Operator::nonlinear(|x: &Vector| {
            let mut f = x.map(|v| v * v * v);
            if x.len() == 2 {
                f[0] += x[1];
                f[1] -= x[0];
            }
            f
        })
        .with_jacobian(|x: &Vector| {
            let mut j = Matrix::from_diagonal(&x.map(|v| 3.0 * v * v));
            if x.len() == 2 {
                j[(0, 1)] += 1.0;
                j[(1, 0)] -= 1.0;
            }
            j
        })
        .with_id(id)),
        other => Err(Error::UnknownOperator(other.to_string())),
    }
}

/// Where the orbits of a sequence check start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StartPlan {
    Points { points: Vec<Vec<f64>> },
    Seeded { count: usize, seed: u64 },
    /// Seeded points with coordinate `axis` reflected to the given sign.
    /// Only meaningful for sets symmetric in that coordinate.
    HalfSet { count: usize, seed: u64, axis: usize, nonnegative: bool },
}

impl StartPlan {
    pub fn points(&self, problem: &VIProblem) -> Vec<Vector> {
        match self {
            StartPlan::Points { points } => points.iter().map(|p| Vector::from_column_slice(p)).collect(),
            StartPlan::Seeded { count, seed } => default_starts(problem, *count, *seed),
            StartPlan::HalfSet {
                count,
                seed,
                axis,
                nonnegative,
            } => default_starts(problem, *count, *seed)
                .into_iter()
                .map(|mut x| {
                    let v = x[*axis].abs();
                    x[*axis] = if *nonnegative { v } else { -v };
                    x
                })
                .collect(),
        }
    }
}

/// Pinned parameters for one expected verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CheckPlan {
    Structural {
        samples: usize,
        seed: u64,
        mu: f64,
    },
    Sequence {
        t: f64,
        delta: f64,
        length: usize,
        starts: StartPlan,
        /// `None` uses the declared solutions.
        candidates: Option<Vec<Vec<f64>>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub condition: Condition,
    pub verdict: Verdict,
    pub plan: CheckPlan,
}

impl Expectation {
    pub fn run(&self, problem: &VIProblem) -> Result<ConditionReport> {
        match &self.plan {
            CheckPlan::Structural { samples, seed, mu } => {
                let mut reports = classify_conditions(problem, &[self.condition], *samples, *seed, *mu)?;
                Ok(reports.remove(0))
            }
            CheckPlan::Sequence {
                t,
                delta,
                length,
                starts,
                candidates,
            } => {
                let candidates: Vec<Vector> = match candidates {
                    Some(c) => c.iter().map(|v| Vector::from_column_slice(v)).collect(),
                    None => problem.declared_solutions().to_vec(),
                };
                check_sequence_condition_orbits(
                    problem,
                    self.condition,
                    &starts.points(problem),
                    *t,
                    *delta,
                    *length,
                    &candidates,
                )
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProblemRecord {
    pub problem: VIProblem,
    pub tags: Vec<String>,
    pub expected: Vec<Expectation>,
    pub notes: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemInfo {
    pub name: String,
    pub dimension: usize,
    pub tags: Vec<String>,
}

fn structural(condition: Condition, verdict: Verdict) -> Expectation {
    Expectation {
        condition,
        verdict,
        plan: CheckPlan::Structural {
            samples: 10_000,
            seed: 0,
            mu: DEFAULT_MU,
        },
    }
}

fn sequence(condition: Condition, verdict: Verdict, t: f64, starts: StartPlan, candidates: Option<Vec<Vec<f64>>>) -> Expectation {
    Expectation {
        condition,
        verdict,
        plan: CheckPlan::Sequence {
            t,
            delta: 1.0,
            length: DEFAULT_SEQUENCE_LENGTH,
            starts,
            candidates,
        },
    }
}

fn seeded() -> StartPlan {
    StartPlan::Seeded {
        count: DEFAULT_ORBITS,
        seed: 0,
    }
}

fn tags(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

const SAT: Verdict = Verdict::SatisfiedOnSamples;
const VIO: Verdict = Verdict::Violated;

fn neg_identity_1d() -> Result<ProblemRecord> {
    let problem = VIProblem::new(
        "neg-identity-1d",
        Operator::linear(dmatrix![-1.0])?,
        FeasibleSet::cube(1, -1.0, 1.0)?,
    )?
    .with_lipschitz(1.0)?
    .with_lipschitz_p(1.0)?
    .with_declared_solutions(vec![dvector![-1.0], dvector![0.0], dvector![1.0]])?;
    let starts = || {
        let mut points: Vec<Vec<f64>> = vec![vec![-1.0], vec![0.0], vec![1.0]];
        points.extend(default_starts(&problem, DEFAULT_ORBITS, 0).iter().map(|x| vec![x[0]]));
        StartPlan::Points { points }
    };
    let mut expected = vec![
        structural(Condition::Monotone, VIO),
        structural(Condition::Minty, VIO),
    ];
    expected.extend(Condition::SEQUENCE.iter().map(|&c| sequence(c, SAT, 0.5, starts(), None)));
    Ok(ProblemRecord {
        problem,
        tags: tags(&["non-monotone", "no-minty-solution"]),
        expected,
        notes: "F(x) = -x on [-1, 1]; solutions -1, 0, 1, none of them Minty. Orbits attract to the sign of the start."
            .into(),
    })
}

fn indef_diag_ball() -> Result<ProblemRecord> {
    let problem = VIProblem::new(
        "indef-diag-ball",
        Operator::linear(dmatrix![-1.0, 0.0; 0.0, 1.0])?,
        FeasibleSet::unit_ball(2, 1.0)?,
    )?
    .with_lipschitz(1.0)?
    .with_lipschitz_p(1.0)?
    .with_declared_solutions(vec![dvector![1.0, 0.0], dvector![0.0, 0.0], dvector![-1.0, 0.0]])?;
    let half = |nonnegative| StartPlan::HalfSet {
        count: DEFAULT_ORBITS,
        seed: 0,
        axis: 0,
        nonnegative,
    };
    let mut expected = vec![
        structural(Condition::Monotone, VIO),
        structural(Condition::Minty, VIO),
        // a bounded set has a Minty solution exactly when F is quasi-monotone
        structural(Condition::QuasiMonotone, VIO),
    ];
    for c in [Condition::LocalMinty, Condition::LocalMintyPlus, Condition::LocalMintyStar] {
        for t in [0.25, 0.5, 1.0] {
            expected.push(sequence(c, SAT, t, half(true), Some(vec![vec![1.0, 0.0]])));
            expected.push(sequence(c, SAT, t, half(false), Some(vec![vec![-1.0, 0.0]])));
        }
    }
    for c in [Condition::Gp, Condition::GpPlus, Condition::GpStar] {
        expected.push(sequence(c, SAT, 0.5, half(true), Some(vec![vec![1.0, 0.0]])));
    }
    Ok(ProblemRecord {
        problem,
        tags: tags(&["non-monotone", "no-minty-solution"]),
        expected,
        notes: "F(x) = diag(-1, 1) x on the unit disk; the half-disk x1 >= 0 is attracted to (1, 0), the other half to (-1, 0)."
            .into(),
    })
}

fn rotation_ball() -> Result<ProblemRecord> {
    let problem = VIProblem::new(
        "rotation-ball",
        Operator::linear(dmatrix![0.0, 1.0; -1.0, 0.0])?,
        FeasibleSet::unit_ball(2, 1.0)?,
    )?
    .with_lipschitz(1.0)?
    .with_lipschitz_p(1.0)?
    .with_declared_solutions(vec![dvector![0.0, 0.0]])?;
    let expected = vec![
        structural(Condition::Monotone, SAT),
        structural(Condition::PseudoMonotone, SAT),
        structural(Condition::Minty, SAT),
        structural(Condition::StronglyMonotone, VIO),
        sequence(Condition::LocalMinty, SAT, 0.5, seeded(), None),
        sequence(Condition::LocalMintyPlus, SAT, 0.5, seeded(), None),
        sequence(Condition::Gp, SAT, 0.5, seeded(), None),
        sequence(Condition::GpPlus, SAT, 0.5, seeded(), None),
        sequence(Condition::LocalMintyStar, VIO, 0.5, seeded(), None),
        sequence(
            Condition::GpStar,
            VIO,
            0.5,
            StartPlan::Points {
                points: vec![vec![0.01, 0.0]],
            },
            None,
        ),
    ];
    Ok(ProblemRecord {
        problem,
        tags: tags(&["monotone", "saddle"]),
        expected,
        notes: "F(x) = [[0, 1], [-1, 0]] x on the unit disk, from min_x max_y xy; monotone, yet GP* fails near the origin."
            .into(),
    })
}

fn neg_square_opt() -> Result<ProblemRecord> {
    let problem = VIProblem::new(
        "neg-square-opt",
        Operator::linear(dmatrix![-2.0])?,
        FeasibleSet::cube(1, -1.0, 1.0)?,
    )?
    .with_lipschitz(2.0)?
    .with_lipschitz_p(1.0)?
    .with_declared_solutions(vec![dvector![-1.0], dvector![0.0], dvector![1.0]])?;
    Ok(ProblemRecord {
        problem,
        tags: tags(&["non-monotone", "no-minty-solution", "optimization"]),
        expected: vec![
            structural(Condition::Monotone, VIO),
            structural(Condition::Minty, VIO),
            sequence(Condition::GpStar, SAT, 0.25, seeded(), None),
        ],
        notes: "Stationarity VI of min -x^2 on [-1, 1]: the global minimizers -1 and 1 are not Minty solutions.".into(),
    })
}

fn bilinear_saddle_box() -> Result<ProblemRecord> {
    let problem = VIProblem::new(
        "bilinear-saddle-box",
        Operator::linear(dmatrix![0.0, 1.0; -1.0, 0.0])?,
        FeasibleSet::cube(2, -1.0, 1.0)?,
    )?
    .with_lipschitz(1.0)?
    .with_lipschitz_p(1.0)?
    .with_declared_solutions(vec![dvector![0.0, 0.0]])?;
    Ok(ProblemRecord {
        problem,
        tags: tags(&["monotone", "saddle"]),
        expected: vec![
            structural(Condition::Monotone, SAT),
            structural(Condition::Minty, SAT),
            sequence(Condition::LocalMinty, SAT, 0.5, seeded(), None),
            sequence(Condition::GpPlus, SAT, 0.5, seeded(), None),
        ],
        notes: "min_x max_y xy on [-1, 1]^2, F(x, y) = (y, -x).".into(),
    })
}

fn strongly_monotone_affine() -> Result<ProblemRecord> {
    let a: DMatrix<f64> = dmatrix![
        1.0, 1.0, 0.0;
        -1.0, 1.0, 1.0;
        0.0, -1.0, 1.0
    ];
    let x_star = dvector![1.0, -0.1, 0.3];
    // F(x*) = (-0.5, 0, 0) points out of the face x1 = 1
    let offset = -(&a * &x_star) + dvector![-0.5, 0.0, 0.0];
    let l = spectral_norm(&a);
    let problem = VIProblem::new(
        "strongly-monotone-affine",
        Operator::affine(a, offset)?,
        FeasibleSet::cube(3, -1.0, 1.0)?,
    )?
    .with_lipschitz(l)?
    .with_lipschitz_p(1.0)?
    .with_declared_solutions(vec![x_star])?;
    Ok(ProblemRecord {
        problem,
        tags: tags(&["monotone", "strongly-monotone"]),
        expected: vec![
            structural(Condition::StronglyMonotone, SAT),
            structural(Condition::StrongPseudo, SAT),
            structural(Condition::StrongMinty, SAT),
            sequence(Condition::LocalMinty, SAT, 0.5, seeded(), None),
        ],
        notes: "F(x) = (I + S) x + b with S skew on [-1, 1]^3; the unique solution sits on the face x1 = 1.".into(),
    })
}

fn cubic_skew_box() -> Result<ProblemRecord> {
    let problem = VIProblem::new("cubic-skew-box", builtin_operator("cubic-skew")?, FeasibleSet::cube(2, -1.0, 1.0)?)?
        // ||diag(3x^2) + S|| <= 3 + 1 and |3x^2 - 3y^2| <= 6 |x - y| on [-1, 1]
        .with_lipschitz(4.0)?
        .with_lipschitz_p(6.0)?
        .with_declared_solutions(vec![dvector![0.0, 0.0]])?;
    Ok(ProblemRecord {
        problem,
        tags: tags(&["monotone", "nonlinear"]),
        expected: vec![
            structural(Condition::Monotone, SAT),
            structural(Condition::Minty, SAT),
            sequence(Condition::LocalMinty, SAT, 0.25, seeded(), None),
        ],
        notes: "F(x) = x^3 + S x on [-1, 1]^2: monotone and nonlinear, with an analytic Jacobian.".into(),
    })
}

fn simplex_rps() -> Result<ProblemRecord> {
    let a = dmatrix![
        0.0, -1.0, 1.0;
        1.0, 0.0, -1.0;
        -1.0, 1.0, 0.0
    ];
    let third = 1.0 / 3.0;
    let problem = VIProblem::new("simplex-rps", Operator::linear(a)?, FeasibleSet::new_simplex(3)?)?
        .with_lipschitz(3f64.sqrt())?
        .with_lipschitz_p(1.0)?
        .with_declared_solutions(vec![dvector![third, third, third]])?;
    Ok(ProblemRecord {
        problem,
        tags: tags(&["monotone", "simplex", "game"]),
        expected: vec![
            structural(Condition::Monotone, SAT),
            structural(Condition::Minty, SAT),
        ],
        notes: "Rock-paper-scissors payoff operator on the probability simplex; the uniform strategy is the solution."
            .into(),
    })
}

fn build_all() -> Result<Vec<ProblemRecord>> {
    let mut all = vec![
        bilinear_saddle_box()?,
        cubic_skew_box()?,
        indef_diag_ball()?,
        neg_identity_1d()?,
        neg_square_opt()?,
        rotation_ball()?,
        simplex_rps()?,
        strongly_monotone_affine()?,
    ];
    all.sort_by(|a, b| a.problem.name().cmp(b.problem.name()));
    Ok(all)
}

pub fn all_problems() -> Vec<ProblemRecord> {
    build_all().expect("built-in problems are well-formed")
}

pub fn get_problem(name: &str) -> Result<ProblemRecord> {
    let all = all_problems();
    let available = all.iter().map(|r| r.problem.name().to_string()).collect();
    all.into_iter()
        .find(|r| r.problem.name() == name)
        .ok_or_else(|| Error::UnknownProblem {
            name: name.to_string(),
            available,
        })
}

/// Alphabetical listing of the registry.
pub fn list_problems() -> Vec<ProblemInfo> {
    all_problems()
        .into_iter()
        .map(|r| ProblemInfo {
            name: r.problem.name().to_string(),
            dimension: r.problem.dim(),
            tags: r.tags,
        })
        .collect()
}

/// Largest extra-gradient step allowed by the declared Lipschitz constant.
pub fn eg_step(problem: &VIProblem) -> Option<f64> {
    problem.lipschitz().map(|l| 1.0 / (SQRT_2 * l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::merit::{gap, proj_residual};

    #[test]
    fn registry_listing() {
        let list = list_problems();
        assert!(list.len() >= 6);
        let names: Vec<&str> = list.iter().map(|p| p.name.as_str()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
        let neg = list.iter().find(|p| p.name == "neg-identity-1d").unwrap();
        assert!(neg.tags.iter().any(|t| t == "no-minty-solution"));
        let rot = list.iter().find(|p| p.name == "rotation-ball").unwrap();
        assert!(rot.tags.iter().any(|t| t == "monotone"));
        for required in [
            "neg-identity-1d",
            "indef-diag-ball",
            "rotation-ball",
            "neg-square-opt",
            "bilinear-saddle-box",
            "strongly-monotone-affine",
        ] {
            assert!(names.contains(&required), "{required}");
        }
    }

    #[test]
    fn declared_solutions() {
        let sols = |n: &str| -> Vec<Vec<f64>> {
            get_problem(n)
                .unwrap()
                .problem
                .declared_solutions()
                .iter()
                .map(|s| s.iter().copied().collect())
                .collect()
        };
        assert_eq!(sols("neg-identity-1d"), vec![vec![-1.0], vec![0.0], vec![1.0]]);
        assert_eq!(sols("rotation-ball"), vec![vec![0.0, 0.0]]);
        assert_eq!(sols("indef-diag-ball"), vec![vec![1.0, 0.0], vec![0.0, 0.0], vec![-1.0, 0.0]]);
    }

    #[test]
    fn declared_solutions_are_exact() {
        for r in all_problems() {
            for s in r.problem.declared_solutions() {
                assert!(gap(&r.problem, s).unwrap() <= 1e-10, "{}", r.problem.name());
                assert!(proj_residual(&r.problem, s, 0.5).unwrap() <= 1e-12, "{}", r.problem.name());
            }
        }
    }

    #[test]
    fn unknown_name_lists_registry() {
        match get_problem("nope") {
            Err(Error::UnknownProblem { available, .. }) => assert!(available.contains(&"rotation-ball".to_string())),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cubic_jacobian_matches_differences() {
        let op = builtin_operator("cubic-skew").unwrap();
        let p = VIProblem::new("c", op, FeasibleSet::cube(2, -1.0, 1.0).unwrap()).unwrap();
        let x = dvector![0.3, -0.7];
        let j = p.jacobian(&x).unwrap();
        let h = 1e-6;
        for i in 0..2 {
            let mut e = Vector::zeros(2);
            e[i] = h;
            let col = (p.eval(&(&x + &e)).unwrap() - p.eval(&(&x - &e)).unwrap()) / (2.0 * h);
            assert!((col - j.column(i)).norm() < 1e-8);
        }
        assert!(matches!(builtin_operator("nope"), Err(Error::UnknownOperator(_))));
    }

    #[test]
    fn builtin_problem_round_trips_through_json() {
        let r = get_problem("cubic-skew-box").unwrap();
        let back = VIProblem::from_json(&r.problem.to_json().unwrap()).unwrap();
        let x = dvector![0.2, 0.9];
        assert_eq!(back.eval(&x).unwrap(), r.problem.eval(&x).unwrap());
        assert_eq!(back.lipschitz_p(), Some(6.0));
    }
}
