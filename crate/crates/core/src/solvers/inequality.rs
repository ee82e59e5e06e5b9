//! Per-iteration descent inequalities, reported as slack `rhs - lhs`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::VIProblem;
use crate::projection::FEASIBILITY_TOL;
use crate::trajectory::{SolverKind, Trajectory};
use crate::Vector;

/// Slack below `-INEQUALITY_TOL` counts as a violation.
pub const INEQUALITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityKind {
    /// `1/2 ||x^{k+1} - x||^2 + t <F(x^k), x^{k+1} - x> + 1/2 ||x^{k+1} - x^k||^2
    ///  <= 1/2 ||x^k - x||^2`.
    GpLemma,
    /// `<F(x_h), x_h - x> + 1/(4t) ||x_h - x^k||^2
    ///  <= 1/(2t) (||x^k - x||^2 - ||x^{k+1} - x||^2)`, for `t <= 1/(sqrt(2) L)`.
    EgLemma,
    /// `<F(x_h), x_h - x> + gamma/2 (1 - tau^2) ||x_h - x^k||^2
    ///  <= gamma/2 (||x^k - x||^2 - ||x^{k+1} - x||^2)`.
    AreIneq,
}

impl InequalityKind {
    fn solver(self) -> SolverKind {
        match self {
            InequalityKind::GpLemma => SolverKind::Gp,
            InequalityKind::EgLemma => SolverKind::Eg,
            InequalityKind::AreIneq => SolverKind::Are,
        }
    }
}

pub fn gp_slack(xk: &Vector, next: &Vector, f_xk: &Vector, t: f64, x: &Vector) -> f64 {
    let lhs = 0.5 * (next - x).norm_squared() + t * f_xk.dot(&(next - x)) + 0.5 * (next - xk).norm_squared();
    0.5 * (xk - x).norm_squared() - lhs
}

pub fn eg_slack(xk: &Vector, half: &Vector, next: &Vector, f_half: &Vector, t: f64, x: &Vector) -> f64 {
    let rhs = ((xk - x).norm_squared() - (next - x).norm_squared()) / (2.0 * t);
    rhs - f_half.dot(&(half - x)) - (half - xk).norm_squared() / (4.0 * t)
}

pub fn are_slack(
    xk: &Vector,
    half: &Vector,
    next: &Vector,
    f_half: &Vector,
    gamma: f64,
    tau: f64,
    x: &Vector,
) -> f64 {
    let rhs = 0.5 * gamma * ((xk - x).norm_squared() - (next - x).norm_squared());
    rhs - f_half.dot(&(half - x)) - 0.5 * gamma * (1.0 - tau * tau) * (half - xk).norm_squared()
}

/// Slack of the chosen inequality at every recorded iteration, with
/// `reference` as the comparison point.
pub fn assert_iteration_inequality(
    kind: InequalityKind,
    traj: &Trajectory,
    problem: &VIProblem,
    reference: &Vector,
) -> Result<Vec<f64>> {
    if traj.solver != kind.solver() {
        return Err(Error::KindMismatch {
            expected: kind.solver().to_string(),
            found: traj.solver.to_string(),
        });
    }
    if reference.len() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            got: reference.len(),
        });
    }
    problem.set().ensure_contains(reference, FEASIBILITY_TOL)?;
    let t = traj.step;
    (0..traj.len())
        .map(|k| {
            let xk = traj.x(k);
            let next = traj.next_x(k);
            match kind {
                InequalityKind::GpLemma => Ok(gp_slack(&xk, &next, &problem.eval(&xk)?, t, reference)),
                InequalityKind::EgLemma | InequalityKind::AreIneq => {
                    let half = traj.half(k).ok_or_else(|| {
                        Error::InvalidConfig(format!("iteration {k} has no half step"))
                    })?;
                    let f_half = problem.eval(&half)?;
                    if kind == InequalityKind::EgLemma {
                        Ok(eg_slack(&xk, &half, &next, &f_half, t, reference))
                    } else {
                        let gamma = traj.iterates[k].gamma.unwrap_or(1.0 / t);
                        Ok(are_slack(&xk, &half, &next, &f_half, gamma, traj.tau, reference))
                    }
                }
            }
        })
        .collect()
}
