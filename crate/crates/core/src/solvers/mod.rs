//! Projection-type solvers. Each run records a [`Trajectory`].
//!
//! * gradient projection: `x^{k+1} = M(x^k; t)`
//! * extra-gradient: `x^{k+1/2} = M(x^k; t)`, `x^{k+1} = M+(x^k; t)`
//! * ARE of order 1 or 2: a regularized subproblem for the half step, then
//!   `x^{k+1} = Proj(x^k - F(x^{k+1/2}) / gamma_k)`.

mod are;
mod inequality;

pub use are::{solve_are, AreState};
pub use inequality::{
    are_slack, assert_iteration_inequality, eg_slack, gp_slack, InequalityKind, INEQUALITY_TOL,
};

use log::warn;

use crate::error::{Error, Result};
use crate::merit::gap_unchecked;
use crate::problem::VIProblem;
use crate::projection::{extra_step, grad_step, FEASIBILITY_TOL};
use crate::trajectory::{IterateRecord, SolverConfig, SolverKind, Trajectory};
use crate::Vector;

/// Dispatches on the solver kind.
pub fn solve(kind: SolverKind, problem: &VIProblem, config: &SolverConfig, x0: &Vector) -> Result<Trajectory> {
    match kind {
        SolverKind::Gp => solve_gp(problem, config, x0),
        SolverKind::Eg => solve_eg(problem, config, x0),
        SolverKind::Are => solve_are(problem, config, x0),
    }
}

pub(crate) fn check_start(problem: &VIProblem, config: &SolverConfig, x0: &Vector) -> Result<()> {
    config.validate()?;
    if x0.len() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            got: x0.len(),
        });
    }
    problem.set().ensure_contains(x0, FEASIBILITY_TOL)
}

/// Iterates leaving `10 (||center|| + D)` indicate a broken oracle.
pub(crate) struct DivergenceGuard {
    bound: f64,
}

impl DivergenceGuard {
    pub(crate) fn new(problem: &VIProblem) -> Self {
        let set = problem.set();
        DivergenceGuard {
            bound: 10.0 * (set.center().norm() + set.diameter()).max(1e-300),
        }
    }

    pub(crate) fn check(&self, k: usize, x: &Vector, last_valid: &Vector) -> Result<()> {
        let norm = x.norm();
        if !norm.is_finite() || norm > self.bound {
            return Err(Error::Diverged {
                k,
                reason: format!("iterate norm {norm:e} exceeds bound {:e}", self.bound),
                last_valid: last_valid.iter().copied().collect(),
            });
        }
        Ok(())
    }
}

/// Wraps an oracle failure at iteration `k` with the last valid iterate.
pub(crate) fn at_iteration(k: usize, last_valid: &Vector) -> impl FnOnce(Error) -> Error + '_ {
    move |err| match err {
        Error::NonFinite { what } => Error::Diverged {
            k,
            reason: format!("non-finite {what}"),
            last_valid: last_valid.iter().copied().collect(),
        },
        other => other,
    }
}

pub(crate) fn wants_gap(config: &SolverConfig, k: usize) -> bool {
    k + 1 == config.max_iters || (config.record_gap_every > 0 && k.is_multiple_of(config.record_gap_every))
}

pub(crate) fn to_vec(x: &Vector) -> Vec<f64> {
    x.iter().copied().collect()
}

pub fn solve_gp(problem: &VIProblem, config: &SolverConfig, x0: &Vector) -> Result<Trajectory> {
    check_start(problem, config, x0)?;
    let t = config.step;
    let guard = DivergenceGuard::new(problem);
    let mut traj = Trajectory::new(problem.name(), SolverKind::Gp, t, 1, 0.0);
    let mut x = x0.clone();
    for k in 0..config.max_iters {
        let next = grad_step(problem, &x, t).map_err(at_iteration(k, &x))?;
        guard.check(k, &next, &x)?;
        let gap = if wants_gap(config, k) {
            Some(gap_unchecked(problem, &next).map_err(at_iteration(k, &x))?)
        } else {
            None
        };
        if config.check_inequalities {
            let fx = problem.eval(&x)?;
            for (i, sol) in problem.declared_solutions().iter().enumerate() {
                let slack = gp_slack(&x, &next, &fx, t, sol);
                if slack < -INEQUALITY_TOL {
                    warn!("gradient projection inequality violated at k={k} for solution #{i}: slack {slack:e}");
                }
            }
        }
        traj.push(IterateRecord {
            k,
            x: to_vec(&x),
            x_half: None,
            residual_sq: (&next - &x).norm_squared(),
            gap,
            gamma: None,
            inner_iters: None,
        });
        x = next;
    }
    traj.final_x = to_vec(&x);
    Ok(traj)
}

/// Step actually used by the extra-gradient method under `strict_step`.
pub fn effective_eg_step(problem: &VIProblem, config: &SolverConfig) -> f64 {
    match problem.lipschitz() {
        Some(l) if config.strict_step => {
            let bound = 1.0 / (std::f64::consts::SQRT_2 * l);
            if config.step > bound {
                warn!(
                    "extra-gradient step {} exceeds 1/(sqrt(2) L) = {bound}; clamping",
                    config.step
                );
                bound
            } else {
                config.step
            }
        }
        _ => config.step,
    }
}

pub fn solve_eg(problem: &VIProblem, config: &SolverConfig, x0: &Vector) -> Result<Trajectory> {
    check_start(problem, config, x0)?;
    let t = effective_eg_step(problem, config);
    let guard = DivergenceGuard::new(problem);
    let mut traj = Trajectory::new(problem.name(), SolverKind::Eg, t, 1, 0.0);
    let mut x = x0.clone();
    for k in 0..config.max_iters {
        let half = grad_step(problem, &x, t).map_err(at_iteration(k, &x))?;
        let next = extra_step(problem, &x, &half, t).map_err(at_iteration(k, &x))?;
        guard.check(k, &half, &x)?;
        guard.check(k, &next, &x)?;
        let gap = if wants_gap(config, k) {
            Some(gap_unchecked(problem, &half).map_err(at_iteration(k, &x))?)
        } else {
            None
        };
        if config.check_inequalities {
            let f_half = problem.eval(&half)?;
            for (i, sol) in problem.declared_solutions().iter().enumerate() {
                let slack = eg_slack(&x, &half, &next, &f_half, t, sol);
                if slack < -INEQUALITY_TOL {
                    warn!("extra-gradient inequality violated at k={k} for solution #{i}: slack {slack:e}");
                }
            }
        }
        traj.push(IterateRecord {
            k,
            x: to_vec(&x),
            x_half: Some(to_vec(&half)),
            residual_sq: (&half - &x).norm_squared(),
            gap,
            gamma: None,
            inner_iters: None,
        });
        x = next;
    }
    traj.final_x = to_vec(&x);
    Ok(traj)
}
