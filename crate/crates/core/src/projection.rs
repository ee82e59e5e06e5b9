//! Gradient projection mapping `M(x; t) = Proj(x - t F(x))` and the
//! extra-gradient projection mapping `M+(x; t) = Proj(x - t F(M(x; t)))`.

use crate::error::{Error, Result};
use crate::problem::VIProblem;
use crate::Vector;

/// Inputs farther than this from the set are rejected.
pub const FEASIBILITY_TOL: f64 = 1e-9;

fn check_args(problem: &VIProblem, x: &Vector, t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidConfig(format!("step must be positive, got {t}")));
    }
    problem.set().ensure_contains(x, FEASIBILITY_TOL)
}

pub fn grad_proj_map(problem: &VIProblem, x: &Vector, t: f64) -> Result<Vector> {
    check_args(problem, x, t)?;
    grad_step(problem, x, t)
}

pub fn extra_grad_proj_map(problem: &VIProblem, x: &Vector, t: f64) -> Result<Vector> {
    check_args(problem, x, t)?;
    let m = grad_step(problem, x, t)?;
    extra_step(problem, x, &m, t)
}

/// Both mappings at once: `(M(x; t), M+(x; t))`.
pub fn proj_maps(problem: &VIProblem, x: &Vector, t: f64) -> Result<(Vector, Vector)> {
    check_args(problem, x, t)?;
    let m = grad_step(problem, x, t)?;
    let plus = extra_step(problem, x, &m, t)?;
    Ok((m, plus))
}

pub(crate) fn grad_step(problem: &VIProblem, x: &Vector, t: f64) -> Result<Vector> {
    let fx = problem.eval(x)?;
    problem.set().project(&(x - fx * t))
}

/// `Proj(x - t F(m))` for a precomputed `m = M(x; t)`.
pub(crate) fn extra_step(problem: &VIProblem, x: &Vector, m: &Vector, t: f64) -> Result<Vector> {
    let fm = problem.eval(m)?;
    problem.set().project(&(x - fm * t))
}
