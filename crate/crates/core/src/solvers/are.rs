use serde::{Deserialize, Serialize};

use super::{at_iteration, check_start, to_vec, wants_gap, DivergenceGuard, INEQUALITY_TOL};
use crate::error::{Error, Result};
use crate::merit::gap_unchecked;
use crate::problem::{spectral_norm, VIProblem};
use crate::projection::{extra_step, grad_step};
use crate::trajectory::{IterateRecord, SolverConfig, SolverKind, Trajectory};
use crate::{Matrix, Vector};

/// Below this step length the half step is taken as the next iterate.
const STATIONARY_STEP: f64 = 1e-14;

/// Per-iteration state of an ARE run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreState {
    pub k: usize,
    pub x: Vec<f64>,
    pub x_half: Vec<f64>,
    pub gamma: f64,
    pub inner_iters: usize,
}

impl AreState {
    /// Extracts the states of an ARE trajectory; empty for other solvers.
    pub fn from_trajectory(traj: &Trajectory) -> Vec<AreState> {
        if traj.solver != SolverKind::Are {
            return Vec::new();
        }
        traj.iterates
            .iter()
            .filter_map(|r| {
                Some(AreState {
                    k: r.k,
                    x: r.x.clone(),
                    x_half: r.x_half.clone()?,
                    gamma: r.gamma?,
                    inner_iters: r.inner_iters.unwrap_or(0),
                })
            })
            .collect()
    }
}

/// ARE of order `config.order`.
///
/// Order 1 uses the constant model `F(x^k)` with `gamma = 1/t`, which
/// reproduces extra-gradient. Order 2 uses the first-order Taylor model with
/// the regularizer `L2 ||x - x^k|| (x - x^k)` and solves the subproblem by an
/// inner extra-gradient loop.
pub fn solve_are(problem: &VIProblem, config: &SolverConfig, x0: &Vector) -> Result<Trajectory> {
    check_start(problem, config, x0)?;
    match config.order {
        1 => solve_order_one(problem, config, x0),
        _ => solve_order_two(problem, config, x0),
    }
}

fn solve_order_one(problem: &VIProblem, config: &SolverConfig, x0: &Vector) -> Result<Trajectory> {
    let t = config.step;
    // ||F(x_h) - F(x^k)|| <= L ||x_h - x^k|| = (L t) gamma ||x_h - x^k||
    let tau = config.tau.max(problem.lipschitz_or_estimate(config.seed)? * t);
    let gamma = 1.0 / t;
    let guard = DivergenceGuard::new(problem);
    let mut traj = Trajectory::new(problem.name(), SolverKind::Are, t, 1, tau);
    let mut x = x0.clone();
    for k in 0..config.max_iters {
        let half = grad_step(problem, &x, t).map_err(at_iteration(k, &x))?;
        let next = extra_step(problem, &x, &half, t).map_err(at_iteration(k, &x))?;
        guard.check(k, &half, &x)?;
        guard.check(k, &next, &x)?;
        finish_iteration(problem, config, &mut traj, k, &x, &half, &next, gamma, 0)?;
        x = next;
    }
    traj.final_x = to_vec(&x);
    Ok(traj)
}

fn solve_order_two(problem: &VIProblem, config: &SolverConfig, x0: &Vector) -> Result<Trajectory> {
    let l2 = problem.lipschitz_p().ok_or_else(|| {
        Error::InvalidConfig(format!(
            "order 2 needs a Jacobian Lipschitz constant, which `{}` does not declare",
            problem.name()
        ))
    })?;
    if !problem.has_jacobian() {
        return Err(Error::InvalidConfig(format!(
            "order 2 needs a Jacobian, which `{}` does not provide",
            problem.name()
        )));
    }
    // the Taylor model is exact for affine operators
    let implied_tau = if problem.is_affine() { 0.0 } else { 0.5 };
    let tau = config.tau.max(implied_tau);
    let diameter = problem.set().diameter();
    let guard = DivergenceGuard::new(problem);
    let mut traj = Trajectory::new(problem.name(), SolverKind::Are, config.step, 2, tau);
    let mut x = x0.clone();
    for k in 0..config.max_iters {
        let fx = problem.eval(&x).map_err(at_iteration(k, &x))?;
        let jac = problem.jacobian(&x).expect("jacobian presence checked above");
        let (half, inner_iters) = solve_subproblem(problem, config, k, &x, &fx, &jac, l2, diameter)?;
        let d_norm = (&half - &x).norm();
        let (gamma, next) = if d_norm <= STATIONARY_STEP * (1.0 + x.norm()) {
            (0.0, half.clone())
        } else {
            let gamma = l2 * d_norm;
            let f_half = problem.eval(&half).map_err(at_iteration(k, &x))?;
            let next = problem
                .set()
                .project(&(&x - f_half / gamma))
                .map_err(at_iteration(k, &x))?;
            (gamma, next)
        };
        guard.check(k, &half, &x)?;
        guard.check(k, &next, &x)?;
        finish_iteration(problem, config, &mut traj, k, &x, &half, &next, gamma, inner_iters)?;
        x = next;
    }
    traj.final_x = to_vec(&x);
    Ok(traj)
}

/// Inner extra-gradient on `G(z) = F(x^k) + J (z - x^k) + L2 ||z - x^k|| (z - x^k)`.
///
/// Stops once `||M_G(z; s) - z|| / s <= inner_tol` and returns `M_G(z; s)`.
#[allow(clippy::too_many_arguments)]
fn solve_subproblem(
    problem: &VIProblem,
    config: &SolverConfig,
    k: usize,
    xk: &Vector,
    fk: &Vector,
    jac: &Matrix,
    l2: f64,
    diameter: f64,
) -> Result<(Vector, usize)> {
    let model = |z: &Vector| -> Vector {
        let d = z - xk;
        let scale = l2 * d.norm();
        fk + jac * &d + d * scale
    };
    // the regularizer's Jacobian has norm at most 2 L2 ||d|| <= 2 L2 D
    let lip = (spectral_norm(jac) + 3.0 * l2 * diameter).max(f64::MIN_POSITIVE);
    let s = 1.0 / (std::f64::consts::SQRT_2 * lip);
    let set = problem.set();
    let mut z = xk.clone();
    let mut residual = f64::INFINITY;
    for i in 0..config.inner_max_iters {
        let h = set.project(&(&z - model(&z) * s)).map_err(at_iteration(k, xk))?;
        residual = (&h - &z).norm() / s;
        if residual <= config.inner_tol {
            return Ok((h, i + 1));
        }
        z = set.project(&(&z - model(&h) * s)).map_err(at_iteration(k, xk))?;
    }
    Err(Error::InnerSolver {
        k,
        iters: config.inner_max_iters,
        residual,
        tolerance: config.inner_tol,
    })
}

#[allow(clippy::too_many_arguments)]
fn finish_iteration(
    problem: &VIProblem,
    config: &SolverConfig,
    traj: &mut Trajectory,
    k: usize,
    x: &Vector,
    half: &Vector,
    next: &Vector,
    gamma: f64,
    inner_iters: usize,
) -> Result<()> {
    let gap = if wants_gap(config, k) {
        Some(gap_unchecked(problem, half).map_err(at_iteration(k, x))?)
    } else {
        None
    };
    if config.check_inequalities {
        let f_half = problem.eval(half)?;
        for (i, sol) in problem.declared_solutions().iter().enumerate() {
            let slack = super::are_slack(x, half, next, &f_half, gamma, traj.tau, sol);
            if slack < -INEQUALITY_TOL {
                log::warn!("ARE inequality violated at k={k} for solution #{i}: slack {slack:e}");
            }
        }
    }
    traj.push(IterateRecord {
        k,
        x: to_vec(x),
        x_half: Some(to_vec(half)),
        residual_sq: (half - x).norm_squared(),
        gap,
        gamma: Some(gamma),
        inner_iters: (traj.order == 2).then_some(inner_iters),
    });
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Operator;
    use crate::set::FeasibleSet;
    use crate::solvers::solve_eg;
    use nalgebra::{dmatrix, dvector};

    fn rotation() -> VIProblem {
        VIProblem::new(
            "rot",
            Operator::linear(dmatrix![0.0, 1.0; -1.0, 0.0]).unwrap(),
            FeasibleSet::unit_ball(2, 1.0).unwrap(),
        )
        .unwrap()
        .with_lipschitz(1.0)
        .unwrap()
    }

    #[test]
    fn order_one_matches_extra_gradient() {
        let p = rotation();
        let c = SolverConfig::new(0.5, 200);
        let x0 = dvector![0.6, -0.3];
        let are = solve_are(&p, &c, &x0).unwrap();
        let eg = solve_eg(&p, &c, &x0).unwrap();
        for k in 0..200 {
            assert!((are.x(k) - eg.x(k)).norm() <= 1e-12);
        }
        assert!((are.tau - 0.5).abs() < 1e-15);
        assert!(are.iterates.iter().all(|r| r.gamma == Some(2.0)));
    }

    #[test]
    fn order_two_without_constant_is_rejected() {
        let c = SolverConfig::new(0.5, 10).with_order(2);
        assert!(matches!(
            solve_are(&rotation(), &c, &dvector![0.1, 0.1]),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn order_two_converges_on_affine_rotation() {
        let p = rotation().with_lipschitz_p(0.5).unwrap();
        let c = SolverConfig::new(0.5, 60).with_order(2);
        let traj = solve_are(&p, &c, &dvector![0.5, 0.5]).unwrap();
        assert_eq!(traj.tau, 0.0);
        assert!(traj.final_x().norm() < traj.x(0).norm());
        assert!(traj.min_residual_sq() < 1e-2);
        let states = AreState::from_trajectory(&traj);
        assert_eq!(states.len(), 60);
        for s in &states {
            let d = (Vector::from_column_slice(&s.x_half) - Vector::from_column_slice(&s.x)).norm();
            assert!(s.gamma == 0.0 || (s.gamma - 0.5 * d).abs() <= 1e-12);
            assert!(s.inner_iters >= 1);
        }
    }

    #[test]
    fn order_two_subproblem_solution_satisfies_model_vi() {
        // the half step must solve the model VI up to the inner tolerance
        let p = rotation().with_lipschitz_p(1.0).unwrap();
        let c = SolverConfig::new(0.5, 5).with_order(2);
        let traj = solve_are(&p, &c, &dvector![0.8, 0.1]).unwrap();
        let q = dmatrix![0.0, 1.0; -1.0, 0.0];
        for k in 0..5 {
            let (x, h) = (traj.x(k), traj.half(k).unwrap());
            let d = &h - &x;
            let g = &q * &x + &q * &d + &d * d.norm();
            let (_, min) = p.set().linear_minimize(&g).unwrap();
            assert!(g.dot(&h) - min <= 1e-8, "k={k}");
        }
    }
}
