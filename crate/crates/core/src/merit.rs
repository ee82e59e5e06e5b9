//! Merit functions: the gap `G`, a sampled lower bound on the dual gap `H`,
//! and the projection residual `P`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::VIProblem;
use crate::projection::{grad_step, FEASIBILITY_TOL};
use crate::Vector;

/// Negative gap values of at most this magnitude are rounding noise and clamp to 0.
pub const GAP_CLAMP: f64 = 1e-12;

/// Dimensions up to this use a deterministic grid for the dual gap.
pub const GRID_MAX_DIM: usize = 3;

/// `G(x) = max_y <F(x), x - y>`, computed exactly with the linear
/// minimization oracle.
pub fn gap(problem: &VIProblem, x: &Vector) -> Result<f64> {
    problem.set().ensure_contains(x, FEASIBILITY_TOL)?;
    gap_unchecked(problem, x)
}

pub(crate) fn gap_unchecked(problem: &VIProblem, x: &Vector) -> Result<f64> {
    let fx = problem.eval(x)?;
    let (_, min) = problem.set().linear_minimize(&fx)?;
    let g = fx.dot(x) - min;
    Ok(if (-GAP_CLAMP..0.0).contains(&g) { 0.0 } else { g })
}

/// Lower bound on `H(x) = max_y <F(y), x - y>` over `{x}` and a probe set:
/// a grid of about `samples` points for dimension at most 3, seeded uniform
/// samples otherwise.
pub fn dual_gap_estimate(problem: &VIProblem, x: &Vector, samples: usize, seed: u64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::InvalidConfig("dual gap estimate needs at least one sample".into()));
    }
    problem.set().ensure_contains(x, FEASIBILITY_TOL)?;
    let points = probe_points(problem, samples, seed);
    dual_gap_over(problem, x, &points)
}

/// Maximum of `<F(y), x - y>` over `{x} ∪ points`.
pub fn dual_gap_over(problem: &VIProblem, x: &Vector, points: &[Vector]) -> Result<f64> {
    let mut best = 0.0f64;
    for y in points {
        let fy = problem.eval(y)?;
        best = best.max(fy.dot(&(x - y)));
    }
    Ok(best)
}

/// Grid (dimension <= 3) or seeded uniform sample of the feasible set.
pub fn probe_points(problem: &VIProblem, samples: usize, seed: u64) -> Vec<Vector> {
    let set = problem.set();
    if set.dim() <= GRID_MAX_DIM {
        set.grid(samples)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..samples).map(|_| set.sample(&mut rng)).collect()
    }
}

/// `P(x) = ||M(x; t) - x||^2`.
pub fn proj_residual(problem: &VIProblem, x: &Vector, t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidConfig(format!("step must be positive, got {t}")));
    }
    problem.set().ensure_contains(x, FEASIBILITY_TOL)?;
    Ok((grad_step(problem, x, t)? - x).norm_squared())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeritReport {
    pub gap: f64,
    pub dual_gap_estimate: f64,
    pub sample_count: usize,
    pub proj_residual: f64,
    pub step: f64,
    pub epsilon: f64,
    pub epsilon_vi: bool,
    /// Only a necessary condition: the dual gap is a sampled lower bound.
    pub epsilon_minty: bool,
    pub epsilon_minty_kind: String,
    /// Distance to the nearest declared solution, if any are declared.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_to_solution: Option<f64>,
}

pub fn merit_report(
    problem: &VIProblem,
    x: &Vector,
    t: f64,
    epsilon: f64,
    samples: usize,
    seed: u64,
) -> Result<MeritReport> {
    let g = gap(problem, x)?;
    let h = dual_gap_estimate(problem, x, samples, seed)?;
    let p = proj_residual(problem, x, t)?;
    let distance_to_solution = problem
        .declared_solutions()
        .iter()
        .map(|s| (s - x).norm())
        .reduce(f64::min);
    Ok(MeritReport {
        gap: g,
        dual_gap_estimate: h,
        sample_count: probe_points(problem, samples, seed).len(),
        proj_residual: p,
        step: t,
        epsilon,
        epsilon_vi: g <= epsilon,
        epsilon_minty: h <= epsilon,
        epsilon_minty_kind: "estimate".into(),
        distance_to_solution,
    })
}

impl MeritReport {
    /// Fixed-column two-field table.
    pub fn to_table(&self) -> String {
        let mut rows = vec![
            ("gap G(x)".to_string(), format!("{:.6e}", self.gap)),
            (
                "dual gap H(x) (estimate)".to_string(),
                format!("{:.6e}", self.dual_gap_estimate),
            ),
            ("samples".to_string(), self.sample_count.to_string()),
            (format!("residual P(x) (t={})", self.step), format!("{:.6e}", self.proj_residual)),
            (format!("eps-VI (eps={:e})", self.epsilon), self.epsilon_vi.to_string()),
            (
                format!("eps-Minty (eps={:e})", self.epsilon),
                format!("{} ({})", self.epsilon_minty, self.epsilon_minty_kind),
            ),
        ];
        if let Some(d) = self.distance_to_solution {
            rows.push(("distance to solution".into(), format!("{d:.6e}")));
        }
        rows.iter()
            .map(|(k, v)| format!("{k:<32}{v:>24}\n"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Operator;
    use crate::set::FeasibleSet;
    use nalgebra::{dmatrix, dvector};

    fn neg_identity() -> VIProblem {
        VIProblem::new(
            "neg",
            Operator::linear(dmatrix![-1.0]).unwrap(),
            FeasibleSet::cube(1, -1.0, 1.0).unwrap(),
        )
        .unwrap()
    }

    fn rotation() -> VIProblem {
        VIProblem::new(
            "rot",
            Operator::linear(dmatrix![0.0, 1.0; -1.0, 0.0]).unwrap(),
            FeasibleSet::unit_ball(2, 1.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn gap_examples() {
        let p = neg_identity();
        assert_eq!(gap(&p, &dvector![1.0]).unwrap(), 0.0);
        // grid maximization of -0.5 (0.5 - y) over y in [-1, 1]
        let oracle = (0..=2000)
            .map(|i| -1.0 + i as f64 * 1e-3)
            .map(|y| -0.5 * (0.5 - y))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((oracle - 0.25).abs() < 1e-12);
        assert!((gap(&p, &dvector![0.5]).unwrap() - oracle).abs() < 1e-12);
        assert_eq!(gap(&rotation(), &dvector![0.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(gap(&p, &dvector![2.0]), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn dual_gap_examples() {
        let p = neg_identity();
        // analytic max of y^2 over [-1, 1]
        let h = dual_gap_estimate(&p, &dvector![0.0], 2001, 0).unwrap();
        assert!((h - 1.0).abs() < 1e-3);
        assert_eq!(dual_gap_over(&p, &dvector![0.3], &[]).unwrap(), 0.0);
        assert_eq!(dual_gap_over(&p, &dvector![0.3], &[dvector![0.3]]).unwrap(), 0.0);
        let h = dual_gap_estimate(&rotation(), &dvector![0.0, 0.0], 10_000, 0).unwrap();
        assert!(h.abs() < 1e-12);
        assert!(dual_gap_estimate(&p, &dvector![0.0], 0, 0).is_err());
    }

    #[test]
    fn residual_examples() {
        let p = neg_identity();
        assert_eq!(proj_residual(&p, &dvector![1.0], 0.5).unwrap(), 0.0);
        assert!((proj_residual(&p, &dvector![0.5], 0.5).unwrap() - 0.0625).abs() < 1e-16);
        let r = proj_residual(&rotation(), &dvector![0.1, 0.0], 0.5).unwrap();
        assert!((r - 0.0025).abs() < 1e-16);
    }

    #[test]
    fn report_flags_estimate() {
        let p = neg_identity()
            .with_declared_solutions(vec![dvector![-1.0], dvector![0.0], dvector![1.0]])
            .unwrap();
        let r = merit_report(&p, &dvector![0.0], 0.5, 1e-6, 2001, 0).unwrap();
        assert!(r.epsilon_vi);
        assert!(!r.epsilon_minty);
        assert_eq!(r.epsilon_minty_kind, "estimate");
        assert_eq!(r.distance_to_solution, Some(0.0));
        assert!(r.to_table().contains("estimate"));
    }
}
