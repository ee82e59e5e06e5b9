//! Solver configuration and the iterate record emitted by every solver.

use std::fmt;
use std::io::Write;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolverKind {
    /// Gradient projection `x+ = M(x; t)`.
    #[serde(rename = "GP")]
    Gp,
    /// Extra-gradient `x+ = M+(x; t)`.
    #[serde(rename = "EG")]
    Eg,
    /// Approximation-based regularized extra-gradient of order 1 or 2.
    #[serde(rename = "ARE")]
    Are,
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::Gp => "GP",
            SolverKind::Eg => "EG",
            SolverKind::Are => "ARE",
        })
    }
}

impl std::str::FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gp" => Ok(SolverKind::Gp),
            "eg" => Ok(SolverKind::Eg),
            "are" => Ok(SolverKind::Are),
            other => Err(Error::InvalidConfig(format!("unknown solver `{other}` (expected gp, eg or are)"))),
        }
    }
}

fn default_step() -> f64 {
    0.5
}
fn default_max_iters() -> usize {
    1000
}
fn default_order() -> u32 {
    1
}
fn default_delta() -> f64 {
    1.0
}
fn default_inner_tol() -> f64 {
    1e-10
}
fn default_inner_max_iters() -> usize {
    200_000
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Step size `t`. For ARE of order 1 the regularization constant is `1/t`.
    #[serde(default = "default_step")]
    pub step: f64,
    /// Number of iterations `N`.
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    /// ARE order `p`, 1 or 2.
    #[serde(default = "default_order")]
    pub order: u32,
    /// Declared approximation quality. The ARE solver records
    /// `max(tau, tau implied by its operator model)`.
    #[serde(default)]
    pub tau: f64,
    /// Condition parameter used by the GP-family checks.
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Inner tolerance on `||M(x; t_in) - x||` for the order-2 subproblem.
    #[serde(default = "default_inner_tol")]
    pub inner_tol: f64,
    #[serde(default = "default_inner_max_iters")]
    pub inner_max_iters: usize,
    /// Record `G` at the test point every this many iterations; 0 records it
    /// only for the last iteration.
    #[serde(default)]
    pub record_gap_every: usize,
    /// Clamp the extra-gradient step to `1/(sqrt(2) L)` when `L` is declared.
    #[serde(default = "default_true")]
    pub strict_step: bool,
    /// Evaluate the per-iteration descent inequality while solving and log
    /// violations.
    #[serde(default)]
    pub check_inequalities: bool,
    /// Seed for Lipschitz estimation when the problem declares none.
    #[serde(default)]
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            step: default_step(),
            max_iters: default_max_iters(),
            order: default_order(),
            tau: 0.0,
            delta: default_delta(),
            inner_tol: default_inner_tol(),
            inner_max_iters: default_inner_max_iters(),
            record_gap_every: 0,
            strict_step: true,
            check_inequalities: false,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn new(step: f64, max_iters: usize) -> Self {
        SolverConfig {
            step,
            max_iters,
            ..Default::default()
        }
    }

    pub fn with_order(mut self, order: u32) -> Self {
        self.order = order;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidConfig(format!("step must be positive, got {}", self.step)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be positive".into()));
        }
        if self.order != 1 && self.order != 2 {
            return Err(Error::InvalidConfig(format!("order must be 1 or 2, got {}", self.order)));
        }
        if !(0.0..1.0).contains(&self.tau) {
            return Err(Error::InvalidConfig(format!("tau must lie in [0, 1), got {}", self.tau)));
        }
        if self.delta.is_nan() || self.delta <= 0.0 {
            return Err(Error::InvalidConfig(format!("delta must be positive, got {}", self.delta)));
        }
        if self.inner_tol.is_nan() || self.inner_tol <= 0.0 || self.inner_max_iters == 0 {
            return Err(Error::InvalidConfig("inner tolerance and iteration budget must be positive".into()));
        }
        Ok(())
    }
}

/// One iteration `k`: the iterate, the half step, and the squared residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateRecord {
    pub k: usize,
    pub x: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_half: Option<Vec<f64>>,
    /// `||x^{k+1/2} - x^k||^2` (EG, ARE) or `||x^{k+1} - x^k||^2` (GP).
    pub residual_sq: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    /// ARE regularization weight `gamma_k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_iters: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub problem_name: String,
    pub solver: SolverKind,
    pub step: f64,
    pub order: u32,
    /// Approximation quality used by the ARE descent inequality (0 for GP/EG).
    pub tau: f64,
    pub iterates: Vec<IterateRecord>,
    /// `x^N`, the iterate after the last recorded step.
    pub final_x: Vec<f64>,
    /// Index of the smallest residual, smallest index on ties.
    pub k_n: usize,
}

impl Trajectory {
    pub(crate) fn new(problem_name: &str, solver: SolverKind, step: f64, order: u32, tau: f64) -> Self {
        Trajectory {
            problem_name: problem_name.to_string(),
            solver,
            step,
            order,
            tau,
            iterates: Vec::new(),
            final_x: Vec::new(),
            k_n: 0,
        }
    }

    pub(crate) fn push(&mut self, record: IterateRecord) {
        if self.iterates.is_empty() || record.residual_sq < self.iterates[self.k_n].residual_sq {
            self.k_n = self.iterates.len();
        }
        self.iterates.push(record);
    }

    pub fn len(&self) -> usize {
        self.iterates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterates.is_empty()
    }

    /// `x^k`.
    pub fn x(&self, k: usize) -> Vector {
        DVector::from_column_slice(&self.iterates[k].x)
    }

    /// `x^{k+1}`.
    pub fn next_x(&self, k: usize) -> Vector {
        match self.iterates.get(k + 1) {
            Some(r) => DVector::from_column_slice(&r.x),
            None => DVector::from_column_slice(&self.final_x),
        }
    }

    /// `x^{k+1/2}` when the solver has a half step.
    pub fn half(&self, k: usize) -> Option<Vector> {
        self.iterates[k].x_half.as_deref().map(DVector::from_column_slice)
    }

    /// Point at which the gap is measured for iteration `k`: the half step for
    /// EG/ARE and `x^{k+1} = M(x^k; t)` for gradient projection.
    pub fn test_point(&self, k: usize) -> Vector {
        self.half(k).unwrap_or_else(|| self.next_x(k))
    }

    pub fn final_x(&self) -> Vector {
        DVector::from_column_slice(&self.final_x)
    }

    /// `(k_N, min residual)` over the first `n` iterations.
    pub fn argmin_residual(&self, n: usize) -> Option<(usize, f64)> {
        let n = n.min(self.iterates.len());
        let mut best: Option<(usize, f64)> = None;
        for (k, r) in self.iterates[..n].iter().enumerate() {
            if best.is_none_or(|(_, v)| r.residual_sq < v) {
                best = Some((k, r.residual_sq));
            }
        }
        best
    }

    pub fn min_residual_sq(&self) -> f64 {
        self.iterates.get(self.k_n).map_or(f64::NAN, |r| r.residual_sq)
    }

    /// One JSON object per iterate, newline separated.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for record in &self.iterates {
            serde_json::to_writer(&mut out, record)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(k: usize, residual_sq: f64) -> IterateRecord {
        IterateRecord {
            k,
            x: vec![k as f64],
            x_half: None,
            residual_sq,
            gap: None,
            gamma: None,
            inner_iters: None,
        }
    }

    #[test]
    fn k_n_breaks_ties_by_smallest_index() {
        let mut t = Trajectory::new("p", SolverKind::Gp, 0.5, 1, 0.0);
        for (k, r) in [3.0, 1.0, 2.0, 1.0, 0.0, 0.0].into_iter().enumerate() {
            t.push(record(k, r));
        }
        assert_eq!(t.k_n, 4);
        assert_eq!(t.argmin_residual(4), Some((1, 1.0)));
        assert_eq!(t.argmin_residual(100), Some((4, 0.0)));
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        assert!(SolverConfig::new(0.0, 10).validate().is_err());
        assert!(SolverConfig::new(0.5, 0).validate().is_err());
        assert!(SolverConfig::new(0.5, 10).with_order(3).validate().is_err());
        let c = SolverConfig {
            tau: 1.0,
            ..SolverConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn config_defaults_from_json() {
        let c: SolverConfig = serde_json::from_str(r#"{"step": 0.25, "max_iters": 7}"#).unwrap();
        assert_eq!(c.step, 0.25);
        assert_eq!(c.max_iters, 7);
        assert_eq!(c.order, 1);
        assert!(c.strict_step);
    }

    #[test]
    fn solver_kind_parsing() {
        assert_eq!("EG".parse::<SolverKind>().unwrap(), SolverKind::Eg);
        assert!("newton".parse::<SolverKind>().is_err());
        assert_eq!(serde_json::to_string(&SolverKind::Are).unwrap(), "\"ARE\"");
    }
}
