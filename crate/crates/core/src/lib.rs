//! Variational inequality toolkit: feasible sets with exact oracles,
//! projection-type solvers, merit functions, condition checkers, two-player
//! games and an experiment harness.

pub mod conditions;
pub mod error;
pub mod games;
pub mod harness;
pub mod merit;
pub mod problem;
pub mod problems;
pub mod projection;
pub mod set;
pub mod solvers;
pub mod trajectory;

pub type Vector = nalgebra::DVector<f64>;
pub type Matrix = nalgebra::DMatrix<f64>;

pub use error::{Error, Result};
pub use problem::{Operator, VIProblem};
pub use set::FeasibleSet;
pub use trajectory::{IterateRecord, SolverConfig, SolverKind, Trajectory};
pub use games::{classify_equilibrium, game_to_vi, EquilibriumReport, TwoPlayerGame};
pub use harness::{fit_rate, run_experiment, ExperimentConfig, RateFit, RateMetric};
