//! Bayesian sequential test for the sign of a Brownian drift in which the
//! initial decision may later be revised at a fixed cost per change.
//!
//! The optimal rule waits until the posterior mean `M_t` leaves `(-A, A)`,
//! decides `sgn M`, and afterwards reverses the decision each time `M_t`
//! crosses `∓B`. This crate solves for `(A, B)`, evaluates the associated
//! value functions in closed form, simulates observation paths and
//! estimates the risk of threshold rules by Monte Carlo.

pub mod decision;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod output;
pub mod rng;
mod roots;
pub mod simulation;
pub mod thresholds;
pub mod value;
pub mod verify;

pub use decision::{realized_penalty, run_rule, DecisionTrajectory, PenaltyBreakdown, ThresholdRule};
pub use error::{Error, Result};
pub use model::{center_two_drift_problem, initial_belief, posterior_mean, Belief, Parameters, Sign};
pub use montecarlo::{estimate_risk, optimality_sweep, Estimator, RiskEstimate, SweepResult};
pub use roots::{bracketed_root, Root};
pub use simulation::{compare_schemes, simulate_path, PathSample, Scheme, SimConfig};
pub use thresholds::{compute_k, equation_lhs_b, solve_a, solve_b, Thresholds};
pub use value::{SwitchingCost, ValueContext, ValueFn};
pub use verify::{verify_properties, PropertyId, PropertyReport};
