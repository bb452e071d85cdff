//! Trust-based decision engine for information sharing.
//!
//! A producer considers sending a message, possibly degraded, to consumers in
//! a communication graph. For each consumer the engine derives the message
//! the consumer ends up receiving ([`propagation`]), the inferences the
//! consumer may draw and the benefit and risk those inferences cause the
//! producer ([`impact`]), and decides whether sharing pays off. A continuous
//! counterpart works with densities on `[0, 1]` ([`continuous`]), and a
//! seeded sampler cross-checks the analytic results ([`montecarlo`]).
//!
//! The discrete pipeline is generic over [`Scalar`]; the aliases below fix
//! the common instantiations.

pub mod continuous;
pub mod error;
pub mod fixtures;
pub mod format;
pub mod impact;
pub mod matrix;
pub mod montecarlo;
pub mod propagation;
pub mod scalar;
pub mod scenario;

pub use error::{Error, Result};
pub use impact::{
    balance_q2, binary_threshold, evaluate, evaluate_default, expected_impact, impact_distribution, sweep,
    Balance, BinaryCase, DecisionReport, Threshold, Verdict,
};
pub use matrix::{is_column_stochastic, Matrix};
pub use propagation::{
    combine_parallel, combine_serial, disclose, effective_disclosure, message_distribution, Hop, Operators,
    ParallelKind, ParallelOp, SerialKind, SerialOp,
};
pub use scalar::{Exact, Scalar};
pub use scenario::{validate_scenario, AgentId, Scenario, ValidationReport};

/// Scenario with `f64` numbers, as loaded from JSON.
pub type Scenario64 = Scenario<f64>;
/// Scenario with exact rational numbers.
pub type ExactScenario = Scenario<Exact>;
pub type Matrix64 = Matrix<f64>;
pub type ExactMatrix = Matrix<Exact>;
pub type DecisionReport64 = DecisionReport<f64>;
pub type ExactDecisionReport = DecisionReport<Exact>;
pub type GridDensity64 = continuous::GridDensity<f64>;
pub type DensityFamily64 = continuous::ConditionalDensityFamily<f64>;
