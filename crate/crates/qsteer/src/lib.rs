//! Simulator for active feedback steering of an N-qubit register.
//!
//! The protocol couples adjacent register qubits weakly to a pair of
//! detector qubits, measures the detector pair in the Bell basis, and
//! uses the measurement back-action to drag the register toward a target
//! state. Steering operators are chosen greedily each cycle by the
//! expected change of a weighted cost function built from reduced
//! density matrices of every subset size.
//!
//! Module map:
//!
//! * [`state`] — dense state vectors, target construction, partial traces.
//! * [`bloch`] — Pauli-string (Bloch) tensors and their exact per-pair updates.
//! * [`dynamics`] — steering configurations, measurement operators, the
//!   stochastic step conditioned on a Bell outcome.
//! * [`cost`] — cost functions, expected cost gains, weak values, and the
//!   closed forms used to cross-check them.
//! * [`engine`] — pair scheduling, greedy config selection, trajectories
//!   and deterministic parallel ensembles.
//! * [`oracle`] — slow exact reference implementations (joint
//!   system+detector evolution, exhaustive outcome enumeration, the
//!   shared-detector no-go model) used to validate the fast paths.
//! * [`stats`] — convergence-time histograms and ensemble-averaged curves.
//!
//! Determinism: every stochastic routine takes a counter-based RNG stream
//! derived from `(seed, trajectory index)`, so ensembles reproduce
//! bit-for-bit regardless of thread count.

pub mod bloch;
pub mod checks;
pub mod cost;
pub mod dynamics;
pub mod engine;
pub mod oracle;
pub mod pauli;
pub mod state;
pub mod stats;

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum SteerError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("outcome probability {0} is negative beyond tolerance; reduce the time step")]
    NegativeProbability(f64),
    #[error("cannot condition on an outcome of vanishing probability")]
    ZeroProbabilityBranch,
    #[error("states are orthogonal; weak values are undefined")]
    OrthogonalTarget,
    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, SteerError>;

pub use bloch::BlochTensor;
pub use cost::CostWeights;
pub use dynamics::{MeasurementOutcome, PairConfig, SteeringConfig};
pub use engine::{
    run_ensemble, run_trajectory, ProtocolParams, RecordLevel, Scheduler, SteeringSet,
    TrajectoryRecord,
};
pub use stats::{averaged_curves, histogram, summarize, AveragedCurves, SummaryStats};
pub use pauli::{Axis, Sign};
pub use state::{StateVector, TargetSpec};
