//! Domain types shared by every solver: the task family `T_{n,m}`, scenario
//! enumeration, success metrics, behaviors, quantum models and operational
//! equivalences.

mod behavior;
mod equivalence;
pub mod fixtures;
mod label;
mod matrix;
mod metric;
mod model;
mod task;

pub use behavior::Behavior;
pub use equivalence::{check_equivalence, EffectRef, OperationalEquivalence};
pub use label::Subset;
pub use matrix::HermitianMatrix;
pub use metric::{canonical_metric, signed_metric_t41, MetricKey, SuccessMetric};
pub use model::{behavior_of, QuantumModel};
pub use task::{enumerate_scenarios, ScenarioRow, TaskLabels, TaskSpec};

/// Default tolerance for behavior normalization checks.
pub const BEHAVIOR_NORM_TOL: f64 = 1e-9;
/// Default eigenvalue/entrywise tolerance for quantum-model validation.
pub const MODEL_TOL: f64 = 1e-8;
/// Default tolerance on Hermiticity deviations accepted at construction.
pub const HERMITICITY_TOL: f64 = 1e-8;
/// Default tolerance for convex-weight normalization in equivalences.
pub const WEIGHT_TOL: f64 = 1e-12;
/// Largest imaginary part tolerated when converting traces to probabilities.
pub const IMAG_TOL: f64 = 1e-10;
