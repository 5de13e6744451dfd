//! Normalization: stepwise Poincaré–Dulac, the Newton doubling step, the
//! family driver and the estimate diagnostics.

pub mod driver;
pub mod estimates;
pub mod newton;
pub mod poincare_dulac;

pub use driver::{normalize_family, Mode, NormalizeOptions, NormalizeReport, Normalized};
pub use estimates::{estimate_diagnostics, EstimateConstants, EstimateDiagnostics};
pub use newton::{newton_step, NewtonState, StepReport};
pub use poincare_dulac::{diagonalize_linear_part, poincare_dulac_normalize, Gauge, PoincareDulac};
