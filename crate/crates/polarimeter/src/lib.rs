//! Ellipsometer forward model and Mueller-matrix estimation.
//!
//! A measurement plan holds the per-capture rotation angles of the
//! polarization generator and analyzer. The detected intensity for a
//! sample `M` is linear in the 16 matrix entries, so a plan induces a
//! K×16 design matrix whose rank determines which components of `M`
//! are observable. Estimation solves the least-squares problem with a
//! rank-revealing SVD, returning the minimum-norm solution when the
//! design is rank deficient.

mod design;
mod forward;
mod plan;

pub use design::{estimate_mueller, DesignMatrix, PlanDiagnostics};
pub use forward::{analyzer_matrix, generator_matrix, intensity};
pub use plan::{CaptureConfig, ConditionTag, MeasurementPlan, PlanError};
