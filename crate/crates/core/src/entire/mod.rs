//! Real entire functions of minimal exponential type with real simple zeros,
//! represented by finite products `a0 * prod (1 - z/λ)`.
//!
//! Besides evaluation this module builds the explicit zero-perturbation
//! construction: given `B` and `delta`, every zero may be moved by at most
//! `rho_delta * exp(-delta|λ|)` and the resulting product `D` satisfies
//! `|B'(λ)| <= C_delta |D'(d_λ)|`. The auxiliary inequalities used along the
//! way (separation of zeros, the factor ratio bound, Cauchy estimates) are
//! exposed as checks returning [`BoundReport`]s.
//!
//! All zero sets are finite. For a truncated infinite family the reports
//! describe the truncation only.

mod checks;
mod growth;
mod perturbation;
mod product;
mod zeros;

use thiserror::Error;

pub use crate::report::BoundReport;
pub use checks::{
    cauchy_bound_check, interval_checks, ratio_bound_check, separation_check,
    separation_check_with_constants, CauchyReport, IntervalReport, RatioCheck,
};
pub use growth::{
    estimate_growth_constant, GrowthEstimate, DEFAULT_CIRCLE_SAMPLES, GROWTH_SAFETY_FACTOR,
};
pub use perturbation::{
    effective_delta, maximal_shifts, normalising_translation, perturb, perturbation_plan,
    random_shifts, Perturbation, PerturbationPlan, MAX_DELTA,
};
pub use product::{EntireProduct, SignedLog, Theta};
pub use zeros::{counting, Extent, Family, Signs, ZeroSet, ZeroSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EntireError {
    #[error("invalid zero set: {0}")]
    InvalidZeros(String),

    #[error("{0} is not a zero of the product")]
    NotAZero(f64),

    #[error("value at the origin must be finite and nonzero, got {0}")]
    InvalidA0(f64),

    #[error("delta must be positive and finite, got {0}")]
    InvalidDelta(f64),

    #[error("eps must lie in (0, 1/(2e)), got {0}")]
    InvalidEps(f64),

    #[error("shift {shift} at zero {lambda} exceeds the admissible radius {limit}")]
    InadmissibleShift { lambda: f64, shift: f64, limit: f64 },

    #[error("expected {expected} shifts, got {got}")]
    ShiftCount { expected: usize, got: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("growth estimate failed: {0}")]
    Growth(String),
}
