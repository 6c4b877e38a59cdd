//! Shared numerical kernel.
//!
//! Adaptive Gauss–Kronrod quadrature that never samples panel endpoints (so
//! integrands that are only defined by continuity at the ends, such as
//! `exp(-1/(1-t^2))`, are safe), an adaptively refined grid supremum, central
//! differences and compensated summation.

mod quadrature;
mod sum;
mod sup;

use thiserror::Error;

pub use quadrature::{
    default_budget, integrate_bump, integrate_bump_with, integrate_many, ManyQuadrature,
    QuadratureResult, DEFAULT_BUDGET,
};
pub use sum::NeumaierSum;
pub use sup::{grid_sup, GridSupResult, GRID_SUP_INITIAL_POINTS, GRID_SUP_MAX_LEVELS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("invalid integration interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },

    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),

    #[error("integrand returned non-finite value {value} at {at}")]
    NonFinite { at: f64, value: f64 },

    #[error(
        "evaluation budget of {budget} exhausted after {evaluations} calls \
         (best estimate {value} with error {error_estimate})"
    )]
    BudgetExhausted {
        budget: usize,
        evaluations: usize,
        value: f64,
        error_estimate: f64,
    },

    #[error("empty interval: lo = {lo} > hi = {hi}")]
    EmptyInterval { lo: f64, hi: f64 },
}

/// Symmetric difference quotient `(f(x+h) - f(x-h)) / 2h`.
pub fn central_diff<F>(f: F, x: f64, h: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    debug_assert!(h > 0.0);
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// One Richardson step on top of [`central_diff`]: `(4 D(h/2) - D(h)) / 3`,
/// which cancels the `h^2` term of the symmetric quotient.
pub fn richardson_central_diff<F>(f: F, x: f64, h: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let coarse = central_diff(&f, x, h);
    let fine = central_diff(&f, x, 0.5 * h);
    (4.0 * fine - coarse) / 3.0
}
