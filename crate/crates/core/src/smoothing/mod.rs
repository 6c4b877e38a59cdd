//! Smooth majorants of weights.
//!
//! Starting from a weight `w` and `eps in (0, 1)`:
//!
//! * `beta(x) = w(x) + exp(-eps|x|)` is a strictly positive majorant,
//! * `Omega_rho(x)` is the sup of `beta` over the window of half-width
//!   `rho exp(-eps|x|)` around `x`; `Omega_1` is the sup-smoothing `w_eps`,
//! * `W(x)` mollifies `Omega_{1/2}` with a bump of half-width `omega(x)`.
//!
//! `W` is C^∞ and satisfies `beta <= W <= w_eps`. With `omega = phi_eps` its
//! derivative obeys `|W'(x)| <= 74 exp(eps|x|) w_eps(x)`, which
//! [`verify_smooth_majorant`] checks numerically.

mod bump;
mod majorant;
mod mollifier;
mod verify;

use thiserror::Error;

use crate::numerics::NumericsError;
use crate::weights::WeightError;

pub use crate::report::BoundReport;
pub use bump::{bump, bump_ratio, kappa, moment_abs_t, moment_t_squared};
pub use majorant::{
    beta, omega_breakpoints, omega_rho, omega_rho_arg, sup_smoothing, window_crossings,
    window_radius,
};
pub use mollifier::{
    kernel, mollified, mollified_fn, mollified_value, phi, smooth_weight, smooth_weight_full,
    Kernel, SmoothPoint, SmoothingConfig, Width, WidthAt,
};
pub use verify::{verify_smooth_majorant, MajorantReport, MajorantSample};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SmoothingError {
    #[error("eps must lie in (0, 1), got {0}")]
    InvalidEps(f64),

    #[error("rho must lie in (0, 1], got {0}")]
    InvalidRho(f64),

    #[error("mollifier width {width:e} at x = {x} violates 0 < width <= {limit:e}")]
    InvalidWidth { x: f64, width: f64, limit: f64 },

    #[error("mollifier width {width:e} at x = {x} is too small to resolve a derivative in f64")]
    UnresolvedWidth { x: f64, width: f64 },

    #[error("kernel argument {t} lies outside [-{width}, {width}]")]
    OutsideKernel { t: f64, width: f64 },

    #[error("invalid verification input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Weight(#[from] WeightError),

    #[error(transparent)]
    Numerics(#[from] NumericsError),
}
