use rayon::prelude::*;
use serde::Serialize;

use crate::numerics::richardson_central_diff;
use crate::report::BoundReport;
use crate::weights::Weight;

use super::majorant::{beta, check_eps, sup_smoothing};
use super::mollifier::{smooth_weight, smooth_weight_full, SmoothingConfig, Width};
use super::SmoothingError;

/// Constant in the derivative bound `|W'(x)| <= 74 exp(eps|x|) w_eps(x)`.
pub const DERIVATIVE_BOUND_CONSTANT: f64 = 74.0;

const SANDWICH_TOL: f64 = 1e-10;
const AGREEMENT_RTOL: f64 = 1e-5;
const AGREEMENT_ATOL: f64 = 1e-8;

/// Everything computed at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MajorantSample {
    pub x: f64,
    pub beta: f64,
    pub smooth: f64,
    pub sup_smoothing: f64,
    pub derivative: f64,
    pub derivative_fd: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MajorantReport {
    pub eps: f64,
    pub samples: Vec<MajorantSample>,
    /// `beta(x) <= W(x)`
    pub lower: BoundReport,
    /// `W(x) <= w_eps(x)`
    pub upper: BoundReport,
    /// `|W'(x)| <= 74 exp(eps|x|) w_eps(x)`
    pub derivative_bound: BoundReport,
    /// closed-form `W'` against a difference quotient
    pub derivative_agreement: BoundReport,
    pub pass: bool,
}

impl MajorantReport {
    pub fn checks(&self) -> [&BoundReport; 4] {
        [
            &self.lower,
            &self.upper,
            &self.derivative_bound,
            &self.derivative_agreement,
        ]
    }
}

/// Builds `W` with `omega = phi_eps` on `grid` and checks the sandwich
/// `beta <= W <= w_eps`, the derivative bound, and that the closed-form
/// derivative agrees with a Richardson-extrapolated central difference of
/// step `h * phi_eps(x)` to within `max(1e-5 * scale, 1e-8)`.
pub fn verify_smooth_majorant(
    w: &Weight,
    eps: f64,
    grid: &[f64],
    h: f64,
) -> Result<MajorantReport, SmoothingError> {
    check_eps(eps)?;
    if grid.is_empty() {
        return Err(SmoothingError::InvalidInput("empty grid".to_string()));
    }
    if !(h.is_finite() && h > 0.0 && h < 1.0) {
        return Err(SmoothingError::InvalidInput(format!(
            "step h must lie in (0, 1), got {h}"
        )));
    }
    let cfg = SmoothingConfig::new(eps, 1.0, Width::Phi)?;

    let samples = grid
        .par_iter()
        .map(|&x| -> Result<MajorantSample, SmoothingError> {
            let point = smooth_weight_full(w, &cfg, x)?;
            let step = h * point.width.value;
            let failure = std::cell::RefCell::new(None);
            let derivative_fd = richardson_central_diff(
                |y| match smooth_weight(w, &cfg, y) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        f64::NAN
                    }
                },
                x,
                step,
            );
            if let Some(e) = failure.into_inner() {
                return Err(e);
            }
            Ok(MajorantSample {
                x,
                beta: beta(w, eps, x)?,
                smooth: point.value,
                sup_smoothing: sup_smoothing(w, eps, x)?,
                derivative: point.derivative,
                derivative_fd,
                width: point.width.value,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let xs: Vec<f64> = samples.iter().map(|s| s.x).collect();
    let col = |f: &dyn Fn(&MajorantSample) -> f64| samples.iter().map(f).collect::<Vec<f64>>();

    let lower = BoundReport::new(
        "beta <= W",
        xs.clone(),
        col(&|s| s.beta),
        col(&|s| s.smooth),
        SANDWICH_TOL,
    );
    let upper = BoundReport::new(
        "W <= w_eps",
        xs.clone(),
        col(&|s| s.smooth),
        col(&|s| s.sup_smoothing),
        SANDWICH_TOL,
    );
    let derivative_bound = BoundReport::new(
        "|W'| <= 74 exp(eps|x|) w_eps",
        xs.clone(),
        col(&|s| s.derivative.abs()),
        col(&|s| DERIVATIVE_BOUND_CONSTANT * (eps * s.x.abs()).exp() * s.sup_smoothing),
        0.0,
    );
    let derivative_agreement = BoundReport::new(
        "|W' - difference quotient| <= max(1e-5 scale, 1e-8)",
        xs,
        col(&|s| (s.derivative - s.derivative_fd).abs()),
        col(&|s| {
            (AGREEMENT_RTOL * s.derivative.abs().max(s.derivative_fd.abs())).max(AGREEMENT_ATOL)
        }),
        0.0,
    );
    let pass = lower.pass && upper.pass && derivative_bound.pass && derivative_agreement.pass;
    Ok(MajorantReport {
        eps,
        samples,
        lower,
        upper,
        derivative_bound,
        derivative_agreement,
        pass,
    })
}
