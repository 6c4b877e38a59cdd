//! Mollification by the normalised bump with a point-dependent width.

use std::cell::RefCell;
use std::sync::Arc;

use crate::numerics::{
    central_diff, default_budget, integrate_bump, integrate_bump_with, integrate_many,
};
use crate::weights::Weight;

use super::bump::{bump, bump_ratio, kappa};
use super::majorant::{check_eps, check_rho, omega_breakpoints, omega_rho};
use super::SmoothingError;

/// Normalised bump `exp(-w^2/(w^2-t^2)) / N(w)` supported on `[-w, w]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    width: f64,
    normalization: f64,
}

impl Kernel {
    pub fn new(width: f64) -> Result<Self, SmoothingError> {
        if !(width.is_finite() && width > 0.0) {
            return Err(SmoothingError::InvalidWidth {
                x: f64::NAN,
                width,
                limit: f64::NAN,
            });
        }
        let n = integrate_bump(|t| bump(t / width), -width, width, 1e-15 * width)?;
        Ok(Kernel {
            width,
            normalization: n.value,
        })
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn eval(&self, t: f64) -> Result<f64, SmoothingError> {
        if t.abs() > self.width {
            return Err(SmoothingError::OutsideKernel {
                t,
                width: self.width,
            });
        }
        Ok(bump(t / self.width) / self.normalization)
    }
}

/// One-shot kernel evaluation; see [`Kernel`] to reuse the normalisation.
pub fn kernel(width: f64, t: f64) -> Result<f64, SmoothingError> {
    Kernel::new(width)?.eval(t)
}

/// Width function value and derivative at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthAt {
    pub value: f64,
    pub derivative: f64,
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The mollifier half-width `omega(x)`.
#[derive(Clone)]
pub enum Width {
    /// `exp(-x^2 - eps^2/4) / 4`
    Default,
    /// `phi_eps`, whose derivative is known in closed form.
    Phi,
    Custom {
        value: RealFn,
        derivative: Option<RealFn>,
    },
}

impl std::fmt::Debug for Width {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Width::Default => f.write_str("Default"),
            Width::Phi => f.write_str("Phi"),
            Width::Custom { derivative, .. } => f
                .debug_struct("Custom")
                .field("analytic_derivative", &derivative.is_some())
                .finish(),
        }
    }
}

impl Width {
    pub fn custom<F>(value: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Width::Custom {
            value: Arc::new(value),
            derivative: None,
        }
    }

    pub fn custom_with_derivative<F, G>(value: F, derivative: G) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Width::Custom {
            value: Arc::new(value),
            derivative: Some(Arc::new(derivative)),
        }
    }

    pub fn at(&self, eps: f64, x: f64) -> Result<WidthAt, SmoothingError> {
        match self {
            Width::Default => {
                let value = 0.25 * (-x * x - 0.25 * eps * eps).exp();
                Ok(WidthAt {
                    value,
                    derivative: -2.0 * x * value,
                })
            }
            Width::Phi => {
                let (value, derivative) = phi(eps, x)?;
                Ok(WidthAt { value, derivative })
            }
            Width::Custom { value, derivative } => {
                let derivative = match derivative {
                    Some(d) => d(x),
                    None => central_diff(|y| value(y), x, 1e-6 * (1.0 + x.abs())),
                };
                Ok(WidthAt {
                    value: value(x),
                    derivative,
                })
            }
        }
    }
}

/// Parameters of the smooth majorant.
#[derive(Debug, Clone)]
pub struct SmoothingConfig {
    pub eps: f64,
    pub rho: f64,
    pub width: Width,
}

impl SmoothingConfig {
    pub fn new(eps: f64, rho: f64, width: Width) -> Result<Self, SmoothingError> {
        check_eps(eps)?;
        check_rho(rho)?;
        Ok(SmoothingConfig { eps, rho, width })
    }

    /// Width at `x`, checked against `0 < omega(x) <= exp(-eps|x|)/4`.
    pub fn width_at(&self, x: f64) -> Result<WidthAt, SmoothingError> {
        let w = self.width.at(self.eps, x)?;
        let limit = 0.25 * (-self.eps * x.abs()).exp();
        if !(w.value > 0.0 && w.value <= limit * (1.0 + 1e-12)) || !w.derivative.is_finite() {
            return Err(SmoothingError::InvalidWidth {
                x,
                width: w.value,
                limit,
            });
        }
        Ok(w)
    }
}

const VALUE_RTOL: f64 = 1e-12;
const DERIVATIVE_RTOL: f64 = 1e-11;
/// Below `RESOLVED_WIDTH * (1 + |x|)` the points `x + t omega` are only a few
/// thousand ulps apart and difference quotients of `f` along them are noise.
const RESOLVED_WIDTH: f64 = 1e6 * f64::EPSILON;

fn tolerance_scale<F: Fn(f64) -> f64>(f: &F, x: f64, omega: f64) -> f64 {
    [f(x), f(x - 0.5 * omega), f(x + 0.5 * omega)]
        .iter()
        .map(|v| v.abs())
        .fold(1e-300, f64::max)
}

fn check_width(x: f64, omega: f64) -> Result<(), SmoothingError> {
    if omega.is_finite() && omega > 0.0 {
        Ok(())
    } else {
        Err(SmoothingError::InvalidWidth {
            x,
            width: omega,
            limit: f64::INFINITY,
        })
    }
}

/// Value part of [`mollified`] alone. Works for any positive width, including
/// widths below the resolution of `x`, where it tends to `f(x)`.
pub fn mollified_value<F>(f: F, omega: f64, x: f64, breaks: &[f64]) -> Result<f64, SmoothingError>
where
    F: Fn(f64) -> f64,
{
    check_width(x, omega)?;
    let k = kappa()?;
    let tol = VALUE_RTOL * tolerance_scale(&f, x, omega);
    let t_breaks: Vec<f64> = breaks.iter().map(|b| (b - x) / omega).collect();
    let r = integrate_bump_with(
        |t| f(x + t * omega) * bump(t),
        -1.0,
        1.0,
        &t_breaks,
        tol,
        default_budget(),
    )?;
    Ok(r.value / k)
}

/// `f_omega(x) = (1/kappa) ∫ f(x + t omega) bump(t) dt` and its derivative
///
/// ```text
/// f_omega'(x) = 1/(kappa omega) [ ∫ g 2t bump/(t^2-1)^2
///                                 - omega' ∫ g bump
///                                 + 2 omega' ∫ g t^2 bump/(t^2-1)^2 ]
/// ```
///
/// with `g(t) = f(x + t omega) - f(x)`. Subtracting `f(x)` does not change
/// the derivative (the three moments of a constant cancel) but keeps the
/// integrands small, so the result does not lose digits to cancellation.
/// `breaks` are points in the domain of `f` where it is not smooth.
pub fn mollified<F>(
    f: F,
    width: WidthAt,
    x: f64,
    breaks: &[f64],
) -> Result<(f64, f64), SmoothingError>
where
    F: Fn(f64) -> f64,
{
    let omega = width.value;
    check_width(x, omega)?;
    if omega < RESOLVED_WIDTH * (1.0 + x.abs()) {
        return Err(SmoothingError::UnresolvedWidth { x, width: omega });
    }
    let k = kappa()?;
    let centre = f(x);
    let scale = tolerance_scale(&f, x, omega);
    let t_breaks: Vec<f64> = breaks.iter().map(|b| (b - x) / omega).collect();
    let value_tol = VALUE_RTOL * scale;
    let deriv_tol = DERIVATIVE_RTOL * scale * omega;

    let r = integrate_many(
        |t| {
            let v = f(x + t * omega);
            let g = v - centre;
            let b = bump(t);
            let q = bump_ratio(t);
            [v * b, g * 2.0 * t * q, g * b, g * t * t * q]
        },
        -1.0,
        1.0,
        &t_breaks,
        [value_tol, deriv_tol, deriv_tol, deriv_tol],
        default_budget(),
    )?;
    let [value, odd, plain, even] = r.values;
    let dw = width.derivative;
    let derivative = (odd - dw * plain + 2.0 * dw * even) / (k * omega);
    Ok((value / k, derivative))
}

/// [`mollified`] with the width given as a function; its derivative comes
/// from a central difference with step `1e-6 (1 + |x|)`.
pub fn mollified_fn<F, G>(f: F, omega: G, x: f64) -> Result<(f64, f64), SmoothingError>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let width = WidthAt {
        value: omega(x),
        derivative: central_diff(&omega, x, 1e-6 * (1.0 + x.abs())),
    };
    mollified(f, width, x, &[])
}

/// `phi_eps(x) = (exp(-eps)/(4 kappa)) ∫ exp(-eps|x+t|) bump(t) dt` and its
/// derivative `(exp(-eps)/(4 kappa)) ∫ exp(-eps|x+t|) 2t bump/(1-t^2)^2 dt`.
pub fn phi(eps: f64, x: f64) -> Result<(f64, f64), SmoothingError> {
    check_eps(eps)?;
    let k = kappa()?;
    let scale = (-eps * x.abs()).exp();
    let tol = 1e-13 * scale;
    let r = integrate_many(
        |t| {
            let e = (-eps * (x + t).abs()).exp();
            [e * bump(t), e * 2.0 * t * bump_ratio(t)]
        },
        -1.0,
        1.0,
        &[-x],
        [tol, tol],
        default_budget(),
    )?;
    let c = (-eps).exp() / (4.0 * k);
    Ok((c * r.values[0], c * r.values[1]))
}

/// Smooth majorant and its derivative at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothPoint {
    pub value: f64,
    pub derivative: f64,
    pub width: WidthAt,
}

/// `W(x) = ∫ K_omega(x, t) Omega_{1/2}(x + t) dt` together with `W'(x)`.
pub fn smooth_weight_full(
    w: &Weight,
    cfg: &SmoothingConfig,
    x: f64,
) -> Result<SmoothPoint, SmoothingError> {
    let width = cfg.width_at(x)?;
    let eps = cfg.eps;
    let omega = width.value;
    let breaks = omega_breakpoints(w, eps, 0.5, x - omega, x + omega);
    let (value, derivative) = with_half_window(w, eps, |f| mollified(f, width, x, &breaks))?;
    Ok(SmoothPoint {
        value,
        derivative,
        width,
    })
}

/// The smooth majorant `W(x)`.
pub fn smooth_weight(w: &Weight, cfg: &SmoothingConfig, x: f64) -> Result<f64, SmoothingError> {
    let omega = cfg.width_at(x)?.value;
    let breaks = omega_breakpoints(w, cfg.eps, 0.5, x - omega, x + omega);
    with_half_window(w, cfg.eps, |f| mollified_value(f, omega, x, &breaks))
}

/// Runs `body` with `y -> Omega_{1/2}(y)` as a plain function, surfacing the
/// first evaluation error instead of the NaN handed to the integrator.
fn with_half_window<T>(
    w: &Weight,
    eps: f64,
    body: impl FnOnce(&dyn Fn(f64) -> f64) -> Result<T, SmoothingError>,
) -> Result<T, SmoothingError> {
    let failure: RefCell<Option<SmoothingError>> = RefCell::new(None);
    let f = |y: f64| match omega_rho(w, eps, 0.5, y) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let result = body(&f);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::richardson_central_diff;
    use crate::smoothing::majorant::{beta, sup_smoothing};
    use crate::weights::Builtin;

    #[test]
    fn kernel_is_normalised_and_even() {
        let k = Kernel::new(0.1).unwrap();
        let total = integrate_bump(|t| k.eval(t).unwrap(), -0.1, 0.1, 1e-14).unwrap();
        assert!((total.value - 1.0).abs() < 1e-10);
        assert_eq!(k.eval(0.1).unwrap(), 0.0);
        assert_eq!(k.eval(-0.1).unwrap(), 0.0);
        assert_eq!(kernel(0.25, 0.1).unwrap(), kernel(0.25, -0.1).unwrap());
        assert!(matches!(
            k.eval(0.2),
            Err(SmoothingError::OutsideKernel { .. })
        ));
        assert!((k.normalization() - 0.1 * kappa().unwrap()).abs() < 1e-15);
    }

    #[test]
    fn phi_reference_values() {
        let cases = [
            (0.5, 0.0, 0.12901604546443866, 0.0),
            (0.5, 1.5, 0.07305175251175105, -0.03652587625587553),
            (0.5, -3.0, 0.03450720450566561, 0.0172536022528328),
            (0.9, 20.0, 1.6494091168571754e-9, -1.484468205171458e-9),
            (0.1, 0.3, 0.2172565262529556, -0.01024424273995353),
        ];
        for (eps, x, v, d) in cases {
            let (pv, pd) = phi(eps, x).unwrap();
            let s = (-eps * x.abs()).exp();
            assert!((pv - v).abs() < 1e-12 * s, "phi({eps},{x}) = {pv}");
            assert!((pd - d).abs() < 1e-12 * s, "phi'({eps},{x}) = {pd}");
        }
        let (v, _) = phi(1e-6, 0.0).unwrap();
        assert!((v - 0.24999966638672895).abs() < 1e-12);
    }

    #[test]
    fn phi_derivative_matches_difference_quotient() {
        for x in [-2.0, -0.4, 0.7, 5.0] {
            let (_, d) = phi(0.5, x).unwrap();
            let fd = richardson_central_diff(|y| phi(0.5, y).unwrap().0, x, 1e-3);
            assert!((d - fd).abs() < 1e-9, "x = {x}: {d} vs {fd}");
        }
    }

    #[test]
    fn mollified_linear_and_constant() {
        let unit = WidthAt {
            value: 1.0,
            derivative: 0.0,
        };
        let (v, d) = mollified(|t| t, unit, 0.7, &[]).unwrap();
        assert!((v - 0.7).abs() < 1e-12);
        assert!((d - 1.0).abs() < 1e-10);
        let varying = WidthAt {
            value: 0.3,
            derivative: -0.8,
        };
        let (v, d) = mollified(|_| 2.5, varying, -1.0, &[]).unwrap();
        assert!((v - 2.5).abs() < 1e-12);
        assert!(d.abs() < 1e-10);
    }

    #[test]
    fn mollified_square_at_origin() {
        let unit = WidthAt {
            value: 1.0,
            derivative: 0.0,
        };
        let (v, d) = mollified(|t| t * t, unit, 0.0, &[]).unwrap();
        assert!((v - 0.158_113_636_263_798_24).abs() < 1e-12, "{v}");
        assert!(d.abs() < 1e-12);
    }

    #[test]
    fn mollified_derivative_matches_difference_quotient() {
        let omega = |x: f64| 0.25 * (-0.5 * x * x).exp();
        for x in [-1.1, 0.2, 0.9] {
            let f = |t: f64| t.sin() + t * t;
            let (_, d) = mollified_fn(f, omega, x).unwrap();
            let fd = richardson_central_diff(|y| mollified_fn(f, omega, y).unwrap().0, x, 1e-3);
            assert!(
                (d - fd).abs() < 1e-6 * d.abs().max(1.0),
                "x = {x}: {d} vs {fd}"
            );
        }
    }

    #[test]
    fn default_width_respects_limit() {
        for eps in [0.1, 0.5, 0.9] {
            let cfg = SmoothingConfig::new(eps, 1.0, Width::Default).unwrap();
            for i in -100..=100 {
                assert!(cfg.width_at(i as f64 * 0.1).is_ok());
            }
        }
        let wide = SmoothingConfig::new(0.5, 1.0, Width::custom(|_| 0.3)).unwrap();
        assert!(matches!(
            wide.width_at(0.0),
            Err(SmoothingError::InvalidWidth { .. })
        ));
    }

    #[test]
    fn sandwich_for_zero_and_gauss() {
        let cfg = SmoothingConfig::new(0.5, 1.0, Width::Default).unwrap();
        let g = Weight::builtin(Builtin::Gauss, 1.0).unwrap();
        for w in [Weight::zero(), g] {
            for i in -20..=20 {
                let x = i as f64 * 0.5;
                let v = smooth_weight(&w, &cfg, x).unwrap();
                let lo = beta(&w, 0.5, x).unwrap();
                let hi = sup_smoothing(&w, 0.5, x).unwrap();
                assert!(lo - 1e-12 <= v && v <= hi + 1e-12, "x = {x}: {lo} {v} {hi}");
            }
        }
    }

    #[test]
    fn smooth_weight_of_zero_decays() {
        let cfg = SmoothingConfig::new(0.5, 1.0, Width::Phi).unwrap();
        assert!(smooth_weight(&Weight::zero(), &cfg, 80.0).unwrap() < 1e-15);
    }
}
