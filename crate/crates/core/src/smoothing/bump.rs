use std::sync::OnceLock;

use crate::numerics::{integrate_bump, NumericsError};

/// Below this value of `1 - t^2` the bump is exactly 0 in f64
/// (`exp(-1000)` underflows), so it is returned directly.
const EDGE: f64 = 1e-3;

const KAPPA_TOL: f64 = 1e-15;

/// `exp(-1/(1-t^2))` on `(-1, 1)`, zero outside.
pub fn bump(t: f64) -> f64 {
    let u = (1.0 - t) * (1.0 + t);
    if u <= EDGE {
        0.0
    } else {
        (-1.0 / u).exp()
    }
}

/// `bump(t) / (1-t^2)^2`, the factor produced by differentiating the bump:
/// `bump'(t) = -2t * bump_ratio(t)`.
pub fn bump_ratio(t: f64) -> f64 {
    let u = (1.0 - t) * (1.0 + t);
    if u <= EDGE {
        0.0
    } else {
        (-1.0 / u).exp() / (u * u)
    }
}

/// `kappa = ∫_{-1}^{1} exp(-1/(1-t^2)) dt`, computed once per process.
pub fn kappa() -> Result<f64, NumericsError> {
    static KAPPA: OnceLock<Result<f64, NumericsError>> = OnceLock::new();
    KAPPA
        .get_or_init(|| integrate_bump(bump, -1.0, 1.0, KAPPA_TOL).map(|r| r.value))
        .clone()
}

/// `∫ 2|t| bump(t) / (t^2-1)^2 dt`, which equals `2/e`.
pub fn moment_abs_t() -> Result<f64, NumericsError> {
    let r = integrate_bump(|t| 2.0 * t.abs() * bump_ratio(t), -1.0, 1.0, KAPPA_TOL)?;
    Ok(r.value)
}

/// `∫ t^2 bump(t) / (t^2-1)^2 dt`, which equals `kappa / 2`.
pub fn moment_t_squared() -> Result<f64, NumericsError> {
    let r = integrate_bump(|t| t * t * bump_ratio(t), -1.0, 1.0, KAPPA_TOL)?;
    Ok(r.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    const KAPPA_REF: f64 = 0.443_993_816_168_079_4;

    #[test]
    fn bump_is_zero_outside_and_one_over_e_at_origin() {
        assert_eq!(bump(1.0), 0.0);
        assert_eq!(bump(-1.5), 0.0);
        assert_eq!(bump(0.0), (-1.0f64).exp());
        assert_eq!(bump(0.3), bump(-0.3));
    }

    #[test]
    fn ratio_is_derivative_factor() {
        let t = 0.4;
        let h = 1e-6;
        let fd = (bump(t + h) - bump(t - h)) / (2.0 * h);
        assert!((fd + 2.0 * t * bump_ratio(t)).abs() < 1e-9);
    }

    #[test]
    fn kappa_reference() {
        let k = kappa().unwrap();
        assert!((k - KAPPA_REF).abs() < 1e-13, "{k}");
        assert!(k > 1.2 / std::f64::consts::E && k < 1.21 / std::f64::consts::E);
    }

    #[test]
    fn moment_identities() {
        let e = std::f64::consts::E;
        assert!((moment_abs_t().unwrap() - 2.0 / e).abs() < 1e-13);
        assert!((2.0 * moment_t_squared().unwrap() - kappa().unwrap()).abs() < 1e-13);
    }
}
