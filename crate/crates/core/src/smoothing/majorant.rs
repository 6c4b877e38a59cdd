//! The regularised weight `beta(x) = w(x) + exp(-eps|x|)` and its windowed
//! suprema `Omega_rho(x) = sup { beta(y) : |y - x| <= rho exp(-eps|x|) }`.

use crate::weights::{closest_to_origin, eval_weight, Weight};

use super::SmoothingError;

pub(crate) fn check_eps(eps: f64) -> Result<(), SmoothingError> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(SmoothingError::InvalidEps(eps))
    }
}

pub(crate) fn check_rho(rho: f64) -> Result<(), SmoothingError> {
    if rho > 0.0 && rho <= 1.0 {
        Ok(())
    } else {
        Err(SmoothingError::InvalidRho(rho))
    }
}

/// `w(x) + exp(-eps|x|)`.
pub fn beta(w: &Weight, eps: f64, x: f64) -> Result<f64, SmoothingError> {
    check_eps(eps)?;
    Ok(eval_weight(w, x)? + (-eps * x.abs()).exp())
}

/// Half-width `rho exp(-eps|x|)` of the window centred at `x`.
pub fn window_radius(eps: f64, rho: f64, x: f64) -> f64 {
    rho * (-eps * x.abs()).exp()
}

/// Sup of `beta` over the closed window around `x` together with a point
/// where it is attained.
pub fn omega_rho_arg(w: &Weight, eps: f64, rho: f64, x: f64) -> Result<(f64, f64), SmoothingError> {
    check_eps(eps)?;
    check_rho(rho)?;
    let r = window_radius(eps, rho, x);
    let (lo, hi) = (x - r, x + r);
    let near = closest_to_origin(lo, hi);
    let exp_part = (-eps * near.abs()).exp();

    match w {
        Weight::Discrete(d) => {
            let mut best = (exp_part, near);
            for i in d.range_in(lo, hi) {
                let p = d.points()[i];
                let v = d.values()[i] + (-eps * p.abs()).exp();
                if v > best.0 {
                    best = (v, p);
                }
            }
            Ok(best)
        }
        _ if w.is_radial() => Ok((eval_weight(w, near)? + exp_part, near)),
        _ => {
            let tol = 1e-9 * (1.0 + beta(w, eps, x)?);
            let r = crate::numerics::grid_sup(
                |y| eval_weight(w, y).map_or(f64::NAN, |v| v + (-eps * y.abs()).exp()),
                lo,
                hi,
                tol,
            )?;
            Ok((r.sup_value, r.arg))
        }
    }
}

/// `Omega_rho(x)`.
pub fn omega_rho(w: &Weight, eps: f64, rho: f64, x: f64) -> Result<f64, SmoothingError> {
    omega_rho_arg(w, eps, rho, x).map(|(v, _)| v)
}

/// The sup-smoothing `w_eps(x) = Omega_1(x)`.
pub fn sup_smoothing(w: &Weight, eps: f64, x: f64) -> Result<f64, SmoothingError> {
    omega_rho(w, eps, 1.0, x)
}

/// The two solutions `y` of `|y - p| = rho exp(-eps|y|)`: the centres at
/// which `p` enters and leaves the window. `eps * rho < 1` makes the left
/// side minus the right side strictly monotone on each side of `p`.
pub fn window_crossings(p: f64, eps: f64, rho: f64) -> (f64, f64) {
    let gap = |y: f64| (y - p).abs() - window_radius(eps, rho, y);
    let below = bisect(|y| -gap(y), p - rho, p);
    let above = bisect(gap, p, p + rho);
    (below, above)
}

/// Root of an increasing function on `[a, b]` with `g(a) <= 0 <= g(b)`.
fn bisect<G: Fn(f64) -> f64>(g: G, mut a: f64, mut b: f64) -> f64 {
    if g(a) >= 0.0 {
        return a;
    }
    if g(b) <= 0.0 {
        return b;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if g(m) <= 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Centres in `[lo, hi]` at which `Omega_rho` can fail to be smooth: where a
/// window edge passes the kink of `exp(-eps|y|)` at 0 and, for discrete
/// weights, where it passes a support point.
pub fn omega_breakpoints(w: &Weight, eps: f64, rho: f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut points = Vec::new();
    let (a, b) = window_crossings(0.0, eps, rho);
    points.extend([a, b]);
    if let Some(d) = w.as_discrete() {
        for i in d.range_in(lo - rho, hi + rho) {
            let (a, b) = window_crossings(d.points()[i], eps, rho);
            points.extend([a, b]);
        }
    }
    points.retain(|&y| y > lo && y < hi);
    points.sort_by(f64::total_cmp);
    points.dedup();
    points
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::grid_sup;
    use crate::weights::Builtin;

    fn zero() -> Weight {
        Weight::zero()
    }

    #[test]
    fn beta_examples() {
        assert_eq!(beta(&zero(), 0.5, 0.0).unwrap(), 1.0);
        assert!((beta(&zero(), 0.5, 2.0).unwrap() - (-1.0f64).exp()).abs() < 1e-16);
        let d = Weight::discrete(vec![(2.0, 1.0)], 1.0).unwrap();
        assert!((beta(&d, 0.5, 2.0).unwrap() - (1.0 + (-1.0f64).exp())).abs() < 1e-15);
        assert!(beta(&zero(), 1.0, 0.0).is_err());
    }

    #[test]
    fn omega_of_zero_weight_closed_form() {
        for &(eps, rho) in &[(0.5, 1.0), (0.3, 0.5), (0.9, 0.125)] {
            for i in -40..=40 {
                let x = i as f64 * 0.25;
                let closed = (-eps * (x.abs() - window_radius(eps, rho, x)).max(0.0)).exp();
                let got = omega_rho(&zero(), eps, rho, x).unwrap();
                assert!((got - closed).abs() < 1e-15, "x = {x}");
                let r = window_radius(eps, rho, x);
                let grid = grid_sup(|y: f64| (-eps * y.abs()).exp(), x - r, x + r, 1e-13).unwrap();
                assert!(
                    (grid.sup_value - closed).abs() < 1e-12,
                    "x = {x}: {} vs {closed} ({eps}, {rho})",
                    grid.sup_value
                );
            }
        }
        assert_eq!(omega_rho(&zero(), 0.5, 1.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn general_path_agrees_with_exact_path() {
        let g = Weight::builtin(Builtin::Gauss, 1.0).unwrap();
        let g_general = Weight::evaluable("gauss", 1.0, |x| (-x * x).exp()).unwrap();
        for i in -12..=12 {
            let x = i as f64 * 0.37;
            let exact = omega_rho(&g, 0.5, 0.5, x).unwrap();
            let grid = omega_rho(&g_general, 0.5, 0.5, x).unwrap();
            assert!((exact - grid).abs() < 1e-8, "x = {x}: {exact} vs {grid}");
        }
    }

    #[test]
    fn discrete_path_agrees_with_brute_force() {
        let d = Weight::discrete(vec![(-1.0, 0.3), (0.5, 0.2), (2.0, 0.6)], 1.0).unwrap();
        for i in -30..=30 {
            let x = i as f64 * 0.1;
            let r = window_radius(0.5, 1.0, x);
            let mut brute = (-0.5 * closest_to_origin(x - r, x + r).abs()).exp();
            for (p, v) in [(-1.0f64, 0.3), (0.5, 0.2), (2.0, 0.6)] {
                if (p - x).abs() <= r {
                    brute = brute.max(v + (-0.5 * p.abs()).exp());
                }
            }
            assert_eq!(omega_rho(&d, 0.5, 1.0, x).unwrap(), brute, "x = {x}");
        }
    }

    #[test]
    fn chain_at_x3() {
        let w = Weight::builtin(Builtin::ExpAbs, 1.0).unwrap();
        let x = 3.0;
        let b = beta(&w, 0.5, x).unwrap();
        let vals: Vec<f64> = [0.125, 0.5, 11.0 / 12.0, 1.0]
            .iter()
            .map(|&r| omega_rho(&w, 0.5, r, x).unwrap())
            .collect();
        assert!(b <= vals[0]);
        assert!(vals.windows(2).all(|p| p[0] <= p[1]), "{vals:?}");
    }

    #[test]
    fn crossings_solve_the_window_equation() {
        for p in [-4.0, 0.0, 0.7, 9.0] {
            let (a, b) = window_crossings(p, 0.5, 0.5);
            assert!(a < p && p < b);
            for y in [a, b] {
                assert!(((y - p).abs() - window_radius(0.5, 0.5, y)).abs() < 1e-14);
            }
        }
    }
}
