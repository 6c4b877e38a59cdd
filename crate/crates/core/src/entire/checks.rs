use num_complex::Complex64;
use serde::Serialize;

use crate::report::BoundReport;

use super::growth::{estimate_growth_constant, DEFAULT_CIRCLE_SAMPLES};
use super::perturbation::{effective_delta, PerturbationPlan};
use super::product::EntireProduct;
use super::EntireError;

/// Tolerance on log-domain comparisons in the Cauchy check; the central
/// difference is accurate to far better than this.
const CAUCHY_TOL: f64 = 1e-6;

/// Separation of zeros: at every zero, the distance to the nearest other
/// zero exceeds `exp(-eps) exp(-eps|λ|) / (1 + 2 C_eps Θ)`, with
/// `eps = min(delta, MAX_DELTA) / 2` and `C_eps`, `Θ` computed for `b`.
pub fn separation_check(b: &EntireProduct, delta: f64) -> Result<BoundReport, EntireError> {
    let eps = effective_delta(delta)? / 2.0;
    let c_eps = estimate_growth_constant(b, eps, DEFAULT_CIRCLE_SAMPLES)?.c_eps;
    let theta = b.theta().value;
    Ok(separation_check_with_constants(b, eps, c_eps, theta))
}

/// [`separation_check`] with caller-supplied constants.
pub fn separation_check_with_constants(
    b: &EntireProduct,
    eps: f64,
    c_eps: f64,
    theta: f64,
) -> BoundReport {
    let z = b.zeros();
    let scale = (-eps).exp() / (1.0 + 2.0 * c_eps * theta);
    let mut lhs = Vec::with_capacity(z.len());
    let mut rhs = Vec::with_capacity(z.len());
    for (i, &l) in z.iter().enumerate() {
        let left = if i > 0 { l - z[i - 1] } else { f64::INFINITY };
        let right = if i + 1 < z.len() {
            z[i + 1] - l
        } else {
            f64::INFINITY
        };
        lhs.push(scale * (-eps * l.abs()).exp());
        rhs.push(left.min(right));
    }
    BoundReport::new(
        "separation bound <= distance to nearest zero",
        z.to_vec(),
        lhs,
        rhs,
        0.0,
    )
}

/// Geometry of the radii `Δ` around the normalised zeros `μ = λ - a`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalReport {
    /// `μ_i + 2Δ_i <= μ_{i+1} - 2Δ_{i+1}` for neighbours.
    pub disjoint: BoundReport,
    /// `max(2Δ_i, 2Δ_{i+1}) <= (μ_{i+1} - μ_i)/2`: the midpoint of two
    /// neighbours lies outside both intervals.
    pub midpoint: BoundReport,
    /// `2Δ_μ <= |μ|`: the origin lies outside every interval.
    pub origin: BoundReport,
    /// `|shift| <= Δ²`: each perturbed zero stays within `Δ²` (hence
    /// within `Δ`) of its original.
    pub containment: Option<BoundReport>,
}

impl IntervalReport {
    pub fn reports(&self) -> Vec<&BoundReport> {
        let mut r = vec![&self.disjoint, &self.midpoint, &self.origin];
        r.extend(self.containment.as_ref());
        r
    }

    pub fn pass(&self) -> bool {
        self.reports().iter().all(|r| r.pass)
    }
}

pub fn interval_checks(
    plan: &PerturbationPlan,
    shifts: Option<&[f64]>,
) -> Result<IntervalReport, EntireError> {
    let mu = plan.normalised.zeros();
    let dl = &plan.deltas;
    let lambda = plan.original.zeros();
    let n = mu.len();

    let pairs: Vec<usize> = (0..n.saturating_sub(1)).collect();
    let grid: Vec<f64> = pairs.iter().map(|&i| lambda[i]).collect();
    let disjoint = BoundReport::new(
        "neighbouring 2Δ intervals are disjoint",
        grid.clone(),
        pairs.iter().map(|&i| mu[i] + 2.0 * dl[i]).collect(),
        pairs.iter().map(|&i| mu[i + 1] - 2.0 * dl[i + 1]).collect(),
        0.0,
    );
    let midpoint = BoundReport::new(
        "midpoint of neighbours lies outside the 2Δ intervals",
        grid,
        pairs.iter().map(|&i| 2.0 * dl[i].max(dl[i + 1])).collect(),
        pairs.iter().map(|&i| 0.5 * (mu[i + 1] - mu[i])).collect(),
        0.0,
    );
    let origin = BoundReport::new(
        "origin lies outside the 2Δ intervals",
        lambda.to_vec(),
        dl.iter().map(|d| 2.0 * d).collect(),
        mu.iter().map(|m| m.abs()).collect(),
        0.0,
    );
    let containment = match shifts {
        None => None,
        Some(s) => {
            plan.check_shifts(s)?;
            // Compared in the log domain: far from the origin both sides
            // underflow.
            let ln_rho = plan.rho_normalised.ln();
            Some(BoundReport::new(
                "log|d_λ - λ| - log Δ² <= 0",
                lambda.to_vec(),
                s.iter()
                    .zip(mu)
                    .map(|(s, m)| s.abs().ln() - (ln_rho - 2.0 * plan.eps * m.abs()))
                    .collect(),
                vec![0.0; n],
                1e-12,
            ))
        }
    };
    Ok(IntervalReport {
        disjoint,
        midpoint,
        origin,
        containment,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioCheck {
    pub ratio: f64,
    pub bound: f64,
    pub pass: bool,
}

/// `|(1 - x/a) / (1 - x/b)| <= (1 + Δ)²` for `b` within `Δ²` of `a`,
/// `a` at least `Δ` from the origin and `x` at least `2Δ` from `a`.
pub fn ratio_bound_check(a: f64, b: f64, x: f64, delta: f64) -> Result<RatioCheck, EntireError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(EntireError::Precondition(format!(
            "Δ must lie in (0, 1), got {delta}"
        )));
    }
    if !(a.is_finite() && b.is_finite() && x.is_finite()) {
        return Err(EntireError::Precondition(
            "a, b and x must be finite".to_string(),
        ));
    }
    let d2 = delta * delta;
    if !((b - a).abs() < d2) {
        return Err(EntireError::Precondition(format!(
            "b = {b} is not within Δ² = {d2} of a = {a}"
        )));
    }
    if a.abs() < delta {
        return Err(EntireError::Precondition(format!(
            "0 lies within Δ = {delta} of a = {a}"
        )));
    }
    if (x - a).abs() < 2.0 * delta {
        return Err(EntireError::Precondition(format!(
            "x = {x} lies within 2Δ of a = {a}"
        )));
    }
    let ratio = ((1.0 - x / a) / (1.0 - x / b)).abs();
    let bound = (1.0 + delta).powi(2);
    Ok(RatioCheck {
        ratio,
        bound,
        pass: ratio <= bound,
    })
}

/// Cauchy-type estimates for a function with `|B(z)| <= C exp(eps|z|)`:
/// `|B'(z)|` and `|B(z)/(z - λ)|` stay below `C exp(eps|z|)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CauchyReport {
    pub eps: f64,
    pub c_eps: f64,
    /// Sample points as `[re, im]`; the reports use `|z|` as their grid.
    pub points: Vec<[f64; 2]>,
    /// `log|B'(z)| <= log C + eps|z|`.
    pub derivative: BoundReport,
    /// `log|B(z)/(z - λ)| <= log C + eps|z|` with `λ` the nearest zero.
    pub quotient: BoundReport,
}

impl CauchyReport {
    pub fn pass(&self) -> bool {
        self.derivative.pass && self.quotient.pass
    }
}

/// `log|B'(z)|` by a central difference evaluated in the log domain.
fn log_abs_derivative(b: &EntireProduct, z: Complex64) -> f64 {
    let h = 1e-6 * (1.0 + z.norm());
    let (lp, ap) = b.eval_complex_log(z + h);
    let (lm, am) = b.eval_complex_log(z - h);
    let s = lp.max(lm);
    let diff =
        Complex64::from_polar((lp - s).exp(), ap) - Complex64::from_polar((lm - s).exp(), am);
    s + diff.norm().ln() - (2.0 * h).ln()
}

pub fn cauchy_bound_check(
    b: &EntireProduct,
    eps: f64,
    c_eps: f64,
    grid: &[Complex64],
) -> Result<CauchyReport, EntireError> {
    if !(eps > 0.0 && eps < 0.5 / std::f64::consts::E) {
        return Err(EntireError::InvalidEps(eps));
    }
    if !(c_eps > 0.0 && c_eps.is_finite()) {
        return Err(EntireError::Precondition(format!(
            "growth constant must be positive and finite, got {c_eps}"
        )));
    }
    let ln_c = c_eps.ln();
    let zeros = b.zeros();
    let radii: Vec<f64> = grid.iter().map(|z| z.norm()).collect();
    let rhs: Vec<f64> = radii.iter().map(|r| ln_c + eps * r).collect();
    let derivative: Vec<f64> = grid.iter().map(|&z| log_abs_derivative(b, z)).collect();
    let quotient: Vec<f64> = grid
        .iter()
        .map(|&z| {
            let nearest = (0..zeros.len())
                .min_by(|&i, &j| (z - zeros[i]).norm().total_cmp(&(z - zeros[j]).norm()))
                .unwrap_or(0);
            b.quotient_log(z, nearest).0
        })
        .collect();
    Ok(CauchyReport {
        eps,
        c_eps,
        points: grid.iter().map(|z| [z.re, z.im]).collect(),
        derivative: BoundReport::new(
            "log|B'(z)| <= log C + eps|z|",
            radii.clone(),
            derivative,
            rhs.clone(),
            CAUCHY_TOL,
        ),
        quotient: BoundReport::new(
            "log|B(z)/(z - λ)| <= log C + eps|z|",
            radii,
            quotient,
            rhs,
            CAUCHY_TOL,
        ),
    })
}
