use rand::Rng;
use serde::Serialize;

use crate::numerics::NeumaierSum;
use crate::report::BoundReport;

use super::checks::{interval_checks, IntervalReport};
use super::growth::{estimate_growth_constant, GrowthEstimate};
use super::product::{EntireProduct, Theta};
use super::zeros::ZeroSet;
use super::EntireError;

/// Largest `delta` the construction is run with. Larger values reuse the
/// constants for `MAX_DELTA`, which stay valid because a smaller admissible
/// radius `exp(-delta|λ|)` is only a stronger hypothesis.
pub const MAX_DELTA: f64 = 0.99 / std::f64::consts::E;

/// Relative tolerance when deciding that two neighbours straddling the
/// origin are symmetric.
const SYMMETRY_RTOL: f64 = 1e-12;

/// Tolerance on the log-domain comparison `log|B'(λ)| <= log C_delta + log|D'(d)|`.
const CONCLUSION_TOL: f64 = 1e-10;

pub fn effective_delta(delta: f64) -> Result<f64, EntireError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(EntireError::InvalidDelta(delta));
    }
    Ok(delta.min(MAX_DELTA))
}

/// Translation `a` such that the zeros `λ - a` are normalised: a two-sided
/// set has its two neighbours around the origin placed symmetrically, a set
/// of positive zeros starts above 1 and a set of negative zeros ends below
/// -1. Returns 0 when the set is already normalised.
pub fn normalising_translation(zs: &ZeroSet) -> f64 {
    let z = zs.zeros();
    let below = z.iter().copied().rev().find(|&l| l < 0.0);
    let above = z.iter().copied().find(|&l| l > 0.0);
    match (below, above) {
        (Some(l1), Some(l2)) => {
            if (l1 + l2).abs() <= SYMMETRY_RTOL * l1.abs().max(l2) {
                0.0
            } else {
                0.5 * (l1 + l2)
            }
        }
        (None, Some(min)) => {
            if min > 1.0 {
                0.0
            } else {
                min - 2.0
            }
        }
        (Some(max), None) => {
            if max < -1.0 {
                0.0
            } else {
                max + 2.0
            }
        }
        (None, None) => 0.0,
    }
}

/// Constants of the zero-perturbation construction for one product.
///
/// Everything indexed per zero follows the increasing order of
/// `original.zeros()`. The constants are computed for the normalised
/// product `N(z) = B(z + a)`; `deltas` are the radii around the normalised
/// zeros `λ - a`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationPlan {
    pub original: EntireProduct,
    pub delta: f64,
    pub delta_eff: f64,
    pub eps: f64,
    pub translation: f64,
    pub normalised: EntireProduct,
    pub growth: GrowthEstimate,
    pub c_eps: f64,
    pub theta: Theta,
    /// Perturbation radius of the normalised product.
    pub rho_normalised: f64,
    /// `exp(-delta_eff |a|) * rho_normalised`, the radius for `B` itself.
    pub rho_delta: f64,
    pub deltas: Vec<f64>,
    /// `rho_delta * exp(-delta |λ|)` per zero.
    pub shift_limits: Vec<f64>,
    pub c_delta: f64,
}

pub fn perturbation_plan(
    b: &EntireProduct,
    delta: f64,
    circle_samples: usize,
) -> Result<PerturbationPlan, EntireError> {
    let delta_eff = effective_delta(delta)?;
    let eps = delta_eff / 2.0;
    let a = normalising_translation(b.zero_set());
    let normalised = if a == 0.0 {
        b.clone()
    } else {
        let at = b.eval(a).value();
        if !at.is_finite() {
            return Err(EntireError::Growth(format!("B({a}) overflows")));
        }
        EntireProduct::new(b.zero_set().translated(a)?, at)?
    };

    let theta = normalised.theta();
    if !theta.value.is_finite() {
        return Err(EntireError::Growth(
            "sum of 1/|B'(λ)| overflows".to_string(),
        ));
    }
    let growth = estimate_growth_constant(&normalised, eps, circle_samples)?;
    let c_eps = growth.c_eps;
    let rho_normalised = ((-eps).exp() / (4.0 + 8.0 * c_eps * theta.value)).powi(2);
    let rho_delta = (-delta_eff * a.abs()).exp() * rho_normalised;
    let sqrt_rho = rho_normalised.sqrt();

    let mu = normalised.zeros();
    let deltas: Vec<f64> = mu
        .iter()
        .map(|m| sqrt_rho * (-eps * m.abs()).exp())
        .collect();
    let shift_limits: Vec<f64> = b
        .zeros()
        .iter()
        .map(|l| rho_delta * (-delta * l.abs()).exp())
        .collect();

    let mut log_c = NeumaierSum::new();
    log_c.add(4f64.ln() + normalised.a0().abs().ln());
    for d in &deltas {
        log_c.add(2.0 * d.ln_1p());
    }
    let c_delta = log_c.value().exp();
    if !c_delta.is_finite() {
        return Err(EntireError::Growth("C_delta overflows".to_string()));
    }

    Ok(PerturbationPlan {
        original: b.clone(),
        delta,
        delta_eff,
        eps,
        translation: a,
        normalised,
        growth,
        c_eps,
        theta,
        rho_normalised,
        rho_delta,
        deltas,
        shift_limits,
        c_delta,
    })
}

impl PerturbationPlan {
    pub fn check_shifts(&self, shifts: &[f64]) -> Result<(), EntireError> {
        let zeros = self.original.zeros();
        if shifts.len() != zeros.len() {
            return Err(EntireError::ShiftCount {
                expected: zeros.len(),
                got: shifts.len(),
            });
        }
        for ((&lambda, &shift), &limit) in zeros.iter().zip(shifts).zip(&self.shift_limits) {
            if !(shift.abs() <= limit) {
                return Err(EntireError::InadmissibleShift {
                    lambda,
                    shift,
                    limit,
                });
            }
        }
        Ok(())
    }
}

/// The perturbed product together with the checks of its defining bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Perturbation {
    pub shifts: Vec<f64>,
    /// Product with zeros `d_λ = λ + shift_λ`, normalised so that the
    /// translated function `D(z + a)` equals 1 at the origin.
    pub d: EntireProduct,
    /// `log|B'(λ)| <= log C_delta + log|D'(d_λ)|` at every zero.
    pub conclusion: BoundReport,
    pub intervals: IntervalReport,
}

impl Perturbation {
    pub fn pass(&self) -> bool {
        self.conclusion.pass && self.intervals.pass()
    }

    pub fn reports(&self) -> Vec<&BoundReport> {
        let mut r = vec![&self.conclusion];
        r.extend(self.intervals.reports());
        r
    }
}

pub fn perturb(plan: &PerturbationPlan, shifts: &[f64]) -> Result<Perturbation, EntireError> {
    plan.check_shifts(shifts)?;
    let a = plan.translation;
    let b = &plan.original;
    let e: Vec<f64> = b
        .zeros()
        .iter()
        .zip(shifts)
        .map(|(l, s)| l + s - a)
        .collect();
    let d_normalised = EntireProduct::new(
        ZeroSet::new(e.clone(), "perturbed zeros", b.zero_set().extent())?,
        1.0,
    )?;
    let d = if a == 0.0 {
        d_normalised.clone()
    } else {
        let a0 = d_normalised.eval(-a).value();
        let zeros: Vec<f64> = b.zeros().iter().zip(shifts).map(|(l, s)| l + s).collect();
        EntireProduct::new(
            ZeroSet::new(zeros, "perturbed zeros", b.zero_set().extent())?,
            a0,
        )?
    };

    let ln_c = plan.c_delta.ln();
    let mut lhs = Vec::with_capacity(e.len());
    let mut rhs = Vec::with_capacity(e.len());
    for (i, &ei) in e.iter().enumerate() {
        lhs.push(b.derivative_at_index(i).log_abs);
        let j = d_normalised
            .zero_set()
            .index_of(ei)
            .ok_or(EntireError::NotAZero(ei))?;
        rhs.push(ln_c + d_normalised.derivative_at_index(j).log_abs);
    }
    let conclusion = BoundReport::new(
        "log|B'(λ)| <= log C_delta + log|D'(d_λ)|",
        b.zeros().to_vec(),
        lhs,
        rhs,
        CONCLUSION_TOL,
    );
    let intervals = interval_checks(plan, Some(shifts))?;
    Ok(Perturbation {
        shifts: shifts.to_vec(),
        d,
        conclusion,
        intervals,
    })
}

/// Independent uniform shifts in `[-limit, limit]` per zero.
pub fn random_shifts<R: Rng + ?Sized>(plan: &PerturbationPlan, rng: &mut R) -> Vec<f64> {
    plan.shift_limits
        .iter()
        .map(|&l| if l > 0.0 { rng.gen_range(-l..=l) } else { 0.0 })
        .collect()
}

/// Every zero moved by its full admissible radius in direction `sign`.
pub fn maximal_shifts(plan: &PerturbationPlan, sign: f64) -> Vec<f64> {
    plan.shift_limits
        .iter()
        .map(|l| sign.signum() * l)
        .collect()
}
