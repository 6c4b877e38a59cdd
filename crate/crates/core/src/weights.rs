//! Weights on the real line.
//!
//! A [`Weight`] is either *evaluable* (a closure with a stated uniform bound)
//! or *discrete* (finitely many support points with positive values). Sups of
//! discrete weights over intervals are exact; evaluable weights flagged
//! [`Profile::Radial`] (even and nonincreasing in `|x|`) also get exact sups,
//! everything else falls back to [`grid_sup`].

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{grid_sup, NumericsError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeightError {
    #[error("weight evaluated to a non-finite value {value} at x = {x}")]
    NonFinite { x: f64, value: f64 },

    #[error("weight bound must be positive and finite, got {0}")]
    InvalidBound(f64),

    #[error("invalid support point ({x}, {value}): {reason}")]
    InvalidPoint {
        x: f64,
        value: f64,
        reason: &'static str,
    },

    #[error("unknown builtin weight `{0}`")]
    UnknownBuiltin(String),

    #[error("builtin weight `{name}` needs parameter `{param}`")]
    MissingParam { name: String, param: &'static str },

    #[error("invalid weight description: {0}")]
    Parse(String),

    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Shape information that allows exact window suprema.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Profile {
    /// Even and nonincreasing in `|x|`: the sup over an interval is attained
    /// at the point of the interval closest to the origin.
    Radial,
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Builtin {
    Zero,
    /// `exp(-|x|)`
    ExpAbs,
    /// `exp(-x^2)`
    Gauss,
    /// `exp(-|x|^alpha)`
    Freud {
        alpha: f64,
    },
}

impl Builtin {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Builtin::Zero => 0.0,
            Builtin::ExpAbs => (-x.abs()).exp(),
            Builtin::Gauss => (-x * x).exp(),
            Builtin::Freud { alpha } => (-x.abs().powf(alpha)).exp(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Builtin::Zero => "zero",
            Builtin::ExpAbs => "exp_abs",
            Builtin::Gauss => "gauss",
            Builtin::Freud { .. } => "freud",
        }
    }
}

type WeightFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct EvaluableWeight {
    name: String,
    func: WeightFn,
    bound: f64,
    profile: Profile,
}

impl EvaluableWeight {
    pub fn profile(&self) -> Profile {
        self.profile
    }

    /// Value of the underlying function without clamping.
    pub fn raw(&self, x: f64) -> f64 {
        (self.func)(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteWeight {
    points: Vec<f64>,
    values: Vec<f64>,
    bound: f64,
}

impl DiscreteWeight {
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().copied().zip(self.values.iter().copied())
    }

    /// Exact lookup: the stored value when `x` is a support point, else 0.
    pub fn value_at(&self, x: f64) -> f64 {
        match self.points.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => self.values[i],
            Err(_) => 0.0,
        }
    }

    /// Index range of support points inside the closed interval `[lo, hi]`.
    pub fn range_in(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let start = self.points.partition_point(|&p| p < lo);
        let end = self.points.partition_point(|&p| p <= hi);
        start..end.max(start)
    }
}

#[derive(Clone)]
pub enum Weight {
    Evaluable(EvaluableWeight),
    Discrete(DiscreteWeight),
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Evaluable(e) => f
                .debug_struct("Evaluable")
                .field("name", &e.name)
                .field("bound", &e.bound)
                .field("profile", &e.profile)
                .finish(),
            Weight::Discrete(d) => f
                .debug_struct("Discrete")
                .field("points", &d.points.len())
                .field("bound", &d.bound)
                .finish(),
        }
    }
}

fn check_bound(bound: f64) -> Result<(), WeightError> {
    if bound.is_finite() && bound > 0.0 {
        Ok(())
    } else {
        Err(WeightError::InvalidBound(bound))
    }
}

impl Weight {
    pub fn builtin(kind: Builtin, bound: f64) -> Result<Self, WeightError> {
        check_bound(bound)?;
        if let Builtin::Freud { alpha } = kind {
            if !(alpha.is_finite() && alpha > 0.0) {
                return Err(WeightError::Parse(format!(
                    "freud alpha must be positive, got {alpha}"
                )));
            }
        }
        Ok(Weight::Evaluable(EvaluableWeight {
            name: kind.name().to_string(),
            func: Arc::new(move |x| kind.eval(x)),
            bound,
            profile: Profile::Radial,
        }))
    }

    pub fn zero() -> Self {
        Self::builtin(Builtin::Zero, 1.0).expect("valid bound")
    }

    /// An evaluable weight with no shape information.
    pub fn evaluable<F>(name: &str, bound: f64, f: F) -> Result<Self, WeightError>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::with_profile(name, bound, Profile::General, f)
    }

    /// An evaluable weight. Passing [`Profile::Radial`] is a promise that `f`
    /// is even and nonincreasing in `|x|`.
    pub fn with_profile<F>(
        name: &str,
        bound: f64,
        profile: Profile,
        f: F,
    ) -> Result<Self, WeightError>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        check_bound(bound)?;
        Ok(Weight::Evaluable(EvaluableWeight {
            name: name.to_string(),
            func: Arc::new(f),
            bound,
            profile,
        }))
    }

    /// Discrete weight from `(x, value)` pairs in any order.
    pub fn discrete(mut pairs: Vec<(f64, f64)>, bound: f64) -> Result<Self, WeightError> {
        check_bound(bound)?;
        for &(x, v) in &pairs {
            let reason = if !x.is_finite() {
                Some("support point must be finite")
            } else if !(v.is_finite() && v > 0.0) {
                Some("value must be strictly positive")
            } else if v > bound {
                Some("value exceeds the stated bound")
            } else {
                None
            };
            if let Some(reason) = reason {
                return Err(WeightError::InvalidPoint {
                    x,
                    value: v,
                    reason,
                });
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(WeightError::InvalidPoint {
                x: w[0].0,
                value: w[1].1,
                reason: "duplicate support point",
            });
        }
        let (points, values) = pairs.into_iter().unzip();
        Ok(Weight::Discrete(DiscreteWeight {
            points,
            values,
            bound,
        }))
    }

    pub fn bound(&self) -> f64 {
        match self {
            Weight::Evaluable(e) => e.bound,
            Weight::Discrete(d) => d.bound,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Weight::Evaluable(e) => &e.name,
            Weight::Discrete(_) => "discrete",
        }
    }

    pub fn as_discrete(&self) -> Option<&DiscreteWeight> {
        match self {
            Weight::Discrete(d) => Some(d),
            Weight::Evaluable(_) => None,
        }
    }

    pub fn is_radial(&self) -> bool {
        matches!(self, Weight::Evaluable(e) if e.profile == Profile::Radial)
    }

    pub fn eval(&self, x: f64) -> Result<f64, WeightError> {
        eval_weight(self, x)
    }

    /// Supremum of the weight over the closed interval `[lo, hi]` and a point
    /// where it is attained (for discrete weights with no support point in the
    /// interval the sup is 0, reported at `lo`).
    pub fn sup_on(&self, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64), WeightError> {
        if lo > hi {
            return Err(NumericsError::EmptyInterval { lo, hi }.into());
        }
        match self {
            Weight::Discrete(d) => {
                let best = d
                    .range_in(lo, hi)
                    .map(|i| (d.values[i], d.points[i]))
                    .fold((0.0, lo), |acc, c| if c.0 > acc.0 { c } else { acc });
                Ok(best)
            }
            Weight::Evaluable(e) if e.profile == Profile::Radial => {
                let m = closest_to_origin(lo, hi);
                Ok((eval_weight(self, m)?, m))
            }
            Weight::Evaluable(_) => {
                // a NaN from the weight surfaces as NumericsError::NonFinite
                let r = grid_sup(|x| eval_weight(self, x).unwrap_or(f64::NAN), lo, hi, tol)?;
                Ok((r.sup_value, r.arg))
            }
        }
    }
}

/// The point of `[lo, hi]` with the smallest absolute value.
pub fn closest_to_origin(lo: f64, hi: f64) -> f64 {
    if lo > 0.0 {
        lo
    } else if hi < 0.0 {
        hi
    } else {
        0.0
    }
}

/// Discrete: stored value on the support (exact match), 0 elsewhere.
/// Evaluable: the function value clamped to `[0, bound]`.
pub fn eval_weight(w: &Weight, x: f64) -> Result<f64, WeightError> {
    match w {
        Weight::Discrete(d) => Ok(d.value_at(x)),
        Weight::Evaluable(e) => {
            let v = (e.func)(x);
            if v.is_nan() {
                return Err(WeightError::NonFinite { x, value: v });
            }
            Ok(v.clamp(0.0, e.bound))
        }
    }
}

/// `2^-k` for `k = 1..=count`.
pub fn dyadic_deltas(count: u32) -> Vec<f64> {
    (1..=count).map(|k| 0.5f64.powi(k as i32)).collect()
}

/// The default shrinking sequence for [`upper_baire`]: `2^-k`, `k = 1..=30`.
pub fn default_baire_deltas() -> Vec<f64> {
    dyadic_deltas(30)
}

const BAIRE_STALL: f64 = 1e-12;
const BAIRE_SUP_TOL: f64 = 1e-13;

/// Approximates `lim_{d -> 0} sup_{(x-d, x+d)} w` over the given shrinking
/// sequence. Stops early once three consecutive window sups agree within
/// `1e-12`; otherwise returns the sup over the last window.
pub fn upper_baire(w: &Weight, x: f64, deltas: &[f64]) -> Result<f64, WeightError> {
    if let Weight::Discrete(d) = w {
        // finitely many points are isolated
        return Ok(d.value_at(x));
    }
    let mut history: Vec<f64> = Vec::with_capacity(3);
    let mut last = eval_weight(w, x)?;
    for &delta in deltas {
        let (v, _) = w.sup_on(x - delta, x + delta, BAIRE_SUP_TOL)?;
        last = v;
        history.push(v);
        if history.len() > 3 {
            history.remove(0);
        }
        if history.len() == 3 {
            let hi = history.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = history.iter().copied().fold(f64::INFINITY, f64::min);
            if hi - lo <= BAIRE_STALL {
                return Ok(v);
            }
        }
    }
    Ok(last)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassReport {
    pub bounded_ok: bool,
    pub support_unbounded_ok: bool,
    pub decay_ok_up_to: u32,
    pub usc_ok: bool,
    pub notes: Vec<String>,
}

const USC_PROBES: usize = 64;
const USC_TOL: f64 = 1e-12;

/// Diagnostic probe of membership in the weight classes: boundedness,
/// unbounded support, faster-than-polynomial decay and upper semicontinuity.
/// Never fails on a weight that is merely outside the class.
pub fn class_check(w: &Weight, n_max: u32, radius: f64) -> Result<ClassReport, WeightError> {
    let radius = if radius.is_finite() && radius > 0.0 {
        radius
    } else {
        1.0
    };
    let mut notes = Vec::new();

    let bounded_ok = match w {
        Weight::Discrete(d) => d
            .values
            .iter()
            .all(|&v| v.is_finite() && v >= 0.0 && v <= d.bound),
        Weight::Evaluable(e) => (0..=2000).all(|i| {
            let x = -radius + 2.0 * radius * i as f64 / 2000.0;
            let v = e.raw(x);
            v.is_finite() && v >= 0.0 && v <= e.bound
        }),
    };
    if !bounded_ok {
        notes.push("sampled values leave [0, bound]".to_string());
    }

    let support_unbounded_ok = match w {
        Weight::Discrete(d) => d.points.iter().any(|p| p.abs() >= 0.5 * radius),
        Weight::Evaluable(_) => {
            let mut any = false;
            for s in [radius, 0.75 * radius, 0.5 * radius] {
                any |= eval_weight(w, s)? > 0.0 || eval_weight(w, -s)? > 0.0;
            }
            any
        }
    };
    if !support_unbounded_ok {
        notes.push(format!("no support found beyond |x| >= {}", 0.5 * radius));
    }

    let mut decay_ok_up_to = 0;
    for n in 0..=n_max {
        if decays(w, n, radius)? {
            decay_ok_up_to = n;
        } else {
            notes.push(format!("|x|^{n} w(x) shows no decay up to |x| = {radius}"));
            break;
        }
    }

    let deltas = dyadic_deltas(50);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut probes: Vec<f64> = (0..USC_PROBES)
        .map(|_| rng.gen_range(-radius..=radius))
        .collect();
    if let Weight::Discrete(d) = w {
        probes.extend(d.points.iter().copied().take(USC_PROBES));
    }
    let mut usc_ok = true;
    for x in probes {
        let m = upper_baire(w, x, &deltas)?;
        if (m - eval_weight(w, x)?).abs() > USC_TOL {
            usc_ok = false;
            notes.push(format!("w({x}) differs from its upper Baire value {m}"));
            break;
        }
    }

    Ok(ClassReport {
        bounded_ok,
        support_unbounded_ok,
        decay_ok_up_to,
        usc_ok,
        notes,
    })
}

/// Whether `|x|^n w(x)` is visibly decreasing to zero over the outer three
/// octaves of the probe range, on every side where the weight lives.
fn decays(w: &Weight, n: u32, radius: f64) -> Result<bool, WeightError> {
    let g = |x: f64, v: f64| x.abs().powi(n as i32) * v;
    let trend = |seq: &[f64]| {
        if seq.len() < 2 {
            return true;
        }
        let monotone = seq.windows(2).all(|p| p[1] <= p[0]);
        let last = *seq.last().unwrap();
        monotone && (last == 0.0 || last < 0.5 * seq[0])
    };
    match w {
        Weight::Evaluable(_) => {
            for sign in [1.0, -1.0] {
                let mut seq = Vec::new();
                for j in (0..=3).rev() {
                    let x = sign * radius * 0.5f64.powi(j);
                    seq.push(g(x, eval_weight(w, x)?));
                }
                if !trend(&seq) {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Weight::Discrete(d) => {
            for positive in [true, false] {
                let mut side: Vec<(f64, f64)> = d
                    .iter()
                    .filter(|(p, _)| if positive { *p > 0.0 } else { *p < 0.0 })
                    .map(|(p, v)| (p.abs(), v))
                    .collect();
                side.sort_by(|a, b| a.0.total_cmp(&b.0));
                let Some(&(outer, _)) = side.last() else {
                    continue;
                };
                let reach = outer.min(radius);
                let seq: Vec<f64> = side
                    .iter()
                    .filter(|(p, _)| *p >= reach / 8.0 && *p <= reach)
                    .map(|&(p, v)| g(p, v))
                    .collect();
                if !trend(&seq) {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Step {
    pub n: i64,
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
}

/// Piecewise-constant majorant on the log-spaced segments
/// `[sign(n) log(1+|n|), sign(n) log(1+|n+1|))`.
///
/// With `sign(0) = 0` the `n = 0` segment is the single point `{0}`, so the
/// steps leave `(0, log 2)` uncovered; [`StepWeight::covers`] reports this.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepWeight {
    pub steps: Vec<Step>,
}

impl StepWeight {
    fn find(&self, x: f64) -> Option<&Step> {
        self.steps.iter().find(|s| s.lo <= x && x < s.hi)
    }

    pub fn covers(&self, x: f64) -> bool {
        self.find(x).is_some()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.find(x).map_or(0.0, |s| s.value)
    }
}

impl From<StepWeight> for Weight {
    fn from(steps: StepWeight) -> Self {
        let bound = steps
            .steps
            .iter()
            .map(|s| s.value)
            .fold(f64::MIN_POSITIVE, f64::max);
        Weight::Evaluable(EvaluableWeight {
            name: "step".to_string(),
            func: Arc::new(move |x| steps.eval(x)),
            bound,
            profile: Profile::General,
        })
    }
}

fn signum_int(n: i64) -> f64 {
    match n.cmp(&0) {
        std::cmp::Ordering::Greater => 1.0,
        std::cmp::Ordering::Less => -1.0,
        std::cmp::Ordering::Equal => 0.0,
    }
}

/// Segment endpoints `(sign(n) log(1+|n|), sign(n) log(1+|n+1|))`.
pub fn step_segment(n: i64) -> (f64, f64) {
    let s = signum_int(n);
    // `+ 0.0` turns the -0.0 at n = -1 into 0.0.
    let a = s * (n.unsigned_abs() as f64).ln_1p() + 0.0;
    let b = s * ((n + 1).unsigned_abs() as f64).ln_1p() + 0.0;
    (a, b)
}

const STEP_SUP_TOL: f64 = 1e-12;

/// The step majorant for `n` in `[-n_range, n_range]`, each value being the
/// sup of `w` over the closed segment.
pub fn step_weight(w: &Weight, n_range: u32) -> Result<StepWeight, WeightError> {
    let n_range = i64::from(n_range.max(1));
    let mut steps = Vec::with_capacity(2 * n_range as usize + 1);
    for n in -n_range..=n_range {
        let (a, b) = step_segment(n);
        let (lo, hi) = (a.min(b), a.max(b));
        let (value, _) = w.sup_on(lo, hi, STEP_SUP_TOL)?;
        steps.push(Step {
            n,
            lo: a,
            hi: b,
            value,
        });
    }
    Ok(StepWeight { steps })
}

/// JSON description of a weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WeightSpec {
    Discrete {
        points: Vec<[f64; 2]>,
        bound: f64,
    },
    Builtin {
        name: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
        bound: f64,
    },
}

impl WeightSpec {
    pub fn build(&self) -> Result<Weight, WeightError> {
        match self {
            WeightSpec::Discrete { points, bound } => {
                Weight::discrete(points.iter().map(|p| (p[0], p[1])).collect(), *bound)
            }
            WeightSpec::Builtin {
                name,
                params,
                bound,
            } => {
                let kind = match name.as_str() {
                    "zero" => Builtin::Zero,
                    "exp_abs" => Builtin::ExpAbs,
                    "gauss" => Builtin::Gauss,
                    "freud" => Builtin::Freud {
                        alpha: *params
                            .get("alpha")
                            .ok_or_else(|| WeightError::MissingParam {
                                name: name.clone(),
                                param: "alpha",
                            })?,
                    },
                    other => return Err(WeightError::UnknownBuiltin(other.to_string())),
                };
                Weight::builtin(kind, *bound)
            }
        }
    }
}

impl Weight {
    pub fn from_json(text: &str) -> Result<Self, WeightError> {
        let spec: WeightSpec =
            serde_json::from_str(text).map_err(|e| WeightError::Parse(e.to_string()))?;
        spec.build()
    }
}
