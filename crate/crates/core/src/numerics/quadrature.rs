use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use serde::Serialize;

use super::{NeumaierSum, NumericsError};

/// Default number of integrand calls allowed per integral.
pub const DEFAULT_BUDGET: usize = 1_000_000;

const BUDGET_ENV: &str = "BERNSTEIN_BUDGET";

/// Budget used by [`integrate_bump`]: `BERNSTEIN_BUDGET` if set to a positive
/// integer, otherwise [`DEFAULT_BUDGET`]. Read once per process.
pub fn default_budget() -> usize {
    static BUDGET: OnceLock<usize> = OnceLock::new();
    *BUDGET.get_or_init(|| {
        std::env::var(BUDGET_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .filter(|&b| b > 0)
            .unwrap_or(DEFAULT_BUDGET)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Several integrals of the same interval computed from shared integrand calls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManyQuadrature<const N: usize> {
    pub values: [f64; N],
    pub error_estimates: [f64; N],
    pub evaluations: usize,
}

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const EVALS_PER_PANEL: usize = 21;

#[derive(Debug, Clone, Copy)]
struct Panel<const N: usize> {
    a: f64,
    b: f64,
    values: [f64; N],
    /// truncation error in excess of the roundoff floor
    errors: [f64; N],
    roundoff: [f64; N],
}

impl<const N: usize> Panel<N> {
    fn priority(&self, tols: &[f64; N]) -> f64 {
        self.errors
            .iter()
            .zip(tols)
            .map(|(e, t)| e / t)
            .fold(0.0, f64::max)
    }

    fn splittable(&self) -> bool {
        let scale = self.a.abs().max(self.b.abs()).max(f64::MIN_POSITIVE);
        self.b - self.a > 1e3 * f64::EPSILON * scale
    }
}

#[derive(Debug, PartialEq)]
struct Queued {
    priority: f64,
    index: usize,
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then_with(|| other.index.cmp(&self.index))
    }
}

fn interior_node(t: f64, a: f64, b: f64) -> f64 {
    if t <= a {
        a.next_up()
    } else if t >= b {
        b.next_down()
    } else {
        t
    }
}

fn gk21<const N: usize, F>(f: &F, a: f64, b: f64) -> Result<Panel<N>, NumericsError>
where
    F: Fn(f64) -> [f64; N],
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |t: f64| -> Result<[f64; N], NumericsError> {
        let t = interior_node(t, a, b);
        let v = f(t);
        match v.iter().find(|x| !x.is_finite()) {
            Some(&bad) => Err(NumericsError::NonFinite { at: t, value: bad }),
            None => Ok(v),
        }
    };

    let fc = eval(center)?;
    let mut kronrod = [0.0; N];
    let mut gauss = [0.0; N];
    let mut absolute = [0.0; N];
    for i in 0..N {
        kronrod[i] = WGK[10] * fc[i];
        absolute[i] = WGK[10] * fc[i].abs();
    }
    for j in 0..10 {
        let dx = half * XGK[j];
        let lo = eval(center - dx)?;
        let hi = eval(center + dx)?;
        for i in 0..N {
            let pair = lo[i] + hi[i];
            kronrod[i] += WGK[j] * pair;
            absolute[i] += WGK[j] * (lo[i].abs() + hi[i].abs());
            if j % 2 == 1 {
                gauss[i] += WG[j / 2] * pair;
            }
        }
    }

    let mut values = [0.0; N];
    let mut errors = [0.0; N];
    let mut roundoff = [0.0; N];
    for i in 0..N {
        values[i] = kronrod[i] * half;
        roundoff[i] = 50.0 * f64::EPSILON * absolute[i] * half.abs();
        errors[i] = (((kronrod[i] - gauss[i]) * half).abs() - roundoff[i]).max(0.0);
    }
    Ok(Panel {
        a,
        b,
        values,
        errors,
        roundoff,
    })
}

fn check_interval(a: f64, b: f64) -> Result<(), NumericsError> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(NumericsError::InvalidInterval { a, b });
    }
    Ok(())
}

/// Adaptive integration of several integrands over `[a, b]` sharing integrand
/// calls. Panels are bisected worst-first until every component satisfies
/// `error_estimate[i] <= tols[i]`. `breaks` are interior points where the
/// integrand is known to be non-smooth; the interval is split there up front.
pub fn integrate_many<const N: usize, F>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tols: [f64; N],
    budget: usize,
) -> Result<ManyQuadrature<N>, NumericsError>
where
    F: Fn(f64) -> [f64; N],
{
    check_interval(a, b)?;
    if let Some(&t) = tols.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(NumericsError::InvalidTolerance(t));
    }

    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&x| x.is_finite() && x > a && x < b)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut nodes = Vec::with_capacity(2 * cuts.len() + 3);
    let mut left = a;
    for right in cuts.into_iter().chain(std::iter::once(b)) {
        nodes.push(left);
        nodes.push(0.5 * (left + right));
        left = right;
    }
    nodes.push(b);
    nodes.dedup();

    let mut panels: Vec<Panel<N>> = Vec::new();
    let mut live: Vec<bool> = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut frozen_err = [0.0; N];
    let mut evaluations = 0usize;

    for w in nodes.windows(2) {
        if w[0] >= w[1] {
            continue;
        }
        if evaluations + EVALS_PER_PANEL > budget {
            return Err(NumericsError::BudgetExhausted {
                budget,
                evaluations,
                value: f64::NAN,
                error_estimate: f64::INFINITY,
            });
        }
        let p = gk21(&f, w[0], w[1])?;
        evaluations += EVALS_PER_PANEL;
        heap.push(Queued {
            priority: p.priority(&tols),
            index: panels.len(),
        });
        panels.push(p);
        live.push(true);
    }

    // frozen panels stay live, so these totals include their errors
    let totals = |panels: &[Panel<N>], live: &[bool]| {
        let mut vals = [NeumaierSum::new(); N];
        let mut errs = [NeumaierSum::new(); N];
        let mut floor = [NeumaierSum::new(); N];
        for (p, _) in panels.iter().zip(live).filter(|(_, l)| **l) {
            for i in 0..N {
                vals[i].add(p.values[i]);
                errs[i].add(p.errors[i]);
                floor[i].add(p.roundoff[i]);
            }
        }
        (
            vals.map(|s| s.value()),
            errs.map(|s| s.value()),
            floor.map(|s| s.value()),
        )
    };

    let (mut run_vals, mut run_errs, _) = totals(&panels, &live);
    loop {
        let converged = (0..N).all(|i| run_errs[i] + frozen_err[i] <= tols[i]);
        if converged {
            let (vals, errs, floor) = totals(&panels, &live);
            if (0..N).all(|i| errs[i] <= tols[i]) {
                return Ok(ManyQuadrature {
                    values: vals,
                    error_estimates: std::array::from_fn(|i| errs[i] + floor[i]),
                    evaluations,
                });
            }
            run_vals = vals;
            run_errs = std::array::from_fn(|i| errs[i] - frozen_err[i]);
        }

        let Some(Queued { index, .. }) = heap.pop() else {
            // only unsplittable panels remain
            let (vals, errs, floor) = totals(&panels, &live);
            return Err(NumericsError::BudgetExhausted {
                budget,
                evaluations,
                value: vals[0],
                error_estimate: errs[0] + floor[0],
            });
        };
        let worst = panels[index];
        if !worst.splittable() {
            for i in 0..N {
                frozen_err[i] += worst.errors[i];
                run_errs[i] -= worst.errors[i];
            }
            continue;
        }
        if evaluations + 2 * EVALS_PER_PANEL > budget {
            return Err(NumericsError::BudgetExhausted {
                budget,
                evaluations,
                value: run_vals[0],
                error_estimate: run_errs[0] + frozen_err[0],
            });
        }

        let mid = 0.5 * (worst.a + worst.b);
        let left = gk21(&f, worst.a, mid)?;
        let right = gk21(&f, mid, worst.b)?;
        evaluations += 2 * EVALS_PER_PANEL;
        live[index] = false;
        for i in 0..N {
            run_vals[i] += left.values[i] + right.values[i] - worst.values[i];
            run_errs[i] += left.errors[i] + right.errors[i] - worst.errors[i];
        }
        for p in [left, right] {
            heap.push(Queued {
                priority: p.priority(&tols),
                index: panels.len(),
            });
            panels.push(p);
            live.push(true);
        }
    }
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` with the default
/// evaluation budget. The endpoints are never sampled.
pub fn integrate_bump<F>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadratureResult, NumericsError>
where
    F: Fn(f64) -> f64,
{
    integrate_bump_with(f, a, b, &[], tol, default_budget())
}

/// [`integrate_bump`] with explicit breakpoints and budget.
pub fn integrate_bump_with<F>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: f64,
    budget: usize,
) -> Result<QuadratureResult, NumericsError>
where
    F: Fn(f64) -> f64,
{
    let r = integrate_many(|t| [f(t)], a, b, breaks, [tol], budget)?;
    Ok(QuadratureResult {
        value: r.values[0],
        error_estimate: r.error_estimates[0],
        evaluations: r.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump(t: f64) -> f64 {
        let u = (1.0 - t) * (1.0 + t);
        if u <= 1e-3 {
            0.0
        } else {
            (-1.0 / u).exp()
        }
    }

    #[test]
    fn weights_are_consistent() {
        let k: f64 = WGK[10] + 2.0 * WGK[..10].iter().sum::<f64>();
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((k - 2.0).abs() < 1e-14);
        assert!((g - 2.0).abs() < 1e-14);
    }

    #[test]
    fn kronrod_rule_exact_for_degree_31() {
        // single panel: check exactness of the raw rule on monomials
        for deg in [0usize, 2, 10, 20, 30] {
            let p = gk21(&|t: f64| [t.powi(deg as i32)], -1.0, 1.0).unwrap();
            let exact = 2.0 / (deg as f64 + 1.0);
            assert!(
                (p.values[0] - exact).abs() < 1e-14,
                "deg {deg}: {}",
                p.values[0]
            );
        }
    }

    #[test]
    fn constant_integrand() {
        let r = integrate_bump(|_| 1.0, 0.0, 1.0, 1e-12).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert!(r.error_estimate <= 1e-12);
        assert!(r.evaluations >= 1);
    }

    #[test]
    fn first_moment_identity() {
        // 2|t|/(t^2-1)^2 exp(-1/(1-t^2)) integrates to 2/e
        let f = |t: f64| {
            let u = (1.0 - t) * (1.0 + t);
            if u <= 1e-3 {
                0.0
            } else {
                2.0 * t.abs() / (u * u) * (-1.0 / u).exp()
            }
        };
        let r = integrate_bump_with(f, -1.0, 1.0, &[0.0], 1e-12, DEFAULT_BUDGET).unwrap();
        assert!(
            (r.value - 2.0 / std::f64::consts::E).abs() < 1e-8,
            "{}",
            r.value
        );
    }

    #[test]
    fn bump_normalisation_matches_reference() {
        // reference from 30-digit quadrature: 0.443993816168079437823...
        let r = integrate_bump(bump, -1.0, 1.0, 1e-14).unwrap();
        assert!(
            (r.value - 0.443_993_816_168_079_4).abs() < 1e-13,
            "{}",
            r.value
        );
    }

    #[test]
    fn endpoint_singular_integrand_is_not_sampled_at_ends() {
        let f = |t: f64| {
            assert!(t > 0.0 && t < 1.0);
            1.0 / t.sqrt().sqrt()
        };
        // integral of t^{-1/4} over (0,1) is 4/3; just make sure no endpoint call happens
        let r = integrate_bump_with(f, 0.0, 1.0, &[], 1e-6, 200_000);
        assert!(r.is_ok() || matches!(r, Err(NumericsError::BudgetExhausted { .. })));
    }

    #[test]
    fn nan_is_reported() {
        let err =
            integrate_bump(|t| if t > 0.5 { f64::NAN } else { t }, 0.0, 1.0, 1e-8).unwrap_err();
        assert!(matches!(err, NumericsError::NonFinite { .. }));
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let err = integrate_bump_with(|t| (1.0 / t).sin(), 1e-6, 1.0, &[], 1e-14, 500).unwrap_err();
        match err {
            NumericsError::BudgetExhausted {
                budget,
                evaluations,
                ..
            } => {
                assert_eq!(budget, 500);
                assert!(evaluations <= 500);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!(
            integrate_bump(|t| t, 1.0, 0.0, 1e-8),
            Err(NumericsError::InvalidInterval { .. })
        ));
        assert!(matches!(
            integrate_bump(|t| t, 0.0, 1.0, 0.0),
            Err(NumericsError::InvalidTolerance(_))
        ));
    }

    #[test]
    fn shared_evaluations_give_each_component() {
        let r = integrate_many(
            |t| [t, t * t, 1.0],
            0.0,
            2.0,
            &[],
            [1e-12; 3],
            DEFAULT_BUDGET,
        )
        .unwrap();
        assert!((r.values[0] - 2.0).abs() < 1e-12);
        assert!((r.values[1] - 8.0 / 3.0).abs() < 1e-12);
        assert!((r.values[2] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn breakpoints_resolve_jumps() {
        let f = |t: f64| if t < 0.3 { 1.0 } else { 2.0 };
        let r = integrate_bump_with(f, 0.0, 1.0, &[0.3], 1e-13, DEFAULT_BUDGET).unwrap();
        assert!((r.value - (0.3 + 1.4)).abs() < 1e-13);
        assert!(r.evaluations < 200);
    }
}
