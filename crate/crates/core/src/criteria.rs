//! Criterion sums over the zeros of a product, as convergence diagnostics.
//!
//! The basic sum is `Σ 1/((1+λ²)^k w(λ) |B'(λ)|)` over the zeros `λ` of `B`.
//! Its finiteness for some `B` with zeros in the support of `w` decides
//! whether polynomials fail to be dense in the weighted space; with `k`
//! varying over a discrete weight, the first `k` at which the sum becomes
//! finite locates singular density. A finite truncation cannot decide
//! convergence, so every report carries a three-way verdict.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::entire::{EntireError, EntireProduct, Extent, ZeroSet};
use crate::numerics::NeumaierSum;
use crate::weights::{eval_weight, Weight, WeightError};

/// A report converges when the last term is below `TAIL_RTOL * (sum + 1)`
/// and the last ten terms changed the sum by less than `GROWTH_RTOL`.
pub const TAIL_RTOL: f64 = 1e-10;
pub const GROWTH_RTOL: f64 = 1e-6;

/// Log-log slope of term against position beyond which the terms are
/// summable with room to spare, or clearly not summable.
pub const CONVERGENT_SLOPE: f64 = -1.5;
pub const DIVERGENT_SLOPE: f64 = -1.0;

/// Fewest terms the slope fit is run on.
const MIN_SLOPE_TERMS: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CriteriaError {
    #[error("zero {lambda} lies outside the support of the weight (w = {value})")]
    NotInSupport { lambda: f64, value: f64 },

    #[error("singular profiles need a discrete weight, got `{0}`")]
    NotDiscrete(String),

    #[error("k_max must be at least 1, got {0}")]
    InvalidKMax(u32),

    #[error("selector `{selector}` keeps {count} zeros, at least 2 are needed")]
    DegenerateFamily { selector: String, count: usize },

    #[error(
        "unknown selector `{0}` (expected all, every_other, positive, negative or indices:i,j,...)"
    )]
    UnknownSelector(String),

    #[error("selector index {index} out of range for {len} zeros")]
    SelectorIndex { index: usize, len: usize },

    #[error(transparent)]
    Weight(#[from] WeightError),

    #[error(transparent)]
    Entire(#[from] EntireError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Converged,
    Diverging,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub k: u32,
    /// Zeros in the order summed (increasing `|λ|`).
    pub lambdas: Vec<f64>,
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub sum: f64,
    /// Magnitude of the last term.
    pub tail_indicator: f64,
    /// Slope of `log term` against `log position` over the last half of the
    /// terms, when there are enough of them.
    pub slope: Option<f64>,
    pub verdict: Verdict,
    pub extent: Extent,
    pub notes: Vec<String>,
}

impl CriterionReport {
    /// CSV with columns `lambda,term,partial_sum`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("# schema=1\nlambda,term,partial_sum\n");
        for ((l, t), s) in self.lambdas.iter().zip(&self.terms).zip(&self.partial_sums) {
            let _ = writeln!(out, "{l:.16e},{t:.16e},{s:.16e}");
        }
        out
    }

    pub fn term_at(&self, lambda: f64) -> Option<f64> {
        self.lambdas
            .iter()
            .position(|&l| l == lambda)
            .map(|i| self.terms[i])
    }
}

/// Least-squares slope of `ln y` against `ln x`.
fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

fn classify(
    terms: &[f64],
    partial: &[f64],
    extent: Extent,
    notes: &mut Vec<String>,
) -> (Option<f64>, Verdict) {
    let n = terms.len();
    let sum = partial[n - 1];
    let tail = terms[n - 1];
    let slope = if n >= 2 * MIN_SLOPE_TERMS {
        let pts: Vec<(f64, f64)> = (n / 2..n).map(|i| ((i + 1) as f64, terms[i])).collect();
        Some(log_log_slope(&pts))
    } else {
        None
    };

    if extent == Extent::Finite {
        notes.push("finite zero set: the sum is exact".to_string());
        return (slope, Verdict::Converged);
    }
    let before = if n > 10 { partial[n - 11] } else { 0.0 };
    let growth = (sum - before) / sum;
    if tail < TAIL_RTOL * (sum + 1.0) && growth < GROWTH_RTOL {
        return (slope, Verdict::Converged);
    }
    let verdict = match slope {
        Some(s) if s <= CONVERGENT_SLOPE => {
            notes.push(format!("terms decay like position^{s:.3}: summable"));
            Verdict::Converged
        }
        Some(s) if s >= DIVERGENT_SLOPE => {
            notes.push(format!("terms behave like position^{s:.3}: not summable"));
            Verdict::Diverging
        }
        Some(s) => {
            notes.push(format!("terms behave like position^{s:.3}: undecided"));
            Verdict::Inconclusive
        }
        None => {
            notes.push(format!(
                "fewer than {} terms: no decay fit",
                2 * MIN_SLOPE_TERMS
            ));
            Verdict::Inconclusive
        }
    };
    (slope, verdict)
}

/// `Σ 1/((1+λ²)^k w(λ) |B'(λ)|)` over the zeros of `b`, in increasing `|λ|`.
pub fn debranges_sum(
    w: &Weight,
    b: &EntireProduct,
    k: u32,
) -> Result<CriterionReport, CriteriaError> {
    let zs = b.zero_set();
    let mut lambdas = Vec::with_capacity(zs.len());
    let mut terms = Vec::with_capacity(zs.len());
    let mut partial_sums = Vec::with_capacity(zs.len());
    let mut sum = NeumaierSum::new();
    for i in zs.order_by_modulus() {
        let lambda = zs.zeros()[i];
        let value = eval_weight(w, lambda)?;
        if !(value > 0.0) {
            return Err(CriteriaError::NotInSupport { lambda, value });
        }
        let log_term = -(f64::from(k) * (lambda * lambda).ln_1p()
            + value.ln()
            + b.derivative_at_index(i).log_abs);
        let term = log_term.exp();
        sum.add(term);
        lambdas.push(lambda);
        terms.push(term);
        partial_sums.push(sum.value());
    }
    let mut notes = Vec::new();
    let (slope, verdict) = classify(&terms, &partial_sums, zs.extent(), &mut notes);
    Ok(CriterionReport {
        k,
        sum: sum.value(),
        tail_indicator: *terms.last().unwrap_or(&0.0),
        lambdas,
        terms,
        partial_sums,
        slope,
        verdict,
        extent: zs.extent(),
        notes,
    })
}

/// Per-term comparison of the same sum over two truncations of one family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationComparison {
    pub common: usize,
    /// Largest `|term_large / term_small - 1|` over the common zeros. It
    /// measures how much the omitted factors move `B'(λ)`.
    pub max_relative_change: f64,
    pub worst_lambda: f64,
}

pub fn compare_truncations(
    small: &CriterionReport,
    large: &CriterionReport,
) -> TruncationComparison {
    let mut out = TruncationComparison {
        common: 0,
        max_relative_change: 0.0,
        worst_lambda: f64::NAN,
    };
    for (l, t) in small.lambdas.iter().zip(&small.terms) {
        if let Some(u) = large.term_at(*l) {
            out.common += 1;
            let change = (u / t - 1.0).abs();
            if change > out.max_relative_change || out.worst_lambda.is_nan() {
                out.max_relative_change = out.max_relative_change.max(change);
                out.worst_lambda = *l;
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularProfile {
    pub reports: Vec<CriterionReport>,
    /// Smallest `n` with a diverging sum at `k = n` and a converged one at
    /// `k = n + 1`.
    pub n_estimate: Option<u32>,
    pub note: String,
}

/// [`debranges_sum`] for `k = 0..=k_max` over a discrete weight.
pub fn singular_profile(
    w: &Weight,
    e: &EntireProduct,
    k_max: u32,
) -> Result<SingularProfile, CriteriaError> {
    if w.as_discrete().is_none() {
        return Err(CriteriaError::NotDiscrete(w.name().to_string()));
    }
    if k_max < 1 {
        return Err(CriteriaError::InvalidKMax(k_max));
    }
    let reports = (0..=k_max)
        .map(|k| debranges_sum(w, e, k))
        .collect::<Result<Vec<_>, _>>()?;
    let n_estimate = reports
        .windows(2)
        .find(|p| p[0].verdict == Verdict::Diverging && p[1].verdict == Verdict::Converged)
        .map(|p| p[0].k);
    let note = if e.zero_set().extent() == Extent::Finite {
        "finite truncation: all partial sums converge".to_string()
    } else if n_estimate.is_none() {
        "no diverging-to-converged transition observed".to_string()
    } else {
        "transition read off the truncated sums".to_string()
    };
    Ok(SingularProfile {
        reports,
        n_estimate,
        note,
    })
}

/// Which zeros of `E` a sub-product keeps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Selector {
    All,
    /// Every other zero in increasing order, starting with the smallest.
    EveryOther,
    Positive,
    Negative,
    Indices(Vec<usize>),
}

impl FromStr for Selector {
    type Err = CriteriaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(Selector::All),
            "every_other" => Ok(Selector::EveryOther),
            "positive" => Ok(Selector::Positive),
            "negative" => Ok(Selector::Negative),
            _ => {
                let list = s
                    .strip_prefix("indices:")
                    .ok_or_else(|| CriteriaError::UnknownSelector(s.to_string()))?;
                list.split(',')
                    .map(|t| t.trim().parse::<usize>())
                    .collect::<Result<Vec<_>, _>>()
                    .map(Selector::Indices)
                    .map_err(|_| CriteriaError::UnknownSelector(s.to_string()))
            }
        }
    }
}

impl std::fmt::Display for Selector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Selector::All => f.write_str("all"),
            Selector::EveryOther => f.write_str("every_other"),
            Selector::Positive => f.write_str("positive"),
            Selector::Negative => f.write_str("negative"),
            Selector::Indices(ix) => {
                let parts: Vec<String> = ix.iter().map(usize::to_string).collect();
                write!(f, "indices:{}", parts.join(","))
            }
        }
    }
}

impl Selector {
    /// Indices into the increasing zero list.
    pub fn select(&self, zeros: &[f64]) -> Result<Vec<usize>, CriteriaError> {
        let all = 0..zeros.len();
        Ok(match self {
            Selector::All => all.collect(),
            Selector::EveryOther => all.step_by(2).collect(),
            Selector::Positive => all.filter(|&i| zeros[i] > 0.0).collect(),
            Selector::Negative => all.filter(|&i| zeros[i] < 0.0).collect(),
            Selector::Indices(ix) => {
                if let Some(&index) = ix.iter().find(|&&i| i >= zeros.len()) {
                    return Err(CriteriaError::SelectorIndex {
                        index,
                        len: zeros.len(),
                    });
                }
                let mut ix = ix.clone();
                ix.sort_unstable();
                ix.dedup();
                ix
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubproductReport {
    pub selector: String,
    pub kept: usize,
    pub one_sided: bool,
    pub report: CriterionReport,
    pub notes: Vec<String>,
}

/// Note attached to every sub-product run.
pub const QUANTIFIER_NOTE: &str =
    "only the supplied sub-products are checked; the statement over all sub-products with a transcendental quotient is not verified";

/// The criterion sum with `F'` in place of `E'`, where `F` keeps the selected
/// zeros of `E` and its value at the origin.
pub fn subproduct_sums(
    w: &Weight,
    e: &EntireProduct,
    selectors: &[Selector],
) -> Result<Vec<SubproductReport>, CriteriaError> {
    let zeros = e.zeros();
    let two_sided =
        zeros.first().is_some_and(|&z| z < 0.0) && zeros.last().is_some_and(|&z| z > 0.0);
    selectors
        .iter()
        .map(|sel| {
            let ix = sel.select(zeros)?;
            if ix.len() < 2 {
                return Err(CriteriaError::DegenerateFamily {
                    selector: sel.to_string(),
                    count: ix.len(),
                });
            }
            let subset: ZeroSet = e
                .zero_set()
                .subset(&ix, &format!("{} of {}", sel, e.zero_set().note()))?;
            let kept: Vec<f64> = subset.zeros().to_vec();
            let f = EntireProduct::new(subset, e.a0())?;
            let one_sided = two_sided && (kept[0] > 0.0 || kept[kept.len() - 1] < 0.0);
            let mut notes = vec![QUANTIFIER_NOTE.to_string()];
            if one_sided {
                notes.push("one-sided family".to_string());
            }
            if 2 * ix.len() < zeros.len() {
                notes.push("keeps fewer than half of the zeros".to_string());
            }
            Ok(SubproductReport {
                selector: sel.to_string(),
                kept: ix.len(),
                one_sided,
                report: debranges_sum(w, &f, 0)?,
                notes,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entire::{Family, Signs};
    use crate::weights::Builtin;

    fn pm1() -> EntireProduct {
        EntireProduct::new(ZeroSet::finite(vec![-1.0, 1.0]).unwrap(), 1.0).unwrap()
    }

    fn squares(n: u32) -> EntireProduct {
        EntireProduct::new(
            ZeroSet::family(Family::NSquared, n, Signs::Both).unwrap(),
            1.0,
        )
        .unwrap()
    }

    fn on_zeros(b: &EntireProduct, value: impl Fn(f64) -> f64) -> Weight {
        Weight::discrete(b.zeros().iter().map(|&l| (l, value(l))).collect(), 1.0).unwrap()
    }

    #[test]
    fn two_point_sums_are_exact() {
        let w = on_zeros(&pm1(), |_| 0.5);
        let r0 = debranges_sum(&w, &pm1(), 0).unwrap();
        assert_eq!(r0.sum, 2.0);
        assert_eq!(r0.verdict, Verdict::Converged);
        assert_eq!(debranges_sum(&w, &pm1(), 1).unwrap().sum, 1.0);
    }

    #[test]
    fn support_violation_names_the_zero() {
        let w = Weight::discrete(vec![(1.0, 0.5)], 1.0).unwrap();
        match debranges_sum(&w, &pm1(), 0) {
            Err(CriteriaError::NotInSupport { lambda, .. }) => assert_eq!(lambda, -1.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn constant_weight_gives_theta() {
        let b = squares(30);
        let w = on_zeros(&b, |_| 1.0);
        let r = debranges_sum(&w, &b, 0).unwrap();
        let theta = b.theta().value;
        assert!((r.sum / theta - 1.0).abs() < 1e-12);
        let half = on_zeros(&b, |_| 0.5);
        assert!((debranges_sum(&half, &b, 0).unwrap().sum / (2.0 * theta) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constructed_profile_transition() {
        let e = squares(40);
        let pairs: Vec<(f64, f64)> = e
            .zeros()
            .iter()
            .enumerate()
            .map(|(i, &l)| (l, 1.0 / ((1.0 + l * l) * e.derivative_at_index(i).abs())))
            .collect();
        let bound = pairs.iter().fold(0.0, |m: f64, p| m.max(p.1));
        let w = Weight::discrete(pairs, bound).unwrap();
        let p = singular_profile(&w, &e, 3).unwrap();
        for (k, r) in p.reports.iter().enumerate() {
            for (l, t) in r.lambdas.iter().zip(&r.terms) {
                let expect = (1.0 + l * l).powi(1 - k as i32);
                assert!((t / expect - 1.0).abs() < 1e-12, "k = {k}, λ = {l}");
            }
        }
        assert_eq!(p.reports[1].verdict, Verdict::Diverging);
        assert_eq!(p.reports[2].verdict, Verdict::Converged);
        assert_eq!(p.n_estimate, Some(1));
    }

    #[test]
    fn profile_guards() {
        let w = on_zeros(&pm1(), |_| 0.5);
        let p = singular_profile(&w, &pm1(), 2).unwrap();
        assert_eq!(p.n_estimate, None);
        assert!(p.note.contains("finite"));
        assert!(matches!(
            singular_profile(&w, &pm1(), 0),
            Err(CriteriaError::InvalidKMax(0))
        ));
        let g = Weight::builtin(Builtin::Gauss, 1.0).unwrap();
        assert!(matches!(
            singular_profile(&g, &pm1(), 2),
            Err(CriteriaError::NotDiscrete(_))
        ));
    }

    #[test]
    fn monotone_in_k() {
        let b = squares(20);
        let w = Weight::builtin(Builtin::Freud { alpha: 0.5 }, 1.0).unwrap();
        let r0 = debranges_sum(&w, &b, 0).unwrap();
        let r1 = debranges_sum(&w, &b, 1).unwrap();
        assert!(r0.terms.iter().all(|&t| t > 0.0));
        assert!(r0.partial_sums.windows(2).all(|p| p[1] >= p[0]));
        assert!(r1
            .partial_sums
            .iter()
            .zip(&r0.partial_sums)
            .all(|(a, b)| a <= b));
    }

    #[test]
    fn two_truncations_agree_on_small_zeros() {
        let w = Weight::builtin(Builtin::Freud { alpha: 0.5 }, 1.0).unwrap();
        let small = debranges_sum(&w, &squares(40), 0).unwrap();
        let large = debranges_sum(&w, &squares(80), 0).unwrap();
        let cmp = compare_truncations(&small, &large);
        assert_eq!(cmp.common, 80);
        assert_eq!(cmp.worst_lambda.abs(), 1600.0);
        // The omitted factors change B'(1) by prod (1 - 1/n^4), n = 41..80.
        let t1 = large.term_at(1.0).unwrap() / small.term_at(1.0).unwrap();
        let expect: f64 = (41..=80)
            .map(|n: i32| 1.0 / (1.0 - 1.0 / f64::from(n).powi(4)))
            .product();
        assert!((t1 / expect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn selectors() {
        let z = [-4.0, -1.0, 1.0, 4.0];
        assert_eq!(Selector::EveryOther.select(&z).unwrap(), vec![0, 2]);
        assert_eq!(Selector::Positive.select(&z).unwrap(), vec![2, 3]);
        assert_eq!(
            "indices:3,1"
                .parse::<Selector>()
                .unwrap()
                .select(&z)
                .unwrap(),
            vec![1, 3]
        );
        assert!("indices:9".parse::<Selector>().unwrap().select(&z).is_err());
        assert!("bogus".parse::<Selector>().is_err());
        assert_eq!(
            "every_other".parse::<Selector>().unwrap().to_string(),
            "every_other"
        );
    }

    #[test]
    fn subproducts() {
        let e = squares(40);
        let w = on_zeros(&e, |l| (-l.abs().sqrt()).exp());
        let full = debranges_sum(&w, &e, 0).unwrap();
        let reps = subproduct_sums(
            &w,
            &e,
            &[Selector::All, Selector::EveryOther, Selector::Positive],
        )
        .unwrap();
        assert_eq!(reps[0].report.terms, full.terms);
        assert!(!reps[0].one_sided);
        assert!(reps[2].one_sided);
        assert!(reps[2].notes.iter().any(|n| n == "one-sided family"));
        // |E'(λ)| = |F'(λ)| * prod over dropped μ of |1 - λ/μ|.
        let f = &reps[1].report;
        for (l, t) in f.lambdas.iter().zip(&f.terms) {
            let dropped: f64 = e
                .zeros()
                .iter()
                .enumerate()
                .filter(|(i, _)| i % 2 == 1)
                .map(|(_, m)| (1.0 - l / m).abs())
                .product();
            let te = full.term_at(*l).unwrap();
            assert!((t / (te * dropped) - 1.0).abs() < 1e-10, "λ = {l}");
        }
        let one = Selector::Indices(vec![0]);
        assert!(matches!(
            subproduct_sums(&w, &e, &[one]),
            Err(CriteriaError::DegenerateFamily { count: 1, .. })
        ));
    }

    #[test]
    fn dropping_large_factors_shrinks_derivative() {
        let e = EntireProduct::new(
            ZeroSet::family(Family::Lacunary2n, 12, Signs::Both).unwrap(),
            1.0,
        )
        .unwrap();
        let w = on_zeros(&e, |_| 1.0);
        let full = debranges_sum(&w, &e, 0).unwrap();
        let reps = subproduct_sums(&w, &e, &[Selector::Positive]).unwrap();
        let kept = Selector::Positive.select(e.zeros()).unwrap();
        let mut checked = 0;
        for (l, t) in reps[0].report.lambdas.iter().zip(&reps[0].report.terms) {
            let all_large = e
                .zeros()
                .iter()
                .enumerate()
                .filter(|(i, _)| !kept.contains(i))
                .all(|(_, m)| (1.0 - l / m).abs() > 1.0);
            if all_large {
                checked += 1;
                assert!(*t > full.term_at(*l).unwrap());
            }
        }
        assert_eq!(checked, 12);
    }

    #[test]
    fn csv_layout() {
        let w = on_zeros(&pm1(), |_| 0.5);
        let csv = debranges_sum(&w, &pm1(), 0).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# schema=1");
        assert_eq!(lines[1], "lambda,term,partial_sum");
        assert_eq!(
            lines[2],
            "-1.0000000000000000e0,1.0000000000000000e0,1.0000000000000000e0"
        );
        assert_eq!(lines.len(), 4);
    }
}
