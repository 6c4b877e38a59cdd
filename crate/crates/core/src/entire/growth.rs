use rayon::prelude::*;
use serde::Serialize;

use super::product::EntireProduct;
use super::EntireError;

pub const DEFAULT_CIRCLE_SAMPLES: usize = 720;

/// Multiplier applied to the sampled maximum. Overestimating the growth
/// constant only makes the derived perturbation radius smaller.
pub const GROWTH_SAFETY_FACTOR: f64 = 1.05;

const COARSE_CIRCLES: usize = 16;
const REFINE_CIRCLES: usize = 16;
const REFINE_ROUNDS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthEstimate {
    /// `GROWTH_SAFETY_FACTOR * sampled_max`.
    pub c_eps: f64,
    /// Largest sampled `exp(-eps|z|) |B(z)|`.
    pub sampled_max: f64,
    /// Radius of the circle where it was found.
    pub argmax_radius: f64,
    pub radii: Vec<f64>,
    pub circle_samples: usize,
    pub note: &'static str,
}

fn geometric(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (l, h) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (l + (h - l) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Estimate `sup_z exp(-eps|z|) |B(z)|` by sampling circles.
///
/// The origin plus 16 geometrically spaced circles from
/// `0.25 min(1, min|λ|)` to `max(10 max|λ|, 4N/eps)` are sampled, then
/// three rounds of 16 circles between the neighbours of the best one so far.
/// The outer radius has to reach past `N/eps`, where `r^N exp(-eps r)`
/// peaks for a product with `N` zeros.
pub fn estimate_growth_constant(
    b: &EntireProduct,
    eps: f64,
    circle_samples: usize,
) -> Result<GrowthEstimate, EntireError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(EntireError::InvalidEps(eps));
    }
    let zs = b.zero_set();
    let n = zs.len() as f64;
    let r_min = 0.25 * zs.min_modulus().min(1.0);
    let r_max = (10.0 * zs.max_modulus()).max(4.0 * n / eps);
    let score = |r: f64| b.max_log_on_circle(r, circle_samples) - eps * r;

    let coarse = geometric(r_min, r_max, COARSE_CIRCLES);
    let coarse_scores: Vec<f64> = coarse.par_iter().map(|&r| score(r)).collect();
    let (best, _) =
        coarse_scores
            .iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, &s)| if s > acc.1 { (i, s) } else { acc },
            );
    let mut samples: Vec<(f64, f64)> = coarse.iter().copied().zip(coarse_scores).collect();
    let (mut lo, mut hi) = (
        coarse[best.saturating_sub(1)],
        coarse[(best + 1).min(COARSE_CIRCLES - 1)],
    );
    for _ in 0..REFINE_ROUNDS {
        let fine = geometric(lo, hi, REFINE_CIRCLES);
        let scores: Vec<f64> = fine.par_iter().map(|&r| score(r)).collect();
        let best = (0..REFINE_CIRCLES).fold(0, |b, i| if scores[i] > scores[b] { i } else { b });
        lo = fine[best.saturating_sub(1)];
        hi = fine[(best + 1).min(REFINE_CIRCLES - 1)];
        samples.extend(fine.into_iter().zip(scores));
    }

    let mut best_log = b.eval(0.0).log_abs;
    let mut argmax_radius = 0.0;
    for &(r, s) in &samples {
        if s > best_log {
            best_log = s;
            argmax_radius = r;
        }
    }
    let sampled_max = best_log.exp();
    if !sampled_max.is_finite() || sampled_max <= 0.0 {
        return Err(EntireError::Growth(format!(
            "sampled maximum exp({best_log}) is not a positive finite number"
        )));
    }
    let radii = samples.iter().map(|&(r, _)| r).collect();
    Ok(GrowthEstimate {
        c_eps: GROWTH_SAFETY_FACTOR * sampled_max,
        sampled_max,
        argmax_radius,
        radii,
        circle_samples,
        note: "growth constant estimated by circle sampling, conservative direction",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entire::zeros::ZeroSet;

    /// `sup_r (1 + r^2) exp(-eps r)` for `B = 1 - z^2`, attained on the
    /// imaginary axis.
    fn pm1_oracle(eps: f64) -> f64 {
        let r = (1.0 + (1.0 - eps * eps).sqrt()) / eps;
        (1.0 + r * r) * (-eps * r).exp()
    }

    #[test]
    fn two_zero_growth_constant() {
        let b = EntireProduct::new(ZeroSet::finite(vec![-1.0, 1.0]).unwrap(), 1.0).unwrap();
        for eps in [0.1, 0.25] {
            let g = estimate_growth_constant(&b, eps, DEFAULT_CIRCLE_SAMPLES).unwrap();
            let oracle = pm1_oracle(eps);
            assert!(g.sampled_max <= oracle * (1.0 + 1e-12));
            assert!(
                g.sampled_max >= oracle * (1.0 - 1e-6),
                "{} vs {oracle}",
                g.sampled_max
            );
            assert_eq!(g.c_eps, GROWTH_SAFETY_FACTOR * g.sampled_max);
        }
    }

    #[test]
    fn stable_under_doubled_sampling() {
        let b = EntireProduct::new(
            ZeroSet::family(
                crate::entire::zeros::Family::NSquared,
                30,
                crate::entire::zeros::Signs::Both,
            )
            .unwrap(),
            1.0,
        )
        .unwrap();
        let g1 = estimate_growth_constant(&b, 0.25, 720).unwrap();
        let g2 = estimate_growth_constant(&b, 0.25, 1440).unwrap();
        assert!((g1.sampled_max / g2.sampled_max - 1.0).abs() < 1e-3);
        assert!(g1.sampled_max >= 1.0);
    }
}
