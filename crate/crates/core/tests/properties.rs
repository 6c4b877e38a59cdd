use std::sync::OnceLock;

use bernstein_core::criteria::debranges_sum;
use bernstein_core::entire::{
    perturb, perturbation_plan, ratio_bound_check, EntireProduct, Family, PerturbationPlan, Signs,
    ZeroSet, DEFAULT_CIRCLE_SAMPLES,
};
use bernstein_core::numerics::integrate_bump;
use bernstein_core::smoothing::{beta, omega_rho, sup_smoothing, Kernel};
use bernstein_core::weights::Weight;
use proptest::prelude::*;

fn discrete_weight() -> impl Strategy<Value = Weight> {
    prop::collection::btree_map(-40i32..40, 0.0f64..3.0, 1..12).prop_map(|m| {
        let pairs: Vec<(f64, f64)> = m
            .into_iter()
            .map(|(p, v)| (f64::from(p) * 0.5, v))
            .collect();
        let bound = pairs.iter().fold(0.0f64, |b, p| b.max(p.1));
        Weight::discrete(pairs, bound).unwrap()
    })
}

fn small_zero_set() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::btree_set(1i32..200, 1..7).prop_flat_map(|mags| {
        let n = mags.len();
        (Just(mags), prop::collection::vec(any::<bool>(), n)).prop_map(|(mags, signs)| {
            mags.into_iter()
                .zip(signs)
                .map(|(m, neg)| {
                    if neg {
                        -f64::from(m) / 20.0
                    } else {
                        f64::from(m) / 20.0
                    }
                })
                .collect()
        })
    })
}

fn squares_plan() -> &'static PerturbationPlan {
    static PLAN: OnceLock<PerturbationPlan> = OnceLock::new();
    PLAN.get_or_init(|| {
        let b = EntireProduct::new(
            ZeroSet::family(Family::NSquared, 12, Signs::Both).unwrap(),
            1.0,
        )
        .unwrap();
        perturbation_plan(&b, 0.5, DEFAULT_CIRCLE_SAMPLES).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn omega_is_monotone_in_rho(w in discrete_weight(), eps in 0.05f64..1.0, r1 in 0.01f64..1.0, r2 in 0.01f64..1.0, x in -25.0f64..25.0) {
        let (lo, hi) = (r1.min(r2), r1.max(r2));
        prop_assert!(omega_rho(&w, eps, lo, x).unwrap() <= omega_rho(&w, eps, hi, x).unwrap());
    }

    #[test]
    fn majorant_chain(w in discrete_weight(), eps in 0.05f64..1.0, x in -25.0f64..25.0) {
        let b = beta(&w, eps, x).unwrap();
        let half = omega_rho(&w, eps, 0.5, x).unwrap();
        let one = sup_smoothing(&w, eps, x).unwrap();
        prop_assert!(b <= half && half <= one);
    }

    #[test]
    fn kernel_has_unit_mass(width in 1e-3f64..10.0) {
        let k = Kernel::new(width).unwrap();
        let mass = integrate_bump(|t| k.eval(t).unwrap(), -width, width, 1e-13).unwrap().value;
        prop_assert!((mass - 1.0).abs() < 1e-10, "mass {mass} for width {width}");
    }

    #[test]
    fn log_domain_product_matches_direct_product(zeros in small_zero_set(), a0 in -5.0f64..5.0, x in -10.0f64..10.0) {
        prop_assume!(a0.abs() > 1e-3);
        let b = EntireProduct::new(ZeroSet::finite(zeros.clone()).unwrap(), a0).unwrap();
        let direct = zeros.iter().fold(a0, |p, &l| p * (1.0 - x / l));
        let scale = zeros.iter().fold(a0.abs(), |p, &l| p * (1.0 + (x / l).abs()));
        prop_assert!((b.eval(x).value() - direct).abs() <= 1e-12 * scale);
    }

    #[test]
    fn leading_coefficient_scaling(zeros in small_zero_set(), c in 0.01f64..100.0) {
        let b = EntireProduct::new(ZeroSet::finite(zeros).unwrap(), 1.0).unwrap();
        let scaled = b.with_a0(c).unwrap();
        let theta = b.theta().value;
        prop_assert!((scaled.theta().value * c / theta - 1.0).abs() < 1e-12);
        for i in 0..b.zeros().len() {
            let diff = scaled.derivative_at_index(i).log_abs - b.derivative_at_index(i).log_abs;
            prop_assert!((diff - c.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn ratio_bound_holds_under_its_hypotheses(
        delta in 0.01f64..0.99,
        a_gap in 0.0f64..10.0,
        shift in -0.999f64..0.999,
        x_gap in 0.0f64..20.0,
        a_neg in any::<bool>(),
        x_left in any::<bool>(),
    ) {
        let a = if a_neg { -(delta + a_gap) } else { delta + a_gap };
        let b = a + shift * delta * delta;
        let x = if x_left { a - 2.0 * delta - x_gap } else { a + 2.0 * delta + x_gap };
        let r = ratio_bound_check(a, b, x, delta).unwrap();
        prop_assert!(r.pass, "{r:?}");
    }

    #[test]
    fn criterion_terms_shrink_with_k(w in 0.1f64..10.0, k in 0u32..4) {
        let b = EntireProduct::new(ZeroSet::family(Family::NSquared, 15, Signs::Both).unwrap(), 1.0).unwrap();
        let weight = Weight::discrete(b.zeros().iter().map(|&l| (l, w)).collect(), w).unwrap();
        let lower = debranges_sum(&weight, &b, k).unwrap();
        let upper = debranges_sum(&weight, &b, k + 1).unwrap();
        prop_assert!(upper.sum <= lower.sum);
        prop_assert!(lower.partial_sums.windows(2).all(|p| p[0] <= p[1]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn admissible_shifts_keep_the_bound(fractions in prop::collection::vec(-1.0f64..=1.0, 24)) {
        let plan = squares_plan();
        let shifts: Vec<f64> = plan.shift_limits.iter().zip(&fractions).map(|(l, f)| l * f).collect();
        let p = perturb(plan, &shifts).unwrap();
        prop_assert!(p.pass(), "{:?}", p.conclusion);
    }
}
