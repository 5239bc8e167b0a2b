use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;

use queuemax::montecarlo::{replica_sums, SimConfig};
use queuemax::stationary::{stationary_model, stationary_pmf};
use queuemax::walk::{max_dist, s_marginal};
use queuemax::{joint_dist, Mode, Params};

/// `p = num/den` with `0 < p ≤ 1/2`.
fn probability() -> impl Strategy<Value = BigRational> {
    (2i64..=24).prop_flat_map(|den| {
        (1..=den / 2).prop_map(move |num| BigRational::new(num.into(), den.into()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exact_mass_is_one_and_support_is_bounded(p in probability(), ell in 1usize..=4, n in 0usize..=18) {
        let params = Params::new(p, ell, Mode::Exact).unwrap();
        let table = joint_dist::<BigRational>(&params, n, None).unwrap();
        prop_assert!(table.mass().is_one());
        prop_assert!(table.lost_mass().is_zero());
        let reach = params.arrival_count(n);
        for ((x, a), w) in table.entries() {
            prop_assert!(x <= a && a <= reach);
            prop_assert!(*w > BigRational::zero());
        }
        prop_assert!(max_dist(&table).values.len() <= reach + 1);
        prop_assert!(s_marginal(&table).total().is_one());
    }

    #[test]
    fn maximum_is_stochastically_increasing(p in probability(), ell in 1usize..=3, n in 0usize..=14) {
        let params = Params::new(p, ell, Mode::Exact).unwrap();
        let now = max_dist(&joint_dist::<BigRational>(&params, n, None).unwrap());
        let next = max_dist(&joint_dist::<BigRational>(&params, n + 1, None).unwrap());
        for level in 0..=n + 1 {
            prop_assert!(next.tail(level) >= now.tail(level));
        }
    }

    #[test]
    fn stationary_pmf_is_a_distribution(p in 0.05f64..0.48, ell in 1usize..=6) {
        let model = stationary_model(p, ell).unwrap();
        let pmf = stationary_pmf(&model, 2000).unwrap();
        prop_assert!(pmf.values.iter().all(|v| *v >= -1e-12));
        let total: f64 = pmf.values.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-8, "total={}", total);
    }

    #[test]
    fn replica_splits_merge_exactly(cut1 in 0u64..=300, cut2 in 0u64..=300, seed: u64, ell in 1usize..=3) {
        let params = Params::new(BigRational::new(2.into(), 5.into()), ell, Mode::Float).unwrap();
        let config = SimConfig::new(params, 60, 300, seed).unwrap();
        let (lo, hi) = (cut1.min(cut2), cut1.max(cut2));
        let merged = replica_sums(&config, 0..lo)
            .merge(replica_sums(&config, lo..hi))
            .merge(replica_sums(&config, hi..300));
        prop_assert_eq!(merged, replica_sums(&config, 0..300));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn float_agrees_with_exact_up_to_200_steps(p in probability(), ell in 1usize..=3, n in 100usize..=200) {
        let exact = Params::new(p, ell, Mode::Exact).unwrap();
        let float = exact.with_mode(Mode::Float);
        let e = joint_dist::<BigRational>(&exact, n, None).unwrap();
        let f = joint_dist::<f64>(&float, n, Some(n)).unwrap();
        for ((x, a), w) in e.entries() {
            prop_assert!((w.to_f64().unwrap() - f.get(x, a)).abs() < 1e-12);
        }
    }
}
