use friable_core::counting::{psi, psi_coprime, psi_progression, psi_progression_by_reduction};
use friable_core::erdos_kac::OmegaHistogram;
use friable_core::factor::{factorize_by_trial_division, gcd};
use friable_core::mean_value::lambda_from_f;
use friable_core::rho::RhoTable;
use proptest::prelude::*;

fn brute_psi(x: u64, y: u64, keep: impl Fn(u64) -> bool) -> u64 {
    (1..=x)
        .filter(|&n| factorize_by_trial_division(n).largest_prime() <= y && keep(n))
        .count() as u64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn classes_partition_the_count(x in 2u64..20_000, y in 2u64..200, q in 1u64..40) {
        let total: u64 = (0..q).map(|a| psi_progression(x, y, a, q).unwrap()).sum();
        prop_assert_eq!(total, psi(x, y).unwrap());
        let coprime: u64 = (0..q)
            .filter(|&a| gcd(a, q) == 1)
            .map(|a| psi_progression(x, y, a, q).unwrap())
            .sum();
        prop_assert_eq!(coprime, psi_coprime(x, y, q).unwrap());
    }

    #[test]
    fn reduction_rule_matches_direct_count(x in 2u64..20_000, y in 2u64..100, a in 0u64..200, q in 1u64..60) {
        prop_assert_eq!(
            psi_progression_by_reduction(x, y, a, q).unwrap(),
            psi_progression(x, y, a, q).unwrap()
        );
    }

    #[test]
    fn counts_match_trial_division(x in 2u64..3_000, y in 2u64..60, q in 1u64..20, a in 0u64..20) {
        prop_assert_eq!(psi(x, y).unwrap(), brute_psi(x, y, |_| true));
        prop_assert_eq!(psi_coprime(x, y, q).unwrap(), brute_psi(x, y, |n| gcd(n, q) == 1));
        prop_assert_eq!(psi_progression(x, y, a, q).unwrap(), brute_psi(x, y, |n| n % q == a % q));
    }

    #[test]
    fn histograms_account_for_every_shift(x in 3u64..30_000, y in 2u64..500, cutoff in 1u64..100) {
        let h = OmegaHistogram::build(x, y, cutoff).unwrap();
        prop_assert_eq!(h.psi, psi(x, y).unwrap());
        prop_assert_eq!(h.full.iter().sum::<u64>() + 1, h.psi);
        prop_assert_eq!(h.truncated.iter().sum::<u64>() + 1, h.psi);
        // omega(m, Y) <= omega(m) shifts mass to the left
        let mut full = 0;
        let mut truncated = 0;
        for k in 0..h.full.len() {
            full += h.full[k];
            truncated += h.truncated[k];
            prop_assert!(truncated >= full);
        }
    }

    #[test]
    fn empirical_cdf_is_monotone(x in 16u64..30_000, y in 2u64..500, mut ts in prop::collection::vec(-4.0f64..4.0, 2..20)) {
        let h = OmegaHistogram::build(x, y, 5).unwrap();
        ts.sort_by(f64::total_cmp);
        let values: Vec<f64> = ts.iter().map(|&t| h.empirical_cdf(t)).collect();
        prop_assert!(values.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(values.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn mobius_inversion_round_trips(n in 1u64..5_000) {
        // integer-valued f keeps every sum exact
        let f = |m: u64| ((m * m + 3) % 17) as f64;
        let divisors = factorize_by_trial_division(n).divisors();
        let back: f64 = divisors.iter().map(|&d| lambda_from_f(f, d).unwrap()).sum();
        prop_assert_eq!(back, f(n));
    }
}

#[test]
fn rho_decreases_and_stays_positive() {
    let table = RhoTable::build(25.0, 1e-12).unwrap();
    let mut prev = 1.0;
    for i in 1..=400 {
        let u = 1.0 + i as f64 * 0.05;
        let r = table.rho(u).unwrap();
        assert!(r > 0.0 && r < prev, "u = {u}");
        prev = r;
    }
}
