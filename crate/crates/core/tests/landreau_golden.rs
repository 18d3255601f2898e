use friable_core::erdos_kac::{landreau_check, LandreauCheck};
use friable_core::factor::factorize_by_trial_division;
use friable_core::report::from_json;

const GOLDEN: &str = include_str!("golden/landreau_1e5.json");

/// Exhaustive oracle: every divisor of every n, by trial division.
fn oracle(n_max: u64) -> (u64, u64, u64) {
    let mut best = (0u64, 0u64, 1u64);
    for n in 2..=n_max {
        let divisors = factorize_by_trial_division(n).divisors();
        let tau = divisors.len() as u64;
        let den: u64 = divisors
            .iter()
            .filter(|&&d| d * d * d <= n)
            .map(|&d| (factorize_by_trial_division(d).divisors().len() as u64).pow(3))
            .sum();
        // tau/den > best.1/best.2, first maximiser wins
        if tau as u128 * best.2 as u128 > best.1 as u128 * den as u128 {
            best = (n, tau, den);
        }
    }
    best
}

#[test]
fn golden_file_matches_the_exhaustive_oracle() {
    let golden: LandreauCheck = from_json(GOLDEN).unwrap();
    assert_eq!(golden.n_max, 100_000);
    assert_eq!(oracle(golden.n_max), (golden.argmax, golden.tau, golden.denominator));
    assert_eq!(landreau_check(golden.n_max).unwrap(), golden);
}

#[test]
fn small_ranges_agree_with_the_oracle() {
    for n_max in [2, 3, 10, 64, 1000] {
        let check = landreau_check(n_max).unwrap();
        assert_eq!(oracle(n_max), (check.argmax, check.tau, check.denominator), "N = {n_max}");
    }
}
