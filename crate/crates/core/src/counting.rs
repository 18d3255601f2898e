//! Exact counts of friable integers: `Psi(x, y)`, `Psi_q(x, y)`,
//! `Psi(x, y; a, q)`, and discrepancies of their distribution in
//! arithmetic progressions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::factor::{factorize_by_trial_division, gcd, isqrt, primes_up_to};
use crate::saddle::{self, g_q};
use crate::segment::{friable_flags, map_segments, segments};
use crate::{Error, Result};

/// Largest `x` accepted by the counting functions.
pub const COUNTING_CAP: u64 = 1_000_000_000;
/// Largest `x` for which `S(x, y)` may be materialized.
pub const ENUMERATION_CAP: u64 = 100_000_000;
/// Largest modulus bound for residue-table passes.
pub const MAX_MODULUS: u64 = 4096;

/// A validated pair `(x, y)`. `y > x` is allowed, in which case every
/// `n <= x` is friable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FriableQuery {
    pub x: u64,
    pub y: u64,
}

impl FriableQuery {
    pub fn new(x: u64, y: u64) -> Result<Self> {
        if x < 1 {
            return Err(Error::out_of_range("x", x, "must be at least 1"));
        }
        if x > COUNTING_CAP {
            return Err(Error::out_of_range("x", x, "exceeds the counting cap of 1e9"));
        }
        if y < 2 {
            return Err(Error::out_of_range("y", y, "must be at least 2"));
        }
        Ok(Self { x, y })
    }

    /// `u = log x / log y`.
    pub fn u(&self) -> f64 {
        (self.x as f64).ln() / (self.y as f64).ln()
    }

    /// Primes needed to decide friability of every `n <= x`.
    fn sieving_primes(&self) -> Vec<u64> {
        primes_up_to(self.y.min(isqrt(self.x)))
    }

    /// Applies `per_segment` to the friable members of every segment of
    /// `[1, x]`; results come back in segment order.
    fn map_friable<T, F>(&self, per_segment: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&mut dyn Iterator<Item = u64>) -> T + Sync,
    {
        let primes = self.sieving_primes();
        let y = self.y;
        map_segments(1, self.x + 1, |lo, hi, rem| {
            let mut flags = Vec::with_capacity((hi - lo) as usize);
            friable_flags(lo, hi, y, &primes, rem, &mut flags);
            let mut it = flags
                .iter()
                .enumerate()
                .filter(|(_, &f)| f)
                .map(|(i, _)| lo + i as u64);
            per_segment(&mut it)
        })
    }

    fn count_where<P: Fn(u64) -> bool + Sync>(&self, pred: P) -> u64 {
        self.map_friable(|it| it.filter(|&n| pred(n)).count() as u64)
            .into_iter()
            .sum()
    }

    /// Order-insensitive integer accumulation over `S(x, y)`.
    fn fold_exact<A, I, V, M>(&self, identity: I, visit: V, merge: M) -> A
    where
        A: Send,
        I: Fn() -> A + Sync + Send,
        V: Fn(&mut A, u64) + Sync + Send,
        M: Fn(A, A) -> A + Sync + Send,
    {
        let primes = self.sieving_primes();
        let y = self.y;
        segments(1, self.x + 1)
            .into_par_iter()
            .fold(
                || (identity(), Vec::new(), Vec::new()),
                |(mut acc, mut rem, mut flags), (lo, hi)| {
                    friable_flags(lo, hi, y, &primes, &mut rem, &mut flags);
                    for (i, &f) in flags.iter().enumerate() {
                        if f {
                            visit(&mut acc, lo + i as u64);
                        }
                    }
                    (acc, rem, flags)
                },
            )
            .map(|(acc, _, _)| acc)
            .reduce(&identity, &merge)
    }
}

/// `S(x, y)` in increasing order, including 1.
pub fn enumerate_friable(x: u64, y: u64) -> Result<Vec<u64>> {
    let query = FriableQuery::new(x, y)?;
    if x > ENUMERATION_CAP {
        return Err(Error::out_of_range("x", x, "exceeds the enumeration cap of 1e8"));
    }
    Ok(query
        .map_friable(|it| it.collect::<Vec<_>>())
        .into_iter()
        .flatten()
        .collect())
}

/// `Psi(x, y)`.
pub fn psi(x: u64, y: u64) -> Result<u64> {
    Ok(FriableQuery::new(x, y)?.count_where(|_| true))
}

/// `Psi_q(x, y)`: friable `n <= x` coprime to `q`.
pub fn psi_coprime(x: u64, y: u64, q: u64) -> Result<u64> {
    if q == 0 {
        return Err(Error::out_of_range("q", q, "must be at least 1"));
    }
    Ok(FriableQuery::new(x, y)?.count_where(|n| gcd(n, q) == 1))
}

/// `Psi(x, y; a, q)`: friable `n <= x` with `n = a (mod q)`. `a` is
/// reduced modulo `q` first.
pub fn psi_progression(x: u64, y: u64, a: u64, q: u64) -> Result<u64> {
    if q == 0 {
        return Err(Error::out_of_range("q", q, "must be at least 1"));
    }
    let a = a % q;
    Ok(FriableQuery::new(x, y)?.count_where(|n| n % q == a))
}

/// `Psi(x, y; a, q)` through the reduction to a coprime class: zero when
/// `d = (a, q)` is not `y`-friable, otherwise `Psi(x/d, y; a/d, q/d)`.
/// Kept as an independent route for cross-checking [`psi_progression`].
pub fn psi_progression_by_reduction(x: u64, y: u64, a: u64, q: u64) -> Result<u64> {
    if q == 0 {
        return Err(Error::out_of_range("q", q, "must be at least 1"));
    }
    FriableQuery::new(x, y)?;
    let a = a % q;
    let d = gcd(a, q);
    if factorize_by_trial_division(d).largest_prime() > y {
        return Ok(0);
    }
    let x_reduced = x / d;
    if x_reduced == 0 {
        return Ok(0);
    }
    psi_progression(x_reduced, y, a / d, q / d)
}

/// Residue counts `Psi(x, y; a, q)` for every `q <= q_max` and every class
/// `a`, together with the coprime counts `Psi_q(x, y)` obtained by direct
/// gcd filtering. Built in one pass over `S(x, y)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueTable {
    pub x: u64,
    pub y: u64,
    pub q_max: u64,
    pub psi: u64,
    /// `classes[q][a]`, with an empty row at index 0.
    classes: Vec<Vec<u64>>,
    coprime: Vec<u64>,
}

impl ResidueTable {
    pub fn build(x: u64, y: u64, q_max: u64) -> Result<Self> {
        let query = FriableQuery::new(x, y)?;
        if q_max == 0 || q_max > MAX_MODULUS {
            return Err(Error::out_of_range("Q", q_max, "must lie in [1, 4096]"));
        }
        let qm = q_max as usize;
        let identity = || {
            let classes: Vec<Vec<u32>> = (0..=qm).map(|q| vec![0u32; q]).collect();
            (0u64, classes, vec![0u32; qm + 1])
        };
        let (psi, classes, coprime) = query.fold_exact(
            identity,
            |(count, classes, coprime), n| {
                *count += 1;
                for q in 1..=qm {
                    let r = (n % q as u64) as usize;
                    classes[q][r] += 1;
                    if gcd(r as u64, q as u64) == 1 {
                        coprime[q] += 1;
                    }
                }
            },
            |(c1, mut k1, mut p1), (c2, k2, p2)| {
                for (row1, row2) in k1.iter_mut().zip(&k2) {
                    for (a, b) in row1.iter_mut().zip(row2) {
                        *a += b;
                    }
                }
                for (a, b) in p1.iter_mut().zip(&p2) {
                    *a += b;
                }
                (c1 + c2, k1, p1)
            },
        );
        Ok(Self {
            x,
            y,
            q_max,
            psi,
            classes: classes
                .into_iter()
                .map(|row| row.into_iter().map(u64::from).collect())
                .collect(),
            coprime: coprime.into_iter().map(u64::from).collect(),
        })
    }

    /// `Psi(x, y; a, q)` for `1 <= q <= q_max`.
    pub fn class_count(&self, a: u64, q: u64) -> u64 {
        self.classes[q as usize][(a % q) as usize]
    }

    /// `Psi_q(x, y)` for `1 <= q <= q_max`.
    pub fn coprime_count(&self, q: u64) -> u64 {
        self.coprime[q as usize]
    }

    pub fn classes(&self, q: u64) -> &[u64] {
        &self.classes[q as usize]
    }

    /// `max_{(a, q) = 1} |Psi(x, y; a, q) - Psi_q(x, y) / phi(q)|`.
    pub fn max_coprime_gap(&self, q: u64) -> f64 {
        let expected = self.coprime_count(q) as f64 / euler_phi(q) as f64;
        self.classes(q)
            .iter()
            .enumerate()
            .filter(|&(a, _)| gcd(a as u64, q) == 1)
            .map(|(_, &c)| (c as f64 - expected).abs())
            .fold(0.0, f64::max)
    }
}

fn euler_phi(q: u64) -> u64 {
    factorize_by_trial_division(q).phi()
}

/// One modulus in a [`DiscrepancyReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyRow {
    pub q: u64,
    /// `Psi(x, y; 1, q)`.
    pub psi_one_mod_q: u64,
    /// `Psi_q(x, y) / phi(q)`.
    pub expected: f64,
    /// `|Psi(x, y; 1, q) - Psi_q(x, y) / phi(q)|`.
    pub gap: f64,
    /// Largest gap over all classes coprime to `q`.
    pub max_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub x: u64,
    pub y: u64,
    pub q_max: u64,
    pub psi: u64,
    pub rows: Vec<DiscrepancyRow>,
    /// `Delta(x, y; Q)`, the sum of the `gap` column.
    pub delta: f64,
    /// Sum of the `max_gap` column (unit weights).
    pub weighted_total: f64,
}

/// `Delta(x, y; Q) = sum_{q <= Q} |Psi(x, y; 1, q) - Psi_q(x, y)/phi(q)|`
/// with per-modulus rows.
pub fn discrepancy(x: u64, y: u64, q_max: u64) -> Result<DiscrepancyReport> {
    let table = ResidueTable::build(x, y, q_max)?;
    let rows: Vec<DiscrepancyRow> = (1..=q_max)
        .map(|q| {
            let expected = table.coprime_count(q) as f64 / euler_phi(q) as f64;
            let psi_one_mod_q = table.class_count(1, q);
            DiscrepancyRow {
                q,
                psi_one_mod_q,
                expected,
                gap: (psi_one_mod_q as f64 - expected).abs(),
                max_gap: table.max_coprime_gap(q),
            }
        })
        .collect();
    let delta = rows.iter().map(|r| r.gap).sum();
    let weighted_total = rows.iter().map(|r| r.max_gap).sum();
    Ok(DiscrepancyReport {
        x,
        y,
        q_max,
        psi: table.psi,
        rows,
        delta,
        weighted_total,
    })
}

/// `sum_{q <= Q} w(q) max_{(a, q) = 1} |Psi(x, y; a, q) - Psi_q(x, y)/phi(q)|`
/// for a nonnegative weight `w`, every coprime class scanned.
pub fn weighted_discrepancy<W: Fn(u64) -> f64>(x: u64, y: u64, q_max: u64, weight: W) -> Result<f64> {
    let weights: Vec<f64> = (1..=q_max).map(&weight).collect();
    if let Some((i, &w)) = weights.iter().enumerate().find(|(_, w)| !(**w >= 0.0)) {
        return Err(Error::NegativeWeight {
            q: i as u64 + 1,
            value: w,
        });
    }
    let table = ResidueTable::build(x, y, q_max)?;
    Ok((1..=q_max)
        .zip(&weights)
        .map(|(q, w)| w * table.max_coprime_gap(q))
        .sum())
}

/// `tau(q)^3`, the weight used for the divisor-cubed discrepancy.
pub fn tau_cubed(q: u64) -> f64 {
    (factorize_by_trial_division(q).tau() as f64).powi(3)
}

/// `H(u) = exp(u / log(u + 2)^2)`.
pub fn h_of_u(u: f64) -> Result<f64> {
    if !(u >= 0.0) {
        return Err(Error::out_of_range("u", u, "must be nonnegative"));
    }
    Ok((u / (u + 2.0).ln().powi(2)).exp())
}

fn h_epsilon_lower(x: f64, eps: f64) -> Option<f64> {
    let ll = x.ln().ln();
    (ll > 0.0).then(|| ll.powf(5.0 / 3.0 + eps).exp())
}

/// Whether `2 <= exp((log log x)^(5/3 + eps)) <= y <= x`.
pub fn in_h_epsilon(x: u64, y: u64, eps: f64) -> Result<bool> {
    if x < 16 {
        return Err(Error::out_of_range("x", x, "must be at least 16"));
    }
    if !(eps > 0.0) {
        return Err(Error::out_of_range("eps", eps, "must be positive"));
    }
    let lower = h_epsilon_lower(x as f64, eps).expect("log log x > 0 for x >= 16");
    Ok(2.0 <= lower && lower <= y as f64 && y <= x)
}

/// Smallest integer `x >= 3` from which `(x, x)` stays in the domain, found
/// by scanning `x` upward until the diagonal condition has held for the
/// rest of `[x, 10^6]`.
pub fn h_epsilon_diagonal_threshold(eps: f64) -> Option<u64> {
    let holds = |x: u64| h_epsilon_lower(x as f64, eps).is_some_and(|l| 2.0 <= l && l <= x as f64);
    let top = 1_000_000u64;
    if !holds(top) {
        return None;
    }
    let mut threshold = top;
    for x in (3..top).rev() {
        if !holds(x) {
            break;
        }
        threshold = x;
    }
    Some(threshold)
}

/// Measured form of the local law `Psi_m(x, y) = Psi(x, y) g_m(alpha) {1 + ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalLawReport {
    pub x: u64,
    pub y: u64,
    pub m: u64,
    /// `m_y`, the modulus actually used.
    pub m_friable: u64,
    pub u: f64,
    pub alpha: f64,
    pub g_m_alpha: f64,
    pub psi: u64,
    pub psi_m: u64,
    /// `Psi_m(x, y) / (g_m(alpha) Psi(x, y))`.
    pub ratio: f64,
    /// `log(omega(m) + 2) log(u + 1) / log y`.
    pub gamma_m: f64,
    /// `(exp(2 gamma_m) - 1) / log u`; absent when `u <= 1`. Displayed only,
    /// no implied constant is claimed.
    pub e_m_surrogate: Option<f64>,
}

pub fn local_law_report(x: u64, y: u64, m: u64) -> Result<LocalLawReport> {
    if m == 0 {
        return Err(Error::out_of_range("m", m, "must be at least 1"));
    }
    let query = FriableQuery::new(x, y)?;
    if x < 3 {
        return Err(Error::out_of_range("x", x, "must be at least 3"));
    }
    let m_fact = factorize_by_trial_division(m).restrict(y);
    let m_friable = m_fact.value();
    let sp = saddle::solve_alpha(x as f64, y, saddle::DEFAULT_TOL)?;
    let g = g_q(&m_fact, sp.alpha);
    let psi_all = psi(x, y)?;
    let psi_m = psi_coprime(x, y, m_friable)?;
    let u = query.u();
    let gamma_m = (m_fact.omega() as f64 + 2.0).ln() * (u + 1.0).ln() / (y as f64).ln();
    Ok(LocalLawReport {
        x,
        y,
        m,
        m_friable,
        u,
        alpha: sp.alpha,
        g_m_alpha: g,
        psi: psi_all,
        psi_m,
        ratio: psi_m as f64 / (g * psi_all as f64),
        gamma_m,
        e_m_surrogate: (u > 1.0).then(|| ((2.0 * gamma_m).exp() - 1.0) / u.ln()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `2^a 3^b 5^c <= 100` by triple loop.
    fn oracle_s100_5() -> Vec<u64> {
        let mut out = Vec::new();
        let mut p2 = 1u64;
        while p2 <= 100 {
            let mut p3 = p2;
            while p3 <= 100 {
                let mut p5 = p3;
                while p5 <= 100 {
                    out.push(p5);
                    p5 *= 5;
                }
                p3 *= 3;
            }
            p2 *= 2;
        }
        out.sort_unstable();
        out
    }

    #[test]
    fn small_enumerations() {
        assert_eq!(enumerate_friable(10, 2).unwrap(), vec![1, 2, 4, 8]);
        let s = enumerate_friable(100, 5).unwrap();
        assert_eq!(s, oracle_s100_5());
        assert_eq!(s.len(), 34);
        assert_eq!(enumerate_friable(50, 50).unwrap(), (1..=50).collect::<Vec<_>>());
        assert_eq!(enumerate_friable(50, 1000).unwrap().len(), 50);
    }

    #[test]
    fn psi_values() {
        assert_eq!(psi(10, 2).unwrap(), 4);
        assert_eq!(psi(100, 5).unwrap(), 34);
        assert_eq!(psi(123_457, 123_457).unwrap(), 123_457);
        assert!(psi(COUNTING_CAP + 1, 10).is_err());
        assert!(psi(10, 1).is_err());
        assert!(enumerate_friable(ENUMERATION_CAP + 1, 10).is_err());
    }

    #[test]
    fn coprime_and_progression_on_small_oracle() {
        let s = oracle_s100_5();
        assert_eq!(psi_coprime(10, 2, 2).unwrap(), 1);
        assert_eq!(psi_coprime(100, 5, 1).unwrap(), 34);
        let expect3 = s.iter().filter(|&&n| n % 3 != 0).count() as u64;
        assert_eq!(psi_coprime(100, 5, 3).unwrap(), expect3);
        let expect13 = s.iter().filter(|&&n| n % 3 == 1).count() as u64;
        assert_eq!(psi_progression(100, 5, 1, 3).unwrap(), expect13);
        assert_eq!(psi_progression(100, 5, 0, 1).unwrap(), 34);
        assert_eq!(psi_progression(100, 5, 7, 3).unwrap(), expect13);
    }

    #[test]
    fn progression_classes_partition_psi() {
        let total = psi(20_000, 30).unwrap();
        for q in [1u64, 2, 7, 12, 30] {
            let sum: u64 = (0..q).map(|a| psi_progression(20_000, 30, a, q).unwrap()).sum();
            assert_eq!(sum, total);
        }
    }

    #[test]
    fn reduction_rule_agrees_with_direct_count() {
        let cases = [(30_000u64, 20u64), (30_000, 200), (5_000, 5_000)];
        let mut checked = 0;
        for (x, y) in cases {
            for q in [4u64, 6, 9, 10, 21, 22, 46, 50, 60, 94, 97] {
                for a in [0u64, 1, 2, 3, 6, 15, 23, 47] {
                    let direct = psi_progression(x, y, a, q).unwrap();
                    let reduced = psi_progression_by_reduction(x, y, a, q).unwrap();
                    assert_eq!(direct, reduced, "x={x} y={y} a={a} q={q}");
                    checked += 1;
                }
            }
        }
        assert!(checked >= 100);
        // d = (23, 46) = 23 is not 20-friable
        assert_eq!(psi_progression(30_000, 20, 23, 46).unwrap(), 0);
    }

    #[test]
    fn friable_part_identity_for_psi_q() {
        let (x, y) = (50_000u64, 30u64);
        for q in [62u64, 93, 2 * 3 * 37, 5 * 41 * 43, 9_982, 9_999, 10_000] {
            let qy = factorize_by_trial_division(q).friable_part(y);
            assert_eq!(psi_coprime(x, y, q).unwrap(), psi_coprime(x, y, qy).unwrap());
        }
    }

    #[test]
    fn residue_table_matches_single_counts() {
        let t = ResidueTable::build(30_000, 50, 24).unwrap();
        assert_eq!(t.psi, psi(30_000, 50).unwrap());
        for q in [1u64, 5, 12, 24] {
            assert_eq!(t.coprime_count(q), psi_coprime(30_000, 50, q).unwrap());
            for a in 0..q {
                assert_eq!(t.class_count(a, q), psi_progression(30_000, 50, a, q).unwrap());
            }
        }
    }

    #[test]
    fn discrepancy_edge_cases() {
        let r = discrepancy(10_000, 30, 1).unwrap();
        assert_eq!(r.delta, 0.0);
        assert_eq!(r.rows[0].gap, 0.0);
        let r = discrepancy(40, 40, 60).unwrap();
        for row in r.rows.iter().filter(|row| row.q > 40) {
            assert!(row.psi_one_mod_q <= 1);
        }
        let total: f64 = r.rows.iter().map(|row| row.gap).sum();
        assert_eq!(total, r.delta);
        assert!(r.rows.iter().all(|row| row.gap >= 0.0 && row.max_gap >= row.gap));
        assert!(discrepancy(100, 10, 0).is_err());
    }

    #[test]
    fn weighted_discrepancy_dominates_unit_sum() {
        let r = discrepancy(100_000, 100, 50).unwrap();
        let w = weighted_discrepancy(100_000, 100, 50, |_| 1.0).unwrap();
        assert!((w - r.weighted_total).abs() < 1e-9);
        assert!(w >= r.delta);
        assert_eq!(weighted_discrepancy(100_000, 100, 1, |_| 1.0).unwrap(), 0.0);
        let err = weighted_discrepancy(1000, 10, 5, |q| if q == 3 { -1.0 } else { 1.0 });
        assert!(matches!(err, Err(Error::NegativeWeight { q: 3, .. })));
        let tau3 = weighted_discrepancy(100_000, 100, 30, tau_cubed).unwrap();
        assert!(tau3 >= w.min(tau3));
        assert!(tau3.is_finite() && tau3 > 0.0);
    }

    #[test]
    fn h_function() {
        assert_eq!(h_of_u(0.0).unwrap(), 1.0);
        let direct = (2.0f64 / 4.0f64.ln().powi(2)).exp();
        assert!((h_of_u(2.0).unwrap() - direct).abs() < 1e-15);
        assert!((h_of_u(2.0).unwrap() - 2.831).abs() < 1e-3);
        assert!(h_of_u(-0.1).is_err());
        let grid: Vec<f64> = (0..200).map(|i| 1.0 + 0.25 * i as f64).collect();
        for w in grid.windows(2) {
            assert!(h_of_u(w[1]).unwrap() > h_of_u(w[0]).unwrap());
        }
    }

    #[test]
    fn h_epsilon_domain() {
        assert!(in_h_epsilon(1_000_000, 300, 0.1).unwrap());
        assert!(!in_h_epsilon(1_000_000, 200, 0.1).unwrap());
        assert!(!in_h_epsilon(1_000_000, 2_000_000, 0.1).unwrap());
        assert!(in_h_epsilon(15, 10, 0.1).is_err());
        assert!(in_h_epsilon(100, 10, 0.0).is_err());
        let t = h_epsilon_diagonal_threshold(0.1).unwrap();
        assert!(t <= 16);
        for x in t.max(16)..2000 {
            assert!(in_h_epsilon(x, x, 0.1).unwrap());
        }
    }

    #[test]
    fn local_law_trivial_modulus() {
        let r = local_law_report(100_000, 100, 1).unwrap();
        assert_eq!(r.ratio, 1.0);
        let expected_gamma = 2f64.ln() * (r.u + 1.0).ln() / 100f64.ln();
        assert!((r.gamma_m - expected_gamma).abs() < 1e-15);
        let r2 = local_law_report(1_000_000, 100, 2).unwrap();
        assert!((r2.ratio - 1.0).abs() < 0.05, "ratio {}", r2.ratio);
        assert!(r2.ratio > 0.0);
        let r3 = local_law_report(100_000, 10, 2 * 101).unwrap();
        assert_eq!(r3.m_friable, 2);
    }
}
