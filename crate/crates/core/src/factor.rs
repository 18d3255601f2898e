//! Smallest-prime-factor sieve, factorizations, and the elementary
//! multiplicative functions built on them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest limit accepted by [`FactorSieve::new`]. The table stores one
/// `u32` per integer, so the bound corresponds to 400 MB.
pub const MAX_SIEVE_LIMIT: u64 = 100_000_000;

const BUILD_CHUNK: usize = 1 << 18;

/// All primes `p <= limit`, in increasing order.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let root = isqrt(limit);
    let mut small = vec![true; root as usize + 1];
    let mut base = Vec::new();
    for p in 2..=root as usize {
        if small[p] {
            base.push(p as u64);
            let mut m = p * p;
            while m <= root as usize {
                small[m] = false;
                m += p;
            }
        }
    }
    let mut out = Vec::new();
    let mut mark = vec![true; BUILD_CHUNK];
    let mut lo = 2u64;
    while lo <= limit {
        let hi = (lo + BUILD_CHUNK as u64).min(limit + 1);
        let len = (hi - lo) as usize;
        mark[..len].fill(true);
        for &p in &base {
            if p * p >= hi {
                break;
            }
            let start = (p * p).max(lo.div_ceil(p) * p);
            let mut m = start;
            while m < hi {
                mark[(m - lo) as usize] = false;
                m += p;
            }
        }
        out.extend((0..len).filter(|&i| mark[i]).map(|i| lo + i as u64));
        lo = hi;
    }
    out
}

/// Integer square root.
pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|s| s <= n) {
        r += 1;
    }
    r
}

/// Integer cube root.
pub fn icbrt(n: u64) -> u64 {
    let mut r = (n as f64).cbrt() as u64;
    while r.checked_pow(3).is_none_or(|c| c > n) {
        r -= 1;
    }
    while (r + 1).checked_pow(3).is_some_and(|c| c <= n) {
        r += 1;
    }
    r
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Prime factorization as `(p, nu)` pairs with strictly increasing `p`.
/// The factorization of 1 is empty.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Factorization {
    pairs: Vec<(u64, u32)>,
}

/// `phi(n)`, `mu(n)`, `tau(n)`, `omega(n)` for one integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiplicativeValues {
    pub phi: u64,
    pub mu: i8,
    pub tau: u64,
    pub omega: u32,
}

impl Factorization {
    /// Builds from raw pairs, which must be sorted by prime with positive
    /// exponents.
    pub fn from_pairs(pairs: Vec<(u64, u32)>) -> Self {
        debug_assert!(pairs.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(pairs.iter().all(|&(_, nu)| nu >= 1));
        Self { pairs }
    }

    pub fn pairs(&self) -> &[(u64, u32)] {
        &self.pairs
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.pairs.iter().map(|&(p, _)| p)
    }

    pub fn value(&self) -> u64 {
        self.pairs.iter().map(|&(p, nu)| p.pow(nu)).product()
    }

    /// `P(n)`, with `P(1) = 1`.
    pub fn largest_prime(&self) -> u64 {
        self.pairs.last().map_or(1, |&(p, _)| p)
    }

    pub fn omega(&self) -> u32 {
        self.pairs.len() as u32
    }

    /// Number of distinct prime factors not exceeding `bound`.
    pub fn omega_up_to(&self, bound: u64) -> u32 {
        self.pairs.iter().filter(|&&(p, _)| p <= bound).count() as u32
    }

    pub fn tau(&self) -> u64 {
        self.pairs.iter().map(|&(_, nu)| nu as u64 + 1).product()
    }

    pub fn phi(&self) -> u64 {
        self.pairs
            .iter()
            .map(|&(p, nu)| (p - 1) * p.pow(nu - 1))
            .product()
    }

    pub fn mobius(&self) -> i8 {
        if self.pairs.iter().any(|&(_, nu)| nu > 1) {
            0
        } else if self.pairs.len() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn is_squarefree(&self) -> bool {
        self.pairs.iter().all(|&(_, nu)| nu == 1)
    }

    pub fn multiplicative_values(&self) -> MultiplicativeValues {
        MultiplicativeValues {
            phi: self.phi(),
            mu: self.mobius(),
            tau: self.tau(),
            omega: self.omega(),
        }
    }

    /// Largest `y`-friable divisor: the product of `p^nu || n` over `p <= y`.
    pub fn friable_part(&self, y: u64) -> u64 {
        self.pairs
            .iter()
            .filter(|&&(p, _)| p <= y)
            .map(|&(p, nu)| p.pow(nu))
            .product()
    }

    /// Factorization restricted to primes `p <= y`.
    pub fn restrict(&self, y: u64) -> Factorization {
        Factorization {
            pairs: self.pairs.iter().copied().filter(|&(p, _)| p <= y).collect(),
        }
    }

    /// All divisors, unsorted.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, nu) in &self.pairs {
            let len = divs.len();
            let mut pk = 1;
            for _ in 0..nu {
                pk *= p;
                for i in 0..len {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs
    }
}

/// Factorization of an arbitrary `n >= 1` by trial division.
pub fn factorize_by_trial_division(mut n: u64) -> Factorization {
    assert!(n >= 1, "cannot factor 0");
    let mut pairs = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut nu = 0;
            while n % p == 0 {
                n /= p;
                nu += 1;
            }
            pairs.push((p, nu));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        pairs.push((n, 1));
    }
    Factorization { pairs }
}

/// Smallest-prime-factor table on `[0, limit]`. Immutable once built.
#[derive(Debug, Clone)]
pub struct FactorSieve {
    limit: u64,
    spf: Vec<u32>,
}

impl FactorSieve {
    /// Builds the table for `2 <= limit <= MAX_SIEVE_LIMIT`. Chunks are
    /// filled in parallel; the result does not depend on the thread count.
    pub fn new(limit: u64) -> Result<Self> {
        if limit < 2 {
            return Err(Error::out_of_range("limit", limit, "must be at least 2"));
        }
        if limit > MAX_SIEVE_LIMIT {
            return Err(Error::out_of_range(
                "limit",
                limit,
                "exceeds the factor-sieve memory bound of 1e8",
            ));
        }
        let base = primes_up_to(isqrt(limit));
        let mut spf = vec![0u32; limit as usize + 1];
        spf.par_chunks_mut(BUILD_CHUNK)
            .enumerate()
            .for_each(|(chunk, slots)| {
                let lo = (chunk * BUILD_CHUNK) as u64;
                let hi = lo + slots.len() as u64;
                for &p in &base {
                    if p * p >= hi {
                        break;
                    }
                    let mut m = (p * p).max(lo.div_ceil(p) * p);
                    while m < hi {
                        let slot = &mut slots[(m - lo) as usize];
                        if *slot == 0 {
                            *slot = p as u32;
                        }
                        m += p;
                    }
                }
                for (i, slot) in slots.iter_mut().enumerate() {
                    let n = lo + i as u64;
                    if *slot == 0 && n >= 2 {
                        *slot = n as u32;
                    }
                }
            });
        spf[1] = 1;
        Ok(Self { limit, spf })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Smallest prime factor of `2 <= n <= limit`.
    pub fn smallest_prime_factor(&self, n: u64) -> u64 {
        self.spf[n as usize] as u64
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && n <= self.limit && self.spf[n as usize] as u64 == n
    }

    fn check(&self, n: u64) -> Result<()> {
        if n == 0 || n > self.limit {
            return Err(Error::out_of_range(
                "n",
                n,
                "must lie in [1, sieve limit]",
            ));
        }
        Ok(())
    }

    pub fn factorize(&self, n: u64) -> Result<Factorization> {
        self.check(n)?;
        Ok(self.factorize_unchecked(n))
    }

    pub(crate) fn factorize_unchecked(&self, mut n: u64) -> Factorization {
        let mut pairs: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            n /= p;
            match pairs.last_mut() {
                Some((q, nu)) if *q == p => *nu += 1,
                _ => pairs.push((p, 1)),
            }
        }
        Factorization { pairs }
    }

    /// `P(n)` with the convention `P(1) = 1`.
    pub fn largest_prime_factor(&self, n: u64) -> Result<u64> {
        self.check(n)?;
        let mut n = n;
        let mut p = 1;
        while n > 1 {
            p = self.spf[n as usize] as u64;
            n /= p;
        }
        Ok(p)
    }

    /// `q_y`, the largest `y`-friable divisor of `n`.
    pub fn friable_part(&self, n: u64, y: u64) -> Result<u64> {
        Ok(self.factorize(n)?.friable_part(y))
    }

    pub fn mult_functions(&self, n: u64) -> Result<MultiplicativeValues> {
        Ok(self.factorize(n)?.multiplicative_values())
    }
}
