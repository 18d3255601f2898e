//! Fixed-size segmented sieving. Every counting pass in the crate walks
//! `[lo, hi)` in segments of [`SEGMENT_LEN`] integers so memory stays
//! `O(segment)` whatever the range. Segment boundaries never depend on the
//! thread count.

use rayon::prelude::*;

pub const SEGMENT_LEN: u64 = 1 << 16;

/// Fixed segmentation of `[lo, hi)`.
pub fn segments(lo: u64, hi: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut a = lo;
    while a < hi {
        let b = (a + SEGMENT_LEN).min(hi);
        out.push((a, b));
        a = b;
    }
    out
}

/// Maps `work` over the segments of `[lo, hi)` in parallel, returning the
/// per-segment results in segment order.
pub fn map_segments<T, F>(lo: u64, hi: u64, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, u64, &mut Vec<u64>) -> T + Sync,
{
    segments(lo, hi)
        .into_par_iter()
        .map_init(Vec::new, |buf, (a, b)| work(a, b, buf))
        .collect()
}

/// Marks the `y`-friable integers of `[lo, hi)`, `lo >= 1`.
///
/// `primes` must hold every prime up to `min(y, isqrt(hi - 1))`; larger
/// entries are ignored. After dividing out those primes the cofactor `r` is
/// either 1, a product of primes above `y`, or (when `y >= sqrt(hi - 1)`) a
/// single prime, so `P(n) <= y` exactly when `r <= y`.
pub fn friable_flags(lo: u64, hi: u64, y: u64, primes: &[u64], rem: &mut Vec<u64>, out: &mut Vec<bool>) {
    debug_assert!(lo >= 1);
    rem.clear();
    rem.extend(lo..hi);
    for &p in primes {
        if p > y || p.saturating_mul(p) >= hi {
            break;
        }
        let mut pk = p;
        while pk < hi {
            let mut m = lo.div_ceil(pk) * pk;
            while m < hi {
                rem[(m - lo) as usize] /= p;
                m += pk;
            }
            match pk.checked_mul(p) {
                Some(next) => pk = next,
                None => break,
            }
        }
    }
    out.clear();
    out.extend(rem.iter().map(|&r| r <= y));
}

/// Calls `visit(index, p, nu)` for every `p^nu || n` with `n = lo + index`
/// in `[lo, hi)`, `lo >= 1`. For each `n` the primes arrive in increasing
/// order. `primes` must contain every prime up to `isqrt(hi - 1)`.
pub fn for_each_prime_power<V>(lo: u64, hi: u64, primes: &[u64], rem: &mut Vec<u64>, mut visit: V)
where
    V: FnMut(usize, u64, u32),
{
    debug_assert!(lo >= 1);
    rem.clear();
    rem.extend(lo..hi);
    for &p in primes {
        if p.saturating_mul(p) >= hi {
            break;
        }
        let mut m = lo.div_ceil(p) * p;
        while m < hi {
            let i = (m - lo) as usize;
            let mut r = rem[i] / p;
            let mut nu = 1;
            while r % p == 0 {
                r /= p;
                nu += 1;
            }
            rem[i] = r;
            visit(i, p, nu);
            m += p;
        }
    }
    for (i, &r) in rem.iter().enumerate() {
        if r > 1 {
            visit(i, r, 1);
        }
    }
}

/// One pass over the shifted friables. For every segment of `n` in
/// `[2, x]` the `y`-friability flags of `n` are computed, a per-`n` state
/// starting at `init` receives `visit(state, p, nu)` for every `p^nu || n - 1`,
/// and `finish(lo, flags, states)` reduces the segment. Results come back
/// in segment order.
///
/// `primes` must contain every prime up to `isqrt(x)`.
pub fn map_shifted<S, T, V, F>(x: u64, y: u64, primes: &[u64], init: S, visit: V, finish: F) -> Vec<T>
where
    S: Clone + Send + Sync,
    T: Send,
    V: Fn(&mut S, u64, u32) + Sync,
    F: Fn(u64, &[bool], &[S]) -> T + Sync,
{
    if x < 2 {
        return Vec::new();
    }
    segments(2, x + 1)
        .into_par_iter()
        .map_init(
            || (Vec::new(), Vec::new(), Vec::new()),
            |(rem, flags, states), (lo, hi)| {
                friable_flags(lo, hi, y, primes, rem, flags);
                states.clear();
                states.resize((hi - lo) as usize, init.clone());
                for_each_prime_power(lo - 1, hi - 1, primes, rem, |i, p, nu| visit(&mut states[i], p, nu));
                finish(lo, flags, states)
            },
        )
        .collect()
}
