//! The saddle point `alpha(x, y)`, unique positive root of
//! `log x = sum_{p <= y} log p / (p^alpha - 1)`, and the local densities
//! `g_q(beta) = prod_{p | q} (1 - p^-beta)`.

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::factor::{factorize_by_trial_division, primes_up_to, Factorization, MAX_SIEVE_LIMIT};
use crate::numeric::CompensatedSum;
use crate::{Error, Result};

/// Default solver tolerance, relative to `log x`.
pub const DEFAULT_TOL: f64 = 1e-12;

const BLOCK: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddlePoint {
    pub x: f64,
    pub y: u64,
    pub alpha: f64,
    /// `|sum_{p <= y} log p / (p^alpha - 1) - log x|`.
    pub residual: f64,
    pub primes_used: usize,
}

/// `F(alpha) = sum_{p <= y} log p / (p^alpha - 1) - log x`, strictly
/// decreasing in `alpha > 0`.
#[derive(Debug, Clone)]
pub struct SaddleEquation {
    log_x: f64,
    log_primes: Vec<f64>,
}

impl SaddleEquation {
    pub fn new(x: f64, y: u64) -> Result<Self> {
        if !(x >= 3.0) || !x.is_finite() {
            return Err(Error::out_of_range("x", x, "must be finite and at least 3"));
        }
        if y < 2 {
            return Err(Error::out_of_range("y", y, "must be at least 2"));
        }
        if y > MAX_SIEVE_LIMIT {
            return Err(Error::out_of_range("y", y, "primes up to y must be sievable (y <= 1e8)"));
        }
        Ok(Self {
            log_x: x.ln(),
            log_primes: primes_up_to(y).into_iter().map(|p| (p as f64).ln()).collect(),
        })
    }

    pub fn log_x(&self) -> f64 {
        self.log_x
    }

    pub fn primes_used(&self) -> usize {
        self.log_primes.len()
    }

    fn block_sum<T: Fn(f64) -> f64 + Sync>(&self, term: T) -> f64 {
        let partials: Vec<CompensatedSum> = self
            .log_primes
            .par_chunks(BLOCK)
            .map(|chunk| chunk.iter().map(|&lp| term(lp)).collect())
            .collect();
        let mut total = CompensatedSum::new();
        for p in &partials {
            total.merge(p);
        }
        total.value()
    }

    pub fn value(&self, alpha: f64) -> f64 {
        self.block_sum(|lp| lp / (alpha * lp).exp_m1()) - self.log_x
    }

    pub fn derivative(&self, alpha: f64) -> f64 {
        -self.block_sum(|lp| {
            let e = (alpha * lp).exp();
            let d = (alpha * lp).exp_m1();
            if d.is_infinite() {
                0.0
            } else {
                lp * lp * e / (d * d)
            }
        })
    }

    fn bracket(&self) -> (f64, f64) {
        let mut hi = 1.0;
        while self.value(hi) > 0.0 {
            hi *= 2.0;
        }
        let mut lo = hi;
        while self.value(lo) <= 0.0 {
            lo /= 2.0;
        }
        (lo, hi)
    }

    /// Bisection down to the resolution of `f64`.
    pub fn solve_bisection(&self) -> f64 {
        let (mut lo, mut hi) = self.bracket();
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.value(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (flo, fhi) = (self.value(lo).abs(), self.value(hi).abs());
        if flo <= fhi {
            lo
        } else {
            hi
        }
    }

    /// Bisection to a coarse bracket, then safeguarded Newton.
    pub fn solve_newton(&self) -> f64 {
        let (mut lo, mut hi) = self.bracket();
        while hi - lo > 1e-3 * hi {
            let mid = 0.5 * (lo + hi);
            if self.value(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut alpha = 0.5 * (lo + hi);
        for _ in 0..100 {
            let f = self.value(alpha);
            if f == 0.0 {
                return alpha;
            }
            if f > 0.0 {
                lo = alpha;
            } else {
                hi = alpha;
            }
            let mut next = alpha - f / self.derivative(alpha);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - alpha).abs() <= 4.0 * f64::EPSILON * alpha {
                alpha = next;
                break;
            }
            alpha = next;
        }
        alpha
    }
}

fn finish(eq: &SaddleEquation, x: f64, y: u64, alpha: f64, tol: f64) -> Result<SaddlePoint> {
    let residual = eq.value(alpha).abs();
    if residual > tol * eq.log_x() {
        return Err(Error::out_of_range(
            "tol",
            tol,
            "not attainable in double precision for this (x, y)",
        ));
    }
    Ok(SaddlePoint {
        x,
        y,
        alpha,
        residual,
        primes_used: eq.primes_used(),
    })
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) {
        return Err(Error::out_of_range("tol", tol, "must be positive"));
    }
    Ok(())
}

/// Solves for `alpha(x, y)` with `|F(alpha)| <= tol * log x`. Only `log x`
/// is used, so `x` may exceed the counting cap.
pub fn solve_alpha(x: f64, y: u64, tol: f64) -> Result<SaddlePoint> {
    check_tol(tol)?;
    let eq = SaddleEquation::new(x, y)?;
    let alpha = eq.solve_newton();
    finish(&eq, x, y, alpha, tol)
}

/// Same contract as [`solve_alpha`], using bisection alone.
pub fn solve_alpha_bisection(x: f64, y: u64, tol: f64) -> Result<SaddlePoint> {
    check_tol(tol)?;
    let eq = SaddleEquation::new(x, y)?;
    let alpha = eq.solve_bisection();
    finish(&eq, x, y, alpha, tol)
}

/// `g_q(beta)` over the distinct primes of `q`.
pub fn g_q(q: &Factorization, beta: f64) -> f64 {
    q.primes().map(|p| -(-beta * (p as f64).ln()).exp_m1()).product()
}

/// `g_q(beta)` for an integer `q >= 1`, factored by trial division.
pub fn g_q_of(q: u64, beta: f64) -> Result<f64> {
    if q == 0 {
        return Err(Error::out_of_range("q", q, "must be at least 1"));
    }
    if !(0.0..=2.0).contains(&beta) {
        return Err(Error::out_of_range("beta", beta, "must lie in [0, 2]"));
    }
    Ok(g_q(&factorize_by_trial_division(q), beta))
}

/// `g_q(1) = prod_{p | q} (1 - 1/p)` in exact rational arithmetic.
pub fn g_q_at_one_exact(q: &Factorization) -> Ratio<u128> {
    q.primes()
        .map(|p| Ratio::new(p as u128 - 1, p as u128))
        .fold(Ratio::from_integer(1), |acc, r| acc * r)
}

/// `1 - alpha` against `log(u + 1) / log y`. Reported, never asserted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaGap {
    pub x: f64,
    pub y: u64,
    pub u: f64,
    pub alpha: f64,
    pub one_minus_alpha: f64,
    pub log_ratio: f64,
    pub ratio: f64,
    /// Whether `(log x)^2 <= y`.
    pub in_regime: bool,
}

pub fn alpha_gap_diagnostic(x: f64, y: u64) -> Result<AlphaGap> {
    let sp = solve_alpha(x, y, DEFAULT_TOL)?;
    let ly = (y as f64).ln();
    let u = x.ln() / ly;
    let log_ratio = (u + 1.0).ln() / ly;
    Ok(AlphaGap {
        x,
        y,
        u,
        alpha: sp.alpha,
        one_minus_alpha: 1.0 - sp.alpha,
        log_ratio,
        ratio: (1.0 - sp.alpha) / log_ratio,
        in_regime: x.ln().powi(2) <= y as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::FactorSieve;

    #[test]
    fn residual_within_contract() {
        for (x, y) in [(1e6, 100u64), (1e6, 1000), (1e9, 30), (1e20, 4_500_000)] {
            let sp = solve_alpha(x, y, DEFAULT_TOL).unwrap();
            assert!(sp.residual <= DEFAULT_TOL * x.ln(), "{x} {y} {}", sp.residual);
            assert!(sp.alpha > 0.0);
        }
    }

    #[test]
    fn monotone_in_y() {
        let a = solve_alpha(1e6, 100, DEFAULT_TOL).unwrap().alpha;
        let b = solve_alpha(1e6, 1000, DEFAULT_TOL).unwrap().alpha;
        assert!(a < b);
    }

    #[test]
    fn polylog_regime_tends_to_one_minus_inverse_kappa() {
        let x = 1e20f64;
        let y = x.ln().powi(4).round() as u64;
        let a = solve_alpha(x, y, DEFAULT_TOL).unwrap().alpha;
        assert!((a - 0.75).abs() < 0.2, "alpha = {a}");
    }

    #[test]
    fn alpha_may_exceed_one() {
        // sum_{p <= y} log p / (p - 1) is about log y - 0.58, above log 1e5
        let sp = solve_alpha(1e5, 1_000_000, DEFAULT_TOL).unwrap();
        assert!(sp.alpha > 1.0);
    }

    #[test]
    fn solvers_agree() {
        for (x, y) in [(1e5, 50u64), (1e7, 1000), (1e12, 100_000)] {
            let a = solve_alpha(x, y, DEFAULT_TOL).unwrap().alpha;
            let b = solve_alpha_bisection(x, y, DEFAULT_TOL).unwrap().alpha;
            assert!((a - b).abs() <= 1e-11, "{a} {b}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(solve_alpha(1e6, 1, DEFAULT_TOL).is_err());
        assert!(solve_alpha(1e6, 100, 0.0).is_err());
        assert!(solve_alpha(2.0, 100, DEFAULT_TOL).is_err());
    }

    #[test]
    fn g_values() {
        assert_eq!(g_q_of(1, 0.7).unwrap(), 1.0);
        assert!((g_q_of(6, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let s = FactorSieve::new(10_000).unwrap();
        for q in 1..=10_000 {
            let f = s.factorize(q).unwrap();
            let exact = g_q_at_one_exact(&f);
            assert_eq!(exact, Ratio::new(f.phi() as u128, q as u128));
            let approx = g_q(&f, 1.0);
            assert!((approx - f.phi() as f64 / q as f64).abs() < 1e-14);
            for beta in [0.3, 1.0, 1.7] {
                let g = g_q(&f, beta);
                assert!(g > 0.0 && g <= 1.0);
            }
        }
        for (a, b) in [(4u64, 9u64), (10, 21), (35, 12)] {
            let lhs = g_q_of(a * b, 0.6).unwrap();
            let rhs = g_q_of(a, 0.6).unwrap() * g_q_of(b, 0.6).unwrap();
            assert!((lhs - rhs).abs() < 1e-15);
        }
    }

    #[test]
    fn gap_diagnostic() {
        let x = 1e6f64;
        let d = alpha_gap_diagnostic(x, 1_000_000).unwrap();
        assert!((d.u - 1.0).abs() < 1e-12);
        assert!((d.log_ratio - 2f64.ln() / x.ln()).abs() < 1e-12);
        let d = alpha_gap_diagnostic(1e8, 1000).unwrap();
        assert!(d.ratio.is_finite());
        assert!(d.in_regime);
    }
}
