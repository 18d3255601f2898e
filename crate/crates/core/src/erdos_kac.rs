//! The distribution of `omega(n - 1)` over friable `n`, against the Gaussian.
//!
//! Everything here reads one histogram pass: for each `n` in `S*(x, y)` the
//! sieve counts the prime factors of `n - 1`, both all of them and those up to
//! a cutoff `Y`. CDFs, moments, the characteristic function `R` and the
//! Berry-Esseen integral are then evaluated on the bins.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::counting::{FriableQuery, ENUMERATION_CAP};
use crate::factor::{factorize_by_trial_division, icbrt, isqrt, primes_up_to};
pub use crate::numeric::gaussian_cdf;
use crate::numeric::{gauss_legendre, log_log, CompensatedSum};
use crate::segment::map_shifted;
use crate::{Error, Result};

pub const DEFAULT_C_Y: f64 = 2.0;
/// Below this `theta` the Berry-Esseen integrand is replaced by its slope.
pub const EPS0: f64 = 1e-3;
/// Histogram width; `omega(n) < 16` for `n < 2^64`.
pub const OMEGA_BINS: usize = 16;
pub const LANDREAU_CAP: u64 = 10_000_000;

/// `(x, y)` together with the truncation `Y = exp(log x / (log log x)^c_Y)`
/// and `xi = log log Y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EkConfig {
    pub x: u64,
    pub y: u64,
    pub c_y: f64,
    pub big_y: f64,
    pub xi: f64,
}

impl EkConfig {
    pub fn new(x: u64, y: u64, c_y: f64) -> Result<Self> {
        if !(c_y > 0.0 && c_y.is_finite()) {
            return Err(Error::out_of_range("c_Y", c_y, "must be positive"));
        }
        check_x(x, y, 16)?;
        let lx = (x as f64).ln();
        Self::with_cutoff(x, y, (lx / lx.ln().powf(c_y)).exp(), c_y)
    }

    /// A config with `Y` given directly.
    pub fn with_cutoff(x: u64, y: u64, big_y: f64, c_y: f64) -> Result<Self> {
        check_x(x, y, 16)?;
        if !(big_y >= 2.0 && big_y <= x as f64) {
            return Err(Error::out_of_range("Y", big_y, "must lie in [2, x]"));
        }
        let xi = log_log(big_y);
        if !(xi > 0.0) {
            return Err(Error::out_of_range("Y", big_y, "needs log log Y > 0, i.e. Y > e"));
        }
        Ok(Self { x, y, c_y, big_y, xi })
    }

    /// Largest integer `<= Y`.
    pub fn cutoff(&self) -> u64 {
        self.big_y.floor() as u64
    }
}

fn check_x(x: u64, y: u64, min: u64) -> Result<()> {
    FriableQuery::new(x, y)?;
    if x < min {
        return Err(Error::out_of_range("x", x, "too small for log log x > 0"));
    }
    if x > ENUMERATION_CAP {
        return Err(Error::out_of_range("x", x, "exceeds the enumeration cap of 1e8"));
    }
    Ok(())
}

/// `omega(n, Y)`: distinct primes `p <= Y` dividing `n`.
pub fn omega_truncated(n: u64, cutoff: u64) -> u32 {
    if n == 0 {
        return 0;
    }
    factorize_by_trial_division(n).omega_up_to(cutoff)
}

/// Counts of `omega(n - 1)` and `omega(n - 1, Y)` over `n` in `S*(x, y)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OmegaHistogram {
    pub x: u64,
    pub y: u64,
    pub cutoff: u64,
    pub psi: u64,
    pub full: Vec<u64>,
    pub truncated: Vec<u64>,
}

impl OmegaHistogram {
    /// One segmented pass over `n <= x`. `cutoff` is `floor(Y)`.
    pub fn build(x: u64, y: u64, cutoff: u64) -> Result<Self> {
        check_x(x, y, 3)?;
        let primes = primes_up_to(isqrt(x));
        let parts = map_shifted(
            x,
            y,
            &primes,
            (0u8, 0u8),
            |st, p, _| {
                st.0 += 1;
                st.1 += (p <= cutoff) as u8;
            },
            |_, flags, states| {
                let mut full = [0u64; OMEGA_BINS];
                let mut truncated = [0u64; OMEGA_BINS];
                for (&f, &(w, wy)) in flags.iter().zip(states) {
                    if f {
                        full[w as usize] += 1;
                        truncated[wy as usize] += 1;
                    }
                }
                (full, truncated)
            },
        );
        let mut full = vec![0u64; OMEGA_BINS];
        let mut truncated = vec![0u64; OMEGA_BINS];
        for (a, b) in &parts {
            for k in 0..OMEGA_BINS {
                full[k] += a[k];
                truncated[k] += b[k];
            }
        }
        let psi = 1 + full.iter().sum::<u64>();
        Ok(Self {
            x,
            y,
            cutoff,
            psi,
            full,
            truncated,
        })
    }

    pub fn for_config(config: &EkConfig) -> Result<Self> {
        Self::build(config.x, config.y, config.cutoff())
    }

    fn log_log_x(&self) -> f64 {
        log_log(self.x as f64)
    }

    /// `Psi(x, y; t) / Psi(x, y)`.
    pub fn empirical_cdf(&self, t: f64) -> f64 {
        let l = self.log_log_x();
        cdf_of(&self.full, l + t * l.sqrt(), self.psi)
    }

    /// `Psi*(x, y; t) / Psi(x, y)` with `omega(n - 1, Y)` and centering `xi`.
    pub fn truncated_cdf(&self, t: f64, xi: f64) -> f64 {
        cdf_of(&self.truncated, xi + t * xi.sqrt(), self.psi)
    }

    /// Exact `sup_t |Psi(x, y; t) / Psi(x, y) - Phi(t)|`.
    pub fn discrepancy(&self) -> EkDiscrepancy {
        let l = self.log_log_x();
        let s = l.sqrt();
        let psi = self.psi as f64;
        // t -> +inf: the CDF tops out at (Psi - 1) / Psi
        let mut best = EkDiscrepancy {
            sup: 1.0 / psi,
            at: None,
            left_limit: false,
            degenerate: self.psi <= 2,
        };
        let mut below = 0u64;
        for (k, &c) in self.full.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let t = (k as f64 - l) / s;
            let phi = gaussian_cdf(t);
            let left = (below as f64 / psi - phi).abs();
            below += c;
            let right = (below as f64 / psi - phi).abs();
            for (gap, is_left) in [(left, true), (right, false)] {
                if gap > best.sup {
                    best.sup = gap;
                    best.at = Some(t);
                    best.left_limit = is_left;
                }
            }
        }
        best
    }

    /// `sup |F - Phi|` over an evenly spaced grid of `points` values of `t`
    /// in `[lo, hi]`. Never above [`Self::discrepancy`].
    pub fn grid_discrepancy(&self, lo: f64, hi: f64, points: usize) -> f64 {
        let step = (hi - lo) / (points.max(2) - 1) as f64;
        (0..points)
            .map(|i| {
                let t = lo + i as f64 * step;
                (self.empirical_cdf(t) - gaussian_cdf(t)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Mean and variance of `omega(n - 1)` over the `Psi - 1` members of
    /// `S*`.
    pub fn full_moments(&self) -> (f64, f64) {
        mean_variance(&self.full)
    }

    pub fn truncated_moments(&self) -> (f64, f64) {
        mean_variance(&self.truncated)
    }

    /// `(1 / Psi) sum_{n in S*} exp(i theta (omega(n - 1, Y) - xi) / sqrt xi)
    /// - exp(-theta^2 / 2)` for any real `theta`.
    pub(crate) fn r_unchecked(&self, theta: f64, xi: f64) -> Complex64 {
        let s = xi.sqrt();
        let mut re = CompensatedSum::new();
        let mut im = CompensatedSum::new();
        for (j, &c) in self.truncated.iter().enumerate() {
            if c > 0 {
                let z = Complex64::from_polar(c as f64, theta * (j as f64 - xi) / s);
                re.add(z.re);
                im.add(z.im);
            }
        }
        let psi = self.psi as f64;
        Complex64::new(re.value() / psi - (-0.5 * theta * theta).exp(), im.value() / psi)
    }

    /// `R(x, y; theta)` for `0 <= theta <= sqrt(xi)`.
    pub fn char_fn_r(&self, theta: f64, xi: f64) -> Result<Complex64> {
        check_xi(xi)?;
        if !(0.0..=xi.sqrt()).contains(&theta) {
            return Err(Error::out_of_range("theta", theta, "must lie in [0, sqrt(xi)]"));
        }
        Ok(self.r_unchecked(theta, xi))
    }

    /// `1 / sqrt(xi) + int_0^sqrt(xi) |R(theta)| dtheta / theta`, with the
    /// absolute constant set to 1. A diagnostic, not a bound.
    pub fn berry_esseen(&self, xi: f64) -> Result<BerryEsseen> {
        check_xi(xi)?;
        let top = xi.sqrt();
        let psi = self.psi as f64;
        let first_moment: f64 = self
            .truncated
            .iter()
            .enumerate()
            .map(|(j, &c)| c as f64 * (j as f64 - xi))
            .sum::<f64>()
            / psi;
        let slope = first_moment.abs() / top;
        let eps = EPS0.min(top);
        let near_zero = slope * eps;
        // with theta = e^v the integrand |R| / theta dtheta becomes |R| dv
        let integrand = |v: f64| self.r_unchecked(v.exp(), xi).norm();
        let (a, b) = (eps.ln(), top.ln());
        let mut panels = 8usize;
        let mut previous = log_quadrature(&integrand, a, b, panels);
        let mut change = f64::INFINITY;
        while panels < 1 << 14 {
            panels *= 2;
            let next = log_quadrature(&integrand, a, b, panels);
            change = (next - previous).abs();
            previous = next;
            if change < 1e-9 {
                break;
            }
        }
        let integral = near_zero + previous;
        Ok(BerryEsseen {
            xi,
            inv_sqrt_xi: 1.0 / top,
            near_zero,
            integral,
            value: 1.0 / top + integral,
            panels,
            halving_change: change,
        })
    }
}

fn log_quadrature<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (nodes, weights) = gauss_legendre(8);
    let h = (b - a) / panels as f64;
    let mut acc = CompensatedSum::new();
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * h;
        for (z, w) in nodes.iter().zip(&weights) {
            acc.add(0.5 * h * w * f(mid + 0.5 * h * z));
        }
    }
    acc.value()
}

fn check_xi(xi: f64) -> Result<()> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::out_of_range("xi", xi, "must be positive"));
    }
    Ok(())
}

fn cdf_of(bins: &[u64], threshold: f64, psi: u64) -> f64 {
    if threshold < 0.0 {
        return 0.0;
    }
    let top = (threshold.floor() as usize).min(bins.len() - 1);
    bins[..=top].iter().sum::<u64>() as f64 / psi as f64
}

fn mean_variance(bins: &[u64]) -> (f64, f64) {
    let n: u64 = bins.iter().sum();
    if n == 0 {
        return (0.0, 0.0);
    }
    let s1: u64 = bins.iter().enumerate().map(|(k, &c)| k as u64 * c).sum();
    let s2: u64 = bins.iter().enumerate().map(|(k, &c)| (k * k) as u64 * c).sum();
    let mean = s1 as f64 / n as f64;
    (mean, s2 as f64 / n as f64 - mean * mean)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EkDiscrepancy {
    pub sup: f64,
    /// Where the supremum is reached; `None` for the `t -> +inf` limit.
    pub at: Option<f64>,
    /// Reached as the left limit at the jump `at`.
    pub left_limit: bool,
    /// `Psi(x, y) <= 2`.
    pub degenerate: bool,
}

pub fn empirical_cdf(x: u64, y: u64, t: f64) -> Result<f64> {
    Ok(OmegaHistogram::build(x, y, 0)?.empirical_cdf(t))
}

pub fn ek_discrepancy(x: u64, y: u64) -> Result<EkDiscrepancy> {
    Ok(OmegaHistogram::build(x, y, 0)?.discrepancy())
}

pub fn truncated_cdf(config: &EkConfig, t: f64) -> Result<f64> {
    Ok(OmegaHistogram::for_config(config)?.truncated_cdf(t, config.xi))
}

pub fn char_fn_r(config: &EkConfig, theta: f64) -> Result<Complex64> {
    OmegaHistogram::for_config(config)?.char_fn_r(theta, config.xi)
}

pub fn berry_esseen_bound(config: &EkConfig) -> Result<BerryEsseen> {
    OmegaHistogram::for_config(config)?.berry_esseen(config.xi)
}

/// Sums of `omega(n - 1, Y)` and its square over `S*(x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EkMoments {
    pub cutoff: u64,
    pub psi: u64,
    pub sum: u64,
    pub sum_squares: u64,
    pub xi: Option<f64>,
    /// `(1 / (xi Psi)) sum (omega(n - 1, Y) - xi)^2`, when `xi > 0`.
    pub centered: Option<f64>,
}

/// `Y` may be anything `>= 1`; `xi` is only defined for `Y > e`.
pub fn ek_moments(x: u64, y: u64, big_y: f64) -> Result<EkMoments> {
    if !(big_y >= 1.0) {
        return Err(Error::out_of_range("Y", big_y, "must be at least 1"));
    }
    let hist = OmegaHistogram::build(x, y, big_y.floor() as u64)?;
    Ok(hist.moments(big_y))
}

impl OmegaHistogram {
    pub fn moments(&self, big_y: f64) -> EkMoments {
        let sum: u64 = self.truncated.iter().enumerate().map(|(j, &c)| j as u64 * c).sum();
        let sum_squares: u64 = self.truncated.iter().enumerate().map(|(j, &c)| (j * j) as u64 * c).sum();
        let xi = Some(log_log(big_y)).filter(|v| *v > 0.0);
        let centered = xi.map(|xi| {
            let acc: CompensatedSum = self
                .truncated
                .iter()
                .enumerate()
                .map(|(j, &c)| c as f64 * (j as f64 - xi).powi(2))
                .collect();
            acc.value() / (xi * self.psi as f64)
        });
        EkMoments {
            cutoff: self.cutoff,
            psi: self.psi,
            sum,
            sum_squares,
            xi,
            centered,
        }
    }
}

/// `f_theta(d) = mu^2(d) (exp(i theta / sqrt xi) - 1)^omega(d)`.
pub fn f_theta(d: u64, theta: f64, xi: f64) -> Result<Complex64> {
    if d == 0 {
        return Err(Error::out_of_range("d", d, "must be at least 1"));
    }
    check_xi(xi)?;
    let fac = factorize_by_trial_division(d);
    if !fac.is_squarefree() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let base = Complex64::from_polar(1.0, theta / xi.sqrt()) - 1.0;
    Ok(base.powu(fac.omega()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerryEsseen {
    pub xi: f64,
    pub inv_sqrt_xi: f64,
    /// Contribution of `[0, EPS0]`, from the slope at 0.
    pub near_zero: f64,
    pub integral: f64,
    pub value: f64,
    pub panels: usize,
    /// Change in the integral when the panel width was last halved.
    pub halving_change: f64,
}

/// Largest `tau(n) / sum_{d | n, d^3 <= n} tau(d)^3` over `2 <= n <= N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LandreauCheck {
    pub n_max: u64,
    pub argmax: u64,
    pub tau: u64,
    pub denominator: u64,
}

impl LandreauCheck {
    pub fn ratio(&self) -> f64 {
        self.tau as f64 / self.denominator as f64
    }
}

/// Divisor counts `tau(n)` for `n <= limit`.
fn divisor_counts(limit: usize) -> Vec<u32> {
    let mut tau = vec![0u32; limit + 1];
    for d in 1..=limit {
        for m in (d..=limit).step_by(d) {
            tau[m] += 1;
        }
    }
    tau
}

/// Landreau denominators: `sum_{d | n, d^3 <= n} tau(d)^3` for `n <= limit`.
pub fn landreau_denominators(limit: u64) -> Vec<u64> {
    let tau = divisor_counts(icbrt(limit) as usize);
    let mut den = vec![0u64; limit as usize + 1];
    for d in 1..=icbrt(limit) {
        let t3 = (tau[d as usize] as u64).pow(3);
        let mut n = d * d * d;
        while n <= limit {
            den[n as usize] += t3;
            n += d;
        }
    }
    den
}

pub fn landreau_check(n_max: u64) -> Result<LandreauCheck> {
    if !(2..=LANDREAU_CAP).contains(&n_max) {
        return Err(Error::out_of_range("N", n_max, "must lie in [2, 1e7]"));
    }
    let tau = divisor_counts(n_max as usize);
    let den = landreau_denominators(n_max);
    let mut best = LandreauCheck {
        n_max,
        argmax: 2,
        tau: tau[2] as u64,
        denominator: den[2],
    };
    for n in 3..=n_max as usize {
        let (t, d) = (tau[n] as u64, den[n]);
        if t as u128 * best.denominator as u128 > best.tau as u128 * d as u128 {
            best = LandreauCheck {
                n_max,
                argmax: n as u64,
                tau: t,
                denominator: d,
            };
        }
    }
    Ok(best)
}

/// One row of the CDF comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfRow {
    pub t: f64,
    pub empirical_cdf: f64,
    pub phi: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EkReport {
    pub config: EkConfig,
    pub psi: u64,
    pub grid: Vec<CdfRow>,
    pub discrepancy: EkDiscrepancy,
    pub mean: f64,
    pub variance: f64,
    pub truncated_mean: f64,
    pub truncated_variance: f64,
    pub moments: EkMoments,
    pub berry_esseen: BerryEsseen,
    /// `log log log x / sqrt(log log x)`.
    pub budget: f64,
    pub histogram: OmegaHistogram,
}

/// The default grid: `t = -3, -2.75, ..., 3`.
pub fn default_t_grid() -> Vec<f64> {
    (-12..=12).map(|k| k as f64 * 0.25).collect()
}

pub fn ek_report(config: &EkConfig, grid: &[f64]) -> Result<EkReport> {
    let hist = OmegaHistogram::for_config(config)?;
    let rows = grid
        .iter()
        .map(|&t| {
            let e = hist.empirical_cdf(t);
            let phi = gaussian_cdf(t);
            CdfRow {
                t,
                empirical_cdf: e,
                phi,
                gap: (e - phi).abs(),
            }
        })
        .collect();
    let (mean, variance) = hist.full_moments();
    let (truncated_mean, truncated_variance) = hist.truncated_moments();
    let l2 = log_log(config.x as f64);
    Ok(EkReport {
        config: *config,
        psi: hist.psi,
        grid: rows,
        discrepancy: hist.discrepancy(),
        mean,
        variance,
        truncated_mean,
        truncated_variance,
        moments: hist.moments(config.big_y),
        berry_esseen: hist.berry_esseen(config.xi)?,
        budget: l2.ln() / l2.sqrt(),
        histogram: hist,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::{enumerate_friable, psi};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn omega_truncated_examples() {
        assert_eq!(omega_truncated(12, 2), 1);
        assert_eq!(omega_truncated(30, 4), 2);
        assert_eq!(omega_truncated(1, 10), 0);
        for n in 2..3000u64 {
            let fac = factorize_by_trial_division(n);
            assert_eq!(omega_truncated(n, fac.largest_prime()), fac.omega());
        }
    }

    #[test]
    fn histogram_matches_trial_division() {
        let (x, y, cutoff) = (60_000u64, 30u64, 11u64);
        let hist = OmegaHistogram::build(x, y, cutoff).unwrap();
        let mut full = vec![0u64; OMEGA_BINS];
        let mut truncated = vec![0u64; OMEGA_BINS];
        for n in enumerate_friable(x, y).unwrap().into_iter().skip(1) {
            let fac = factorize_by_trial_division(n - 1);
            full[fac.omega() as usize] += 1;
            truncated[fac.omega_up_to(cutoff) as usize] += 1;
        }
        assert_eq!(hist.full, full);
        assert_eq!(hist.truncated, truncated);
        assert_eq!(hist.full.iter().sum::<u64>(), hist.psi - 1);
        assert_eq!(hist.psi, psi(x, y).unwrap());
    }

    #[test]
    fn cdf_limits_and_direct_value() {
        let (x, y) = (100_000u64, 100_000u64);
        let hist = OmegaHistogram::build(x, y, 0).unwrap();
        let psi = hist.psi as f64;
        assert_eq!(hist.empirical_cdf(-1e9), 0.0);
        assert_eq!(hist.empirical_cdf(1e9), (psi - 1.0) / psi);
        let l = log_log(x as f64);
        let direct = (1..x)
            .filter(|&m| (factorize_by_trial_division(m).omega() as f64) <= l)
            .count() as f64
            / psi;
        assert_eq!(hist.empirical_cdf(0.0), direct);
        assert_eq!(empirical_cdf(x, y, 0.0).unwrap(), direct);
    }

    #[test]
    fn exact_discrepancy_dominates_and_tracks_grid() {
        for (x, y) in [(100_000u64, 100_000u64), (200_000, 1000), (50_000, 20)] {
            let hist = OmegaHistogram::build(x, y, 0).unwrap();
            let exact = hist.discrepancy();
            let l = log_log(x as f64);
            let (lo, hi) = (-l.sqrt() - 1.0, (OMEGA_BINS as f64 - l) / l.sqrt() + 1.0);
            let points = 10_000;
            let grid = hist.grid_discrepancy(lo, hi, points);
            let resolution = (hi - lo) / (points - 1) as f64 / (2.0 * std::f64::consts::PI).sqrt();
            assert!(grid <= exact.sup + 1e-15);
            assert!(exact.sup - grid <= resolution + 1e-12, "{x} {y}: {} vs {grid}", exact.sup);
        }
    }

    #[test]
    fn discrepancy_shrinks_along_the_diagonal() {
        let d4 = ek_discrepancy(10_000, 10_000).unwrap();
        let d6 = ek_discrepancy(1_000_000, 1_000_000).unwrap();
        assert!(d6.sup < d4.sup, "{d4:?} {d6:?}");
        assert!(!d6.degenerate);
    }

    #[test]
    fn tiny_inputs_are_flagged() {
        let d = ek_discrepancy(3, 2).unwrap();
        assert!(d.degenerate);
        assert!(d.sup >= 0.5 - 1e-12);
        assert!(ek_discrepancy(2, 2).is_err());
    }

    #[test]
    fn truncated_counter_agrees_when_cutoff_covers_x() {
        let (x, y) = (80_000u64, 500u64);
        let config = EkConfig::with_cutoff(x, y, x as f64, DEFAULT_C_Y).unwrap();
        let hist = OmegaHistogram::for_config(&config).unwrap();
        assert_eq!(hist.full, hist.truncated);
        for t in [-2.0, -0.5, 0.0, 0.7, 1.9] {
            assert_eq!(hist.truncated_cdf(t, config.xi), hist.empirical_cdf(t));
        }
        let psi = hist.psi as f64;
        assert_eq!(hist.truncated_cdf(1e9, config.xi), (psi - 1.0) / psi);
    }

    #[test]
    fn config_derives_y_and_xi() {
        let c = EkConfig::new(100_000, 1000, 2.0).unwrap();
        let lx = 100_000f64.ln();
        assert!((c.big_y.ln() - lx / lx.ln().powi(2)).abs() < 1e-12);
        assert!((c.xi - c.big_y.ln().ln()).abs() < 1e-15);
        assert!(c.big_y >= 2.0 && c.xi > 0.0);
        assert!(EkConfig::new(100_000, 1000, 4.0).is_err());
        assert!(EkConfig::new(100_000, 1000, 0.0).is_err());
        assert!(EkConfig::new(10, 10, 1.0).is_err());
    }

    #[test]
    fn moments_edge_cases() {
        let m = ek_moments(50_000, 100, 1.0).unwrap();
        assert_eq!((m.sum, m.sum_squares, m.xi), (0, 0, None));
        let config = EkConfig::new(100_000, 1000, DEFAULT_C_Y).unwrap();
        let m = ek_moments(100_000, 1000, config.big_y).unwrap();
        assert!(m.centered.unwrap() >= 0.0);
        assert!(m.sum_squares >= m.sum);
        let direct: u64 = enumerate_friable(100_000, 1000)
            .unwrap()
            .into_iter()
            .skip(1)
            .map(|n| omega_truncated(n - 1, config.cutoff()) as u64)
            .sum();
        assert_eq!(m.sum, direct);
    }

    #[test]
    fn f_theta_values_and_divisor_identity() {
        assert_eq!(f_theta(1, 0.7, 1.3).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(f_theta(4, 0.7, 1.3).unwrap(), Complex64::new(0.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (big_y, xi) in [(7u64, log_log(7.0)), (1000, log_log(1000.0))] {
            for theta in [0.3, 1.0] {
                for _ in 0..500 {
                    let m: u64 = rng.gen_range(1..=1_000_000);
                    let fac = factorize_by_trial_division(m);
                    let sum: Complex64 = fac
                        .divisors()
                        .into_iter()
                        .filter(|&d| factorize_by_trial_division(d).largest_prime() <= big_y)
                        .map(|d| f_theta(d, theta, xi).unwrap())
                        .sum();
                    let w = fac.omega_up_to(big_y) as f64;
                    let target = Complex64::from_polar(1.0, theta * w / xi.sqrt());
                    assert!((sum - target).norm() <= 1e-10, "m = {m}");
                }
            }
            let p = 5u64;
            let expected = Complex64::from_polar(1.0, 0.3 / xi.sqrt());
            let sum = f_theta(1, 0.3, xi).unwrap() + f_theta(p, 0.3, xi).unwrap();
            assert!((sum - expected).norm() < 1e-15);
        }
    }

    #[test]
    fn characteristic_function_properties() {
        let config = EkConfig::new(100_000, 1000, DEFAULT_C_Y).unwrap();
        let hist = OmegaHistogram::for_config(&config).unwrap();
        let xi = config.xi;
        let r0 = hist.char_fn_r(0.0, xi).unwrap();
        assert!((r0.re + 1.0 / hist.psi as f64).abs() <= 1e-14 && r0.im == 0.0);
        for k in 0..=20 {
            let theta = k as f64 / 20.0 * xi.sqrt();
            let r = hist.char_fn_r(theta, xi).unwrap();
            assert!(r.norm() <= 2.0);
            let mirrored = hist.r_unchecked(-theta, xi);
            assert!((mirrored - r.conj()).norm() <= 1e-15);
        }
        assert!(hist.char_fn_r(xi.sqrt() * 1.01, xi).is_err());
        assert!(hist.char_fn_r(-0.1, xi).is_err());
    }

    #[test]
    fn berry_esseen_diagnostic() {
        let config = EkConfig::new(100_000, 1000, DEFAULT_C_Y).unwrap();
        let be = berry_esseen_bound(&config).unwrap();
        assert!(be.value >= 1.0 / config.xi.sqrt());
        assert!(be.halving_change < 1e-3);
        assert!(be.near_zero >= 0.0);
    }

    fn landreau_by_divisors(n: u64) -> (u64, u64) {
        let fac = factorize_by_trial_division(n);
        let den = fac
            .divisors()
            .into_iter()
            .filter(|&d| d * d * d <= n)
            .map(|d| factorize_by_trial_division(d).tau().pow(3))
            .sum();
        (fac.tau(), den)
    }

    #[test]
    fn landreau_small_cases() {
        assert_eq!(landreau_by_divisors(6), (4, 1));
        let den = landreau_denominators(100_000);
        for p in primes_up_to(100_000) {
            assert_eq!(den[p as usize], 1, "p = {p}");
        }
        for n in 2..=3000u64 {
            assert_eq!(den[n as usize], landreau_by_divisors(n).1, "n = {n}");
        }
        let check = landreau_check(3000).unwrap();
        let mut best = (0u64, 1u64, 0u64);
        for n in 2..=3000u64 {
            let (t, d) = landreau_by_divisors(n);
            if t * best.1 > best.0 * d {
                best = (t, d, n);
            }
        }
        assert_eq!((check.tau, check.denominator, check.argmax), best);
        assert!(landreau_check(1).is_err());
        assert!(landreau_check(LANDREAU_CAP + 1).is_err());
    }

    #[test]
    fn mean_omega_drifts_above_log_log() {
        for x in [100_000u64, 1_000_000] {
            let hist = OmegaHistogram::build(x, x, 0).unwrap();
            let (mean, variance) = hist.full_moments();
            let drift = mean - log_log(x as f64);
            assert!((0.0..=1.0).contains(&drift), "x = {x}: {drift}");
            assert!(variance > 0.0);
        }
    }

    #[test]
    fn report_rows_are_consistent() {
        let config = EkConfig::new(100_000, 1000, DEFAULT_C_Y).unwrap();
        let report = ek_report(&config, &default_t_grid()).unwrap();
        let mut last = 0.0;
        for row in &report.grid {
            assert!(row.empirical_cdf >= last && row.empirical_cdf < 1.0);
            assert!(row.gap <= report.discrepancy.sup + 1e-15);
            last = row.empirical_cdf;
        }
        assert!(report.budget > 0.0);
    }
}
