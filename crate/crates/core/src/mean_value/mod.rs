//! Means of `f(n - 1)` over friable `n`, and the saddle-point prediction
//! `sum_q lambda(q) g_q(alpha) / phi(q)`.

mod spec;

pub use spec::{ArithmeticFunctionSpec, BudgetCheck, Builtin, Majorant, SpecMode, BUDGET_CHECK_LIMIT};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counting::{enumerate_friable, psi, FriableQuery, ENUMERATION_CAP};
use crate::factor::{factorize_by_trial_division, isqrt, primes_up_to, FactorSieve, Factorization};
use crate::numeric::CompensatedSum;
use crate::saddle::{solve_alpha, DEFAULT_TOL};
use crate::segment::{for_each_prime_power, map_shifted, segments};
use crate::{Error, Result};

/// Cap on `x` and on series length for direct (non-multiplicative) specs.
pub const DIRECT_CAP: u64 = 1_000_000;
/// Hard cap on the number of series terms.
pub const SERIES_CAP: u64 = 10_000_000;
/// The automatic truncation stops once the certified tail is below this.
pub const SERIES_TARGET: f64 = 1e-8;
/// Series and product must agree within tails no larger than this.
pub const AGREEMENT_TARGET: f64 = 1e-6;
/// Euler products run over primes up to this bound.
pub const PRODUCT_PRIME_BOUND: u64 = 10_000_000;
/// Default exponent in the regime test `(log x)^c <= y`.
pub const DEFAULT_REGIME_C: f64 = 3.0;

/// Explicit upper bound `pi(t) <= 1.25506 t / log t`, `t > 1`.
const PI_UPPER: f64 = 1.25506;

/// `lambda(n) = sum_{d | n} f(d) mu(n / d)`.
pub fn lambda_from_f<F: Fn(u64) -> f64>(f: F, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::out_of_range("n", n, "must be at least 1"));
    }
    Ok(lambda_from_factorization(f, &factorize_by_trial_division(n)))
}

/// Möbius inversion over the squarefree part: only `n / d` squarefree
/// contributes.
pub(crate) fn lambda_from_factorization<F: Fn(u64) -> f64>(f: F, n: &Factorization) -> f64 {
    let primes: Vec<u64> = n.primes().collect();
    let value = n.value();
    let mut acc = CompensatedSum::new();
    for mask in 0u32..(1 << primes.len()) {
        let mut d = value;
        for (i, &p) in primes.iter().enumerate() {
            if mask >> i & 1 == 1 {
                d /= p;
            }
        }
        let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        acc.add(sign * f(d));
    }
    acc.value()
}

/// `R_f(x, y)` with the sum over `S*(x, y)` and the raw pieces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMean {
    pub psi: u64,
    pub sum: f64,
    pub mean: f64,
}

pub fn empirical_mean(x: u64, y: u64, spec: &ArithmeticFunctionSpec) -> Result<f64> {
    empirical_mean_detail(x, y, spec).map(|m| m.mean)
}

pub fn empirical_mean_detail(x: u64, y: u64, spec: &ArithmeticFunctionSpec) -> Result<EmpiricalMean> {
    FriableQuery::new(x, y)?;
    if spec.multiplicative {
        if x > ENUMERATION_CAP {
            return Err(Error::out_of_range("x", x, "exceeds the enumeration cap of 1e8"));
        }
        let primes = primes_up_to(isqrt(x));
        let parts = map_shifted(
            x,
            y,
            &primes,
            1.0f64,
            |v, p, nu| *v *= spec.local_f(p, nu),
            |_, flags, values| {
                let mut sum = CompensatedSum::new();
                let mut count = 0u64;
                for (&f, &v) in flags.iter().zip(values) {
                    if f {
                        sum.add(v);
                        count += 1;
                    }
                }
                (sum, count)
            },
        );
        let mut sum = CompensatedSum::new();
        let mut psi = 1u64;
        for (s, c) in &parts {
            sum.merge(s);
            psi += c;
        }
        Ok(EmpiricalMean {
            psi,
            sum: sum.value(),
            mean: sum.value() / psi as f64,
        })
    } else {
        if x > DIRECT_CAP {
            return Err(Error::out_of_range("x", x, "exceeds the direct-mode cap of 1e6"));
        }
        let friable = enumerate_friable(x, y)?;
        let sum: CompensatedSum = friable
            .iter()
            .skip(1)
            .map(|&n| spec.f_of(&factorize_by_trial_division(n - 1)))
            .collect();
        let psi = friable.len() as u64;
        Ok(EmpiricalMean {
            psi,
            sum: sum.value(),
            mean: sum.value() / psi as f64,
        })
    }
}

/// How many series terms to sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Truncation {
    /// Smallest `Q'` whose certified tail is below [`SERIES_TARGET`], at
    /// most [`SERIES_CAP`] (or [`DIRECT_CAP`] for direct specs).
    Auto,
    Fixed(u64),
}

/// The predicted main term at one `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MainTerm {
    pub alpha: f64,
    /// `sum_{q <= terms} lambda(q) g_q(alpha) / phi(q)`.
    pub series: f64,
    pub terms: u64,
    /// Bound on `sum_{q > terms} |lambda(q)| g_q(alpha) / phi(q)`.
    pub series_tail: f64,
    /// False when the tail is the heuristic `B terms^(-beta/2)`.
    pub series_tail_certified: bool,
    /// The automatic truncation hit its cap before reaching its target.
    pub capped: bool,
    pub product: Option<f64>,
    /// Bound on the error from dropping primes above `product_prime_bound`.
    pub product_tail: Option<f64>,
    pub product_prime_bound: Option<u64>,
    pub disagreement: Option<f64>,
    /// Both tails certified, each at most [`AGREEMENT_TARGET`], and the two
    /// values within their sum.
    pub agreement_certified: bool,
    /// Product when available, series otherwise.
    pub value: f64,
}

/// `sum_{p > bound} k (p - 1)^-s` bounded by partial summation against
/// `pi(t) <= 1.25506 t / log t`.
pub fn prime_tail_bound(majorant: Majorant, bound: u64) -> f64 {
    let (k, s) = (majorant.k, majorant.s);
    if k == 0.0 {
        return 0.0;
    }
    let pm1 = bound as f64 - 1.0;
    PI_UPPER * k / (bound as f64).ln() * (s / (s - 1.0) * pm1.powf(1.0 - s) + pm1.powf(-s))
}

struct EulerProducts {
    signed: f64,
    absolute: f64,
    tail_sum: Option<f64>,
}

fn euler_products(spec: &ArithmeticFunctionSpec, alpha: f64, bound: u64) -> EulerProducts {
    let primes = primes_up_to(bound);
    let factors: Vec<(f64, f64)> = primes
        .par_iter()
        .map(|&p| {
            (
                1.0 + spec.local_series(p, alpha, false),
                1.0 + spec.local_series(p, alpha, true),
            )
        })
        .collect();
    let product = |vals: &mut dyn Iterator<Item = f64>| -> f64 {
        let vals: Vec<f64> = vals.collect();
        if vals.iter().all(|&v| v > 0.0) {
            let logs: CompensatedSum = vals.iter().map(|v| v.ln()).collect();
            logs.value().exp()
        } else {
            vals.iter().product()
        }
    };
    EulerProducts {
        signed: product(&mut factors.iter().map(|f| f.0)),
        absolute: product(&mut factors.iter().map(|f| f.1)),
        tail_sum: spec.majorant.map(|m| prime_tail_bound(m, bound)),
    }
}

/// Signed and absolute sums of `lambda(q) g_q(alpha) / phi(q)` over each
/// segment of `[1, hi)`, in order.
fn series_segments(
    spec: &ArithmeticFunctionSpec,
    alpha: f64,
    ranges: &[(u64, u64)],
    primes: &[u64],
) -> Vec<(CompensatedSum, CompensatedSum)> {
    ranges
        .par_iter()
        .map_init(
            || (Vec::new(), Vec::new()),
            |(rem, terms), &(lo, hi)| {
                series_terms(spec, alpha, lo, hi, primes, rem, terms);
                let mut s = CompensatedSum::new();
                let mut a = CompensatedSum::new();
                for &t in terms.iter() {
                    s.add(t);
                    a.add(t.abs());
                }
                (s, a)
            },
        )
        .collect()
}

fn series_terms(
    spec: &ArithmeticFunctionSpec,
    alpha: f64,
    lo: u64,
    hi: u64,
    primes: &[u64],
    rem: &mut Vec<u64>,
    terms: &mut Vec<f64>,
) {
    terms.clear();
    terms.resize((hi - lo) as usize, 1.0);
    for_each_prime_power(lo, hi, primes, rem, |i, p, nu| {
        if terms[i] != 0.0 {
            let pf = p as f64;
            let g = -(-alpha * pf.ln()).exp_m1();
            let phi = (pf - 1.0) * pf.powi(nu as i32 - 1);
            terms[i] *= spec.local_lambda(p, nu) * g / phi;
        }
    });
}

fn direct_series(spec: &ArithmeticFunctionSpec, alpha: f64, terms: u64) -> Result<(f64, f64)> {
    let sieve = FactorSieve::new(terms.max(2))?;
    let parts: Vec<(CompensatedSum, CompensatedSum)> = segments(1, terms + 1)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut s = CompensatedSum::new();
            let mut a = CompensatedSum::new();
            for q in lo..hi {
                let fac = sieve.factorize_unchecked(q);
                let lam = spec.lambda_of(&fac);
                if lam != 0.0 {
                    let t = lam * crate::saddle::g_q(&fac, alpha) / fac.phi() as f64;
                    s.add(t);
                    a.add(t.abs());
                }
            }
            (s, a)
        })
        .collect();
    let mut s = CompensatedSum::new();
    let mut a = CompensatedSum::new();
    for (ps, pa) in &parts {
        s.merge(ps);
        a.merge(pa);
    }
    Ok((s.value(), a.value()))
}

fn heuristic_tail(spec: &ArithmeticFunctionSpec, terms: u64) -> f64 {
    spec.b * (terms as f64).powf(-spec.beta / 2.0)
}

/// The main term at `alpha`, as a truncated series and, for multiplicative
/// specs, an Euler product over primes up to [`PRODUCT_PRIME_BOUND`].
pub fn predicted_main_term(spec: &ArithmeticFunctionSpec, alpha: f64, truncation: Truncation) -> Result<MainTerm> {
    predicted_main_term_with(spec, alpha, truncation, PRODUCT_PRIME_BOUND)
}

pub fn predicted_main_term_with(
    spec: &ArithmeticFunctionSpec,
    alpha: f64,
    truncation: Truncation,
    prime_bound: u64,
) -> Result<MainTerm> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::out_of_range("alpha", alpha, "must lie in (0, 2]"));
    }
    let cap = if spec.multiplicative { SERIES_CAP } else { DIRECT_CAP };
    if let Truncation::Fixed(q) = truncation {
        if q == 0 || q > cap {
            return Err(Error::out_of_range("truncation", q, "must lie in [1, series cap]"));
        }
    }
    if !spec.multiplicative {
        let terms = match truncation {
            Truncation::Fixed(q) => q,
            Truncation::Auto => cap,
        };
        let (series, _) = direct_series(spec, alpha, terms)?;
        let tail = heuristic_tail(spec, terms);
        return Ok(MainTerm {
            alpha,
            series,
            terms,
            series_tail: tail,
            series_tail_certified: false,
            capped: matches!(truncation, Truncation::Auto) && tail >= SERIES_TARGET,
            product: None,
            product_tail: None,
            product_prime_bound: None,
            disagreement: None,
            agreement_certified: false,
            value: series,
        });
    }
    if prime_bound < 3 {
        return Err(Error::out_of_range("prime bound", prime_bound, "must be at least 3"));
    }
    let euler = euler_products(spec, alpha, prime_bound);
    let (product_tail, abs_upper) = match euler.tail_sum {
        Some(s) => {
            let grow = s.exp_m1();
            // rounding slack on the logarithmic products
            let slack = 1e-12;
            (
                Some(euler.signed.abs() * (grow + slack)),
                Some(euler.absolute * (1.0 + grow + slack)),
            )
        }
        None => (None, None),
    };
    let limit = match truncation {
        Truncation::Fixed(q) => q,
        Truncation::Auto => cap,
    };
    let primes = primes_up_to(isqrt(limit));
    let ranges = segments(1, limit + 1);
    let mut signed = CompensatedSum::new();
    let mut absolute = CompensatedSum::new();
    let mut terms = limit;
    let mut reached = false;
    'batches: for batch in ranges.chunks(32) {
        let parts = series_segments(spec, alpha, batch, &primes);
        for (&(lo, hi), (s, a)) in batch.iter().zip(&parts) {
            let mut next = absolute;
            next.merge(a);
            let crossing = matches!(truncation, Truncation::Auto)
                && abs_upper.is_some_and(|u| u - next.value() < SERIES_TARGET);
            if crossing {
                // find the exact crossing inside this segment
                let u = abs_upper.unwrap_or(f64::INFINITY);
                let mut rem = Vec::new();
                let mut vals = Vec::new();
                series_terms(spec, alpha, lo, hi, &primes, &mut rem, &mut vals);
                for (i, &t) in vals.iter().enumerate() {
                    signed.add(t);
                    absolute.add(t.abs());
                    if u - absolute.value() < SERIES_TARGET {
                        terms = lo + i as u64;
                        break;
                    }
                }
                reached = true;
                break 'batches;
            }
            signed.merge(s);
            absolute = next;
        }
    }
    let (series_tail, certified) = match abs_upper {
        Some(u) => ((u - absolute.value()).max(0.0), true),
        None => (heuristic_tail(spec, terms), false),
    };
    let series = signed.value();
    let disagreement = (series - euler.signed).abs();
    let agreement_certified = match product_tail {
        Some(pt) if certified => {
            pt <= AGREEMENT_TARGET && series_tail <= AGREEMENT_TARGET && disagreement <= pt + series_tail
        }
        _ => false,
    };
    Ok(MainTerm {
        alpha,
        series,
        terms,
        series_tail,
        series_tail_certified: certified,
        capped: matches!(truncation, Truncation::Auto) && !reached,
        product: Some(euler.signed),
        product_tail,
        product_prime_bound: Some(prime_bound),
        disagreement: Some(disagreement),
        agreement_certified,
        value: euler.signed,
    })
}

/// `Q = ceil((x (log x)^2 / Psi(x, y))^(1 / beta))`.
pub fn truncation_q(x: u64, y: u64, beta: f64) -> Result<u64> {
    truncation_q_with_psi(x, psi(x, y)?, beta)
}

/// [`truncation_q`] for a known `Psi(x, y)`. `x` enters as the integer
/// `x`, so `y >= x` gives `Psi = x` and `Q = ceil((log x)^(2 / beta))`.
pub fn truncation_q_with_psi(x: u64, psi: u64, beta: f64) -> Result<u64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::out_of_range("beta", beta, "must lie in (0, 1]"));
    }
    if x < 2 || psi == 0 {
        return Err(Error::out_of_range("x", x, "must be at least 2"));
    }
    let xf = x as f64;
    let q = (xf * xf.ln().powi(2) / psi as f64).powf(1.0 / beta).ceil();
    if !(q < u64::MAX as f64) {
        return Err(Error::out_of_range("beta", beta, "makes Q overflow 64 bits"));
    }
    Ok(q as u64)
}

/// Knobs for [`mean_value_report`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanValueOptions {
    pub truncation: Truncation,
    pub prime_bound: u64,
    /// `c` in the regime test `(log x)^c <= y`.
    pub regime_c: f64,
}

impl Default for MeanValueOptions {
    fn default() -> Self {
        Self {
            truncation: Truncation::Auto,
            prime_bound: PRODUCT_PRIME_BOUND,
            regime_c: DEFAULT_REGIME_C,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanValueReport {
    pub spec: String,
    pub x: u64,
    pub y: u64,
    pub u: f64,
    pub alpha: f64,
    pub psi: u64,
    pub empirical: f64,
    pub predicted: MainTerm,
    pub predicted_at_one: MainTerm,
    /// `|predicted(alpha) - predicted(1)|`, next to `log(u + 1) / log y`.
    pub alpha_shift: f64,
    pub log_ratio: f64,
    /// `Q` from the `(x, y, beta)` formula.
    pub truncation_q: u64,
    /// `min(1/u, log(u + 1) / log y)`.
    pub budget: f64,
    /// `|empirical - predicted|`.
    pub gap: f64,
    pub regime_c: f64,
    /// Whether `(log x)^c <= y`. No claim that this matches any particular
    /// constant.
    pub in_regime: bool,
    pub budget_check: BudgetCheck,
}

pub fn mean_value_report(
    x: u64,
    y: u64,
    spec: &ArithmeticFunctionSpec,
    options: &MeanValueOptions,
) -> Result<MeanValueReport> {
    let query = FriableQuery::new(x, y)?;
    if x < 3 {
        return Err(Error::out_of_range("x", x, "must be at least 3"));
    }
    let budget_check = spec.check_budget(BUDGET_CHECK_LIMIT)?;
    if !budget_check.passed {
        return Err(Error::InvalidSpec(format!(
            "`{}` fails its (B, beta) spot-check: sum = {} > B = {} or majorant ratio {:?} > 1",
            spec.name, budget_check.sum, budget_check.b, budget_check.majorant_ratio
        )));
    }
    let mean = empirical_mean_detail(x, y, spec)?;
    let alpha = solve_alpha(x as f64, y.min(x), DEFAULT_TOL)?.alpha;
    let predicted = predicted_main_term_with(spec, alpha, options.truncation, options.prime_bound)?;
    let predicted_at_one = predicted_main_term_with(spec, 1.0, options.truncation, options.prime_bound)?;
    let u = query.u();
    let ly = (y as f64).ln();
    let log_ratio = (u + 1.0).ln() / ly;
    let lx = (x as f64).ln();
    Ok(MeanValueReport {
        spec: spec.name.clone(),
        x,
        y,
        u,
        alpha,
        psi: mean.psi,
        empirical: mean.mean,
        alpha_shift: (predicted.value - predicted_at_one.value).abs(),
        log_ratio,
        truncation_q: truncation_q_with_psi(x, mean.psi, spec.beta)?,
        budget: (1.0 / u).min(log_ratio),
        gap: (mean.mean - predicted.value).abs(),
        predicted,
        predicted_at_one,
        regime_c: options.regime_c,
        in_regime: lx.powf(options.regime_c) <= y as f64,
        budget_check,
    })
}
