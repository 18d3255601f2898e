//! Arithmetic functions `f` described through `lambda = f * mu`.
//!
//! A spec is either one of the [`Builtin`] functions, a table of rules
//! giving `lambda(p^k)` or `f(p^k)` (multiplicative), or an opaque closure
//! for `f` (direct mode, capped).
//!
//! # Spec files
//!
//! Plain text, one directive per line, `#` starts a comment:
//!
//! ```text
//! name = phi_over_n_by_hand
//! B = 3
//! beta = 0.5
//! majorant = 1 2
//! lambda p^1 = -1 * p^-1
//! ```
//!
//! * `builtin = <name>` selects a built-in; `B`, `beta` and `majorant`
//!   then default to the built-in's values but may be overridden.
//! * `lambda <pattern> = <value>` or `f <pattern> = <value>` adds a rule.
//!   A file uses one keyword only. Unmatched `lambda` rules read 0,
//!   unmatched `f` rules read 1.
//! * `<pattern>` is `p`, `p^<n>`, `p^k`, or the same with a literal prime
//!   instead of `p` (`2^k`). The most specific match wins: literal prime and
//!   exponent, then literal prime with `k`, then `p^<n>`, then `p^k`.
//! * `<value>` is `<coef> [* p^<e>] [* (p-1)^<e>]` with `<coef>` an integer,
//!   fraction `a/b` or decimal, and `<e>` an integer, `k` or `-k`.
//! * `majorant = K s` declares `sum_k |lambda(p^k)| g_p / phi(p^k) <=
//!   K (p - 1)^-s` for every prime, needed to certify Euler-product tails.
//!   It is spot-checked on the primes below [`BUDGET_CHECK_LIMIT`].

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::factor::{primes_up_to, FactorSieve, Factorization};
use crate::{Error, Result};

/// Range of the `(B, beta)` and majorant spot-checks.
pub const BUDGET_CHECK_LIMIT: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpecMode {
    DirectF,
    LambdaAtPrimePowers,
    MultiplicativeFAtPrimePowers,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    /// `f = 1`.
    One,
    /// `f(n) = phi(n) / n`.
    PhiOverN,
    /// `f(n) = sigma(n) / n`.
    SigmaOverN,
    /// `f(n) = n / phi(n)`.
    NOverPhi,
}

impl Builtin {
    pub const ALL: [Builtin; 4] = [Builtin::One, Builtin::PhiOverN, Builtin::SigmaOverN, Builtin::NOverPhi];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::One => "one",
            Builtin::PhiOverN => "phi_over_n",
            Builtin::SigmaOverN => "sigma_over_n",
            Builtin::NOverPhi => "n_over_phi",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.name() == name)
    }

    fn lambda(self, p: f64, k: u32) -> f64 {
        match (self, k) {
            (Builtin::One, _) => 0.0,
            (Builtin::PhiOverN, 1) => -1.0 / p,
            (Builtin::PhiOverN, _) => 0.0,
            (Builtin::SigmaOverN, _) => p.powi(-(k as i32)),
            (Builtin::NOverPhi, 1) => 1.0 / (p - 1.0),
            (Builtin::NOverPhi, _) => 0.0,
        }
    }

    fn f(self, p: f64, k: u32) -> f64 {
        match self {
            Builtin::One => 1.0,
            Builtin::PhiOverN => 1.0 - 1.0 / p,
            // 1 + 1/p + ... + 1/p^k
            Builtin::SigmaOverN => (1.0 - p.powi(-(k as i32) - 1)) / (1.0 - 1.0 / p),
            Builtin::NOverPhi => p / (p - 1.0),
        }
    }

    /// `(B, beta)`: `sum_q |lambda(q)| / q^(1 - beta) <= B`.
    fn budget(self) -> (f64, f64) {
        match self {
            Builtin::One => (1.0, 1.0),
            // zeta(3/2) / zeta(3) = 2.17...
            Builtin::PhiOverN => (3.0, 0.5),
            // zeta(3/2) = 2.61...
            Builtin::SigmaOverN => (3.0, 0.5),
            // prod_p (1 + 1/((p - 1) sqrt p)) = 3.1...
            Builtin::NOverPhi => (4.0, 0.5),
        }
    }

    fn majorant(self) -> Majorant {
        match self {
            Builtin::One => Majorant { k: 0.0, s: 2.0 },
            _ => Majorant { k: 1.0, s: 2.0 },
        }
    }
}

/// `sum_k |lambda(p^k)| g_p(alpha) / phi(p^k) <= k (p - 1)^-s` for all `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Majorant {
    pub k: f64,
    pub s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Exponent {
    Const(i32),
    K(i32),
}

impl Exponent {
    fn at(self, k: u32) -> i32 {
        match self {
            Exponent::Const(e) => e,
            Exponent::K(sign) => sign * k as i32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct PowerRule {
    prime: Option<u64>,
    power: Option<u32>,
    coef: f64,
    p_exp: Exponent,
    pm1_exp: Exponent,
}

impl PowerRule {
    fn matches(&self, p: u64, k: u32) -> bool {
        self.prime.is_none_or(|q| q == p) && self.power.is_none_or(|j| j == k)
    }

    fn specificity(&self) -> u8 {
        2 * self.prime.is_some() as u8 + self.power.is_some() as u8
    }

    fn eval(&self, p: u64, k: u32) -> f64 {
        let p = p as f64;
        self.coef * p.powi(self.p_exp.at(k)) * (p - 1.0).powi(self.pm1_exp.at(k))
    }
}

#[derive(Clone)]
enum ValueRule {
    Builtin(Builtin),
    Lambda(Vec<PowerRule>),
    LocalF(Vec<PowerRule>),
    Direct(Arc<dyn Fn(u64) -> f64 + Send + Sync>),
}

impl fmt::Debug for ValueRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueRule::Builtin(b) => f.debug_tuple("Builtin").field(b).finish(),
            ValueRule::Lambda(r) => f.debug_tuple("Lambda").field(r).finish(),
            ValueRule::LocalF(r) => f.debug_tuple("LocalF").field(r).finish(),
            ValueRule::Direct(_) => f.write_str("Direct(..)"),
        }
    }
}

fn lookup(rules: &[PowerRule], p: u64, k: u32) -> Option<&PowerRule> {
    rules
        .iter()
        .filter(|r| r.matches(p, k))
        .max_by_key(|r| r.specificity())
}

#[derive(Debug, Clone)]
pub struct ArithmeticFunctionSpec {
    pub name: String,
    pub mode: SpecMode,
    pub b: f64,
    pub beta: f64,
    pub multiplicative: bool,
    pub majorant: Option<Majorant>,
    rule: ValueRule,
}

/// Outcome of the `(B, beta)` spot-check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetCheck {
    pub limit: u64,
    pub sum: f64,
    pub b: f64,
    pub beta: f64,
    pub passed: bool,
    /// Largest `(sum_k |h(p^k)|) (p - 1)^s / K` over primes in range, when a
    /// majorant is declared.
    pub majorant_ratio: Option<f64>,
}

impl ArithmeticFunctionSpec {
    pub fn builtin(which: Builtin) -> Self {
        let (b, beta) = which.budget();
        Self {
            name: which.name().to_string(),
            mode: SpecMode::LambdaAtPrimePowers,
            b,
            beta,
            multiplicative: true,
            majorant: Some(which.majorant()),
            rule: ValueRule::Builtin(which),
        }
    }

    pub fn builtin_named(name: &str) -> Result<Self> {
        Builtin::from_name(name)
            .map(Self::builtin)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown built-in `{name}`")))
    }

    /// A non-multiplicative `f`, evaluated pointwise. `lambda` comes from
    /// divisor sums, so everything downstream is capped at
    /// [`super::DIRECT_CAP`].
    pub fn direct<F>(name: &str, f: F, b: f64, beta: f64) -> Result<Self>
    where
        F: Fn(u64) -> f64 + Send + Sync + 'static,
    {
        check_budget_params(b, beta)?;
        Ok(Self {
            name: name.to_string(),
            mode: SpecMode::DirectF,
            b,
            beta,
            multiplicative: false,
            majorant: None,
            rule: ValueRule::Direct(Arc::new(f)),
        })
    }

    pub fn builtin_kind(&self) -> Option<Builtin> {
        match self.rule {
            ValueRule::Builtin(b) => Some(b),
            _ => None,
        }
    }

    /// `lambda(p^k)`, `k >= 1`. Zero for direct specs.
    pub fn local_lambda(&self, p: u64, k: u32) -> f64 {
        match &self.rule {
            ValueRule::Builtin(b) => b.lambda(p as f64, k),
            ValueRule::Lambda(rules) => lookup(rules, p, k).map_or(0.0, |r| r.eval(p, k)),
            ValueRule::LocalF(_) => self.local_f(p, k) - self.local_f(p, k - 1),
            ValueRule::Direct(_) => 0.0,
        }
    }

    /// `f(p^k)`, `k >= 0`.
    pub fn local_f(&self, p: u64, k: u32) -> f64 {
        if k == 0 {
            return 1.0;
        }
        match &self.rule {
            ValueRule::Builtin(b) => b.f(p as f64, k),
            ValueRule::Lambda(_) => 1.0 + (1..=k).map(|j| self.local_lambda(p, j)).sum::<f64>(),
            ValueRule::LocalF(rules) => lookup(rules, p, k).map_or(1.0, |r| r.eval(p, k)),
            ValueRule::Direct(f) => f(p.pow(k)),
        }
    }

    pub fn f_of(&self, n: &Factorization) -> f64 {
        match &self.rule {
            ValueRule::Direct(f) => f(n.value()),
            _ => n.pairs().iter().map(|&(p, k)| self.local_f(p, k)).product(),
        }
    }

    pub fn lambda_of(&self, n: &Factorization) -> f64 {
        match &self.rule {
            ValueRule::Direct(f) => super::lambda_from_factorization(|d| f(d), n),
            _ => n.pairs().iter().map(|&(p, k)| self.local_lambda(p, k)).product(),
        }
    }

    /// `sum_{k >= 1} lambda(p^k) g_p(alpha) / phi(p^k)`, or the same with
    /// `|lambda|`. The Euler factor at `p` is one plus this.
    pub fn local_series(&self, p: u64, alpha: f64, absolute: bool) -> f64 {
        let pf = p as f64;
        let g = -(-alpha * pf.ln()).exp_m1();
        let mut sum = 0.0;
        let mut phi = pf - 1.0;
        for k in 1..=256u32 {
            let lam = self.local_lambda(p, k);
            let term = if absolute { lam.abs() } else { lam } / phi;
            sum += term;
            if k >= 2 && term.abs() <= 1e-20 * sum.abs().max(1e-300) {
                break;
            }
            phi *= pf;
            if !phi.is_finite() {
                break;
            }
        }
        g * sum
    }

    /// Spot-checks `sum_{q <= limit} |lambda(q)| / q^(1 - beta) <= B`, and
    /// the majorant on primes up to `limit`.
    pub fn check_budget(&self, limit: u64) -> Result<BudgetCheck> {
        let sieve = FactorSieve::new(limit.max(2))?;
        let exponent = 1.0 - self.beta;
        let sum: f64 = (1..=limit)
            .map(|q| {
                let fac = sieve.factorize_unchecked(q);
                self.lambda_of(&fac).abs() / (q as f64).powf(exponent)
            })
            .sum();
        let majorant_ratio = self.majorant.map(|m| {
            primes_up_to(limit)
                .into_iter()
                .map(|p| {
                    // worst case over alpha is g_p = 1
                    let s = self.local_series(p, f64::INFINITY, true);
                    if m.k == 0.0 {
                        if s == 0.0 {
                            0.0
                        } else {
                            f64::INFINITY
                        }
                    } else {
                        s * ((p - 1) as f64).powf(m.s) / m.k
                    }
                })
                .fold(0.0, f64::max)
        });
        Ok(BudgetCheck {
            limit,
            sum,
            b: self.b,
            beta: self.beta,
            passed: sum <= self.b && majorant_ratio.is_none_or(|r| r <= 1.0 + 1e-12),
            majorant_ratio,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse_spec(text)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidSpec(format!("{}: {e}", path.display())))?;
        parse_spec(&text)
    }
}

fn check_budget_params(b: f64, beta: f64) -> Result<()> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::out_of_range("B", b, "must be positive"));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::out_of_range("beta", beta, "must lie in (0, 1]"));
    }
    Ok(())
}

fn syntax(line: usize, message: impl Into<String>) -> Error {
    Error::SpecSyntax {
        line,
        message: message.into(),
    }
}

fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: f64 = a.trim().parse::<i64>().ok()? as f64;
        let b: i64 = b.trim().parse().ok()?;
        if b == 0 {
            return None;
        }
        return Some(a / b as f64);
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn parse_exponent(s: &str) -> Option<Exponent> {
    match s.trim() {
        "k" => Some(Exponent::K(1)),
        "-k" => Some(Exponent::K(-1)),
        t => t.parse().ok().map(Exponent::Const),
    }
}

fn parse_pattern(s: &str) -> Option<(Option<u64>, Option<u32>)> {
    let (base, power) = match s.split_once('^') {
        Some((b, e)) => (b.trim(), Some(e.trim())),
        None => (s.trim(), None),
    };
    let prime = match base {
        "p" => None,
        b => {
            let v: u64 = b.parse().ok()?;
            if v < 2 || crate::factor::factorize_by_trial_division(v).pairs() != [(v, 1)] {
                return None;
            }
            Some(v)
        }
    };
    let power = match power {
        None => Some(1),
        Some("k") => None,
        Some(e) => Some(e.parse::<u32>().ok().filter(|&e| e >= 1)?),
    };
    Some((prime, power))
}

fn parse_value(s: &str) -> Option<(f64, Exponent, Exponent)> {
    let mut parts = s.split('*').map(str::trim);
    let coef = parse_number(parts.next()?)?;
    let mut p_exp = Exponent::Const(0);
    let mut pm1_exp = Exponent::Const(0);
    for factor in parts {
        let (base, e) = factor.split_once('^').unwrap_or((factor, "1"));
        let e = parse_exponent(e)?;
        match base.trim() {
            "p" => p_exp = e,
            "(p-1)" | "(p - 1)" => pm1_exp = e,
            _ => return None,
        }
    }
    Some((coef, p_exp, pm1_exp))
}

fn parse_spec(text: &str) -> Result<ArithmeticFunctionSpec> {
    let mut name = None;
    let mut builtin = None;
    let mut b = None;
    let mut beta = None;
    let mut majorant = None;
    let mut keyword: Option<&str> = None;
    let mut rules = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (lhs, rhs) = line
            .split_once('=')
            .ok_or_else(|| syntax(line_no, "expected `key = value`"))?;
        let (lhs, rhs) = (lhs.trim(), rhs.trim());
        let mut words = lhs.split_whitespace();
        let head = words.next().unwrap_or("");
        match head {
            "name" => name = Some(rhs.to_string()),
            "builtin" => {
                builtin = Some(
                    Builtin::from_name(rhs).ok_or_else(|| syntax(line_no, format!("unknown built-in `{rhs}`")))?,
                )
            }
            "B" => b = Some(parse_number(rhs).ok_or_else(|| syntax(line_no, "bad number for B"))?),
            "beta" => beta = Some(parse_number(rhs).ok_or_else(|| syntax(line_no, "bad number for beta"))?),
            "majorant" => {
                let nums: Vec<f64> = rhs.split_whitespace().filter_map(parse_number).collect();
                if nums.len() != 2 || nums[0] < 0.0 || nums[1] <= 1.0 {
                    return Err(syntax(line_no, "majorant needs `K s` with K >= 0 and s > 1"));
                }
                majorant = Some(Majorant { k: nums[0], s: nums[1] });
            }
            "lambda" | "f" => {
                if keyword.is_some_and(|k| k != head) {
                    return Err(syntax(line_no, "cannot mix `lambda` and `f` rules"));
                }
                keyword = Some(if head == "f" { "f" } else { "lambda" });
                let pattern: String = words.collect::<Vec<_>>().join("");
                let (prime, power) =
                    parse_pattern(&pattern).ok_or_else(|| syntax(line_no, format!("bad pattern `{pattern}`")))?;
                let (coef, p_exp, pm1_exp) =
                    parse_value(rhs).ok_or_else(|| syntax(line_no, format!("bad value `{rhs}`")))?;
                rules.push(PowerRule {
                    prime,
                    power,
                    coef,
                    p_exp,
                    pm1_exp,
                });
            }
            other => return Err(syntax(line_no, format!("unknown key `{other}`"))),
        }
    }
    let mut spec = match (builtin, keyword) {
        (Some(_), Some(_)) => return Err(Error::InvalidSpec("a built-in takes no rules".into())),
        (Some(which), None) => ArithmeticFunctionSpec::builtin(which),
        (None, None) => return Err(Error::InvalidSpec("no built-in and no rules".into())),
        (None, Some(kw)) => {
            let (b, beta) = match (b, beta) {
                (Some(b), Some(beta)) => (b, beta),
                _ => return Err(Error::InvalidSpec("rule specs need both B and beta".into())),
            };
            let (mode, rule) = if kw == "f" {
                (SpecMode::MultiplicativeFAtPrimePowers, ValueRule::LocalF(rules))
            } else {
                (SpecMode::LambdaAtPrimePowers, ValueRule::Lambda(rules))
            };
            ArithmeticFunctionSpec {
                name: "custom".into(),
                mode,
                b,
                beta,
                multiplicative: true,
                majorant: None,
                rule,
            }
        }
    };
    if let Some(n) = name {
        spec.name = n;
    }
    if let Some(b) = b {
        spec.b = b;
    }
    if let Some(beta) = beta {
        spec.beta = beta;
    }
    if majorant.is_some() {
        spec.majorant = majorant;
    }
    check_budget_params(spec.b, spec.beta)?;
    Ok(spec)
}
