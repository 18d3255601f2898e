//! Exact friable-number statistics at desk scale, side by side with their
//! analytic predictions.
//!
//! An integer is `y`-friable when its largest prime factor `P(n)` is at most
//! `y` (with `P(1) = 1`). This crate counts friable integers exactly
//! (globally, in residue classes, under coprimality), and measures two
//! statistics of the shifted values `n - 1`:
//!
//! * the mean of an arithmetic function `f(n - 1)`, compared against the
//!   saddle-point main term `sum_q lambda(q) g_q(alpha) / phi(q)`;
//! * the distribution of `omega(n - 1)`, compared against the Gaussian.
//!
//! Supporting objects live in their own modules: the Dickman function
//! ([`rho`]), the saddle point `alpha(x, y)` ([`saddle`]), discrepancies in
//! arithmetic progressions ([`counting`]).

pub mod counting;
pub mod erdos_kac;
mod error;
pub mod factor;
pub mod mean_value;
pub mod numeric;
pub mod report;
pub mod rho;
pub mod saddle;
pub mod segment;
pub mod selfcheck;

pub use error::{Error, Result};
pub use factor::{FactorSieve, Factorization};
