//! Report serialization.
//!
//! CSV files start with one comment line `# friable-csv v1 <kind>` followed
//! by a header row; the column order of every row type below is frozen.
//! JSON reports are pretty-printed with a trailing newline. Floats are
//! written in shortest round-trip form, so equal values give equal bytes.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::erdos_kac::{CdfRow, EkReport, LandreauCheck};
use crate::mean_value::MeanValueReport;
use crate::saddle::SaddlePoint;
use crate::{Error, Result};

pub const CSV_VERSION: &str = "friable-csv v1";

fn report_error(e: impl std::fmt::Display) -> Error {
    Error::Report(e.to_string())
}

pub fn to_csv<S: Serialize>(kind: &str, rows: &[S]) -> Result<String> {
    let mut out = format!("# {CSV_VERSION} {kind}\n").into_bytes();
    {
        let mut writer = csv::Writer::from_writer(&mut out);
        for row in rows {
            writer.serialize(row).map_err(report_error)?;
        }
        writer.flush().map_err(report_error)?;
    }
    String::from_utf8(out).map_err(report_error)
}

/// Parses a CSV report, returning its kind and rows.
pub fn from_csv<T: DeserializeOwned>(text: &str) -> Result<(String, Vec<T>)> {
    let (first, body) = text.split_once('\n').unwrap_or((text, ""));
    let kind = first
        .strip_prefix("# ")
        .and_then(|rest| rest.strip_prefix(CSV_VERSION))
        .map(|k| k.trim().to_string())
        .ok_or_else(|| Error::Report(format!("missing `# {CSV_VERSION}` header line")))?;
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let rows = reader
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(report_error)?;
    Ok((kind, rows))
}

pub fn to_json<S: Serialize>(value: &S) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(report_error)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(report_error)
}

/// `psi` rows. `quantity` is `psi`, `psi_coprime` or `psi_progression`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiRow {
    pub quantity: String,
    pub x: u64,
    pub y: u64,
    pub q: Option<u64>,
    pub a: Option<u64>,
    pub value: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoRow {
    pub u: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaRow {
    pub x: f64,
    pub y: u64,
    pub alpha: f64,
    pub residual: f64,
    pub primes_used: usize,
}

impl From<&SaddlePoint> for AlphaRow {
    fn from(s: &SaddlePoint) -> Self {
        Self {
            x: s.x,
            y: s.y,
            alpha: s.alpha,
            residual: s.residual,
            primes_used: s.primes_used,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanValueRow {
    pub spec: String,
    pub x: u64,
    pub y: u64,
    pub u: f64,
    pub alpha: f64,
    pub psi: u64,
    pub empirical: f64,
    pub predicted: f64,
    pub predicted_at_one: f64,
    pub series: f64,
    pub series_terms: u64,
    pub series_tail: f64,
    pub product_tail: Option<f64>,
    pub truncation_q: u64,
    pub budget: f64,
    pub gap: f64,
    pub capped: bool,
    pub agreement_certified: bool,
    pub in_regime: bool,
}

impl From<&MeanValueReport> for MeanValueRow {
    fn from(r: &MeanValueReport) -> Self {
        Self {
            spec: r.spec.clone(),
            x: r.x,
            y: r.y,
            u: r.u,
            alpha: r.alpha,
            psi: r.psi,
            empirical: r.empirical,
            predicted: r.predicted.value,
            predicted_at_one: r.predicted_at_one.value,
            series: r.predicted.series,
            series_terms: r.predicted.terms,
            series_tail: r.predicted.series_tail,
            product_tail: r.predicted.product_tail,
            truncation_q: r.truncation_q,
            budget: r.budget,
            gap: r.gap,
            capped: r.predicted.capped,
            agreement_certified: r.predicted.agreement_certified,
            in_regime: r.in_regime,
        }
    }
}

/// The CSV form of an [`EkReport`] is its grid.
pub fn ek_rows(report: &EkReport) -> &[CdfRow] {
    &report.grid
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandreauRow {
    pub n_max: u64,
    pub argmax: u64,
    pub tau: u64,
    pub denominator: u64,
    pub ratio: f64,
}

impl From<&LandreauCheck> for LandreauRow {
    fn from(c: &LandreauCheck) -> Self {
        Self {
            n_max: c.n_max,
            argmax: c.argmax,
            tau: c.tau,
            denominator: c.denominator,
            ratio: c.ratio(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::erdos_kac::{default_t_grid, ek_report, landreau_check, EkConfig};
    use crate::mean_value::{mean_value_report, ArithmeticFunctionSpec, Builtin, MeanValueOptions, Truncation};

    #[test]
    fn csv_round_trip_with_header() {
        let rows = vec![
            RhoRow { u: 0.5, rho: 1.0 },
            RhoRow {
                u: 2.5,
                rho: 0.130_319_6,
            },
        ];
        let text = to_csv("rho", &rows).unwrap();
        assert!(text.starts_with("# friable-csv v1 rho\nu,rho\n"));
        let (kind, back): (String, Vec<RhoRow>) = from_csv(&text).unwrap();
        assert_eq!(kind, "rho");
        assert_eq!(back, rows);
        assert!(from_csv::<RhoRow>("u,rho\n1,1\n").is_err());
    }

    #[test]
    fn optional_columns_survive() {
        let rows = vec![
            PsiRow {
                quantity: "psi".into(),
                x: 100,
                y: 5,
                q: None,
                a: None,
                value: 34,
            },
            PsiRow {
                quantity: "psi_progression".into(),
                x: 100,
                y: 5,
                q: Some(4),
                a: Some(1),
                value: 11,
            },
        ];
        let (_, back): (String, Vec<PsiRow>) = from_csv(&to_csv("psi", &rows).unwrap()).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn json_reports_round_trip() {
        let spec = ArithmeticFunctionSpec::builtin(Builtin::PhiOverN);
        let opts = MeanValueOptions {
            truncation: Truncation::Fixed(20_000),
            prime_bound: 20_000,
            ..Default::default()
        };
        let mv = mean_value_report(50_000, 100, &spec, &opts).unwrap();
        let back: MeanValueReport = from_json(&to_json(&mv).unwrap()).unwrap();
        assert_eq!(back, mv);
        let rows = vec![MeanValueRow::from(&mv)];
        let (_, back): (String, Vec<MeanValueRow>) = from_csv(&to_csv("meanvalue", &rows).unwrap()).unwrap();
        assert_eq!(back, rows);

        let config = EkConfig::new(50_000, 300, 2.0).unwrap();
        let ek = ek_report(&config, &default_t_grid()).unwrap();
        let back: EkReport = from_json(&to_json(&ek).unwrap()).unwrap();
        assert_eq!(back, ek);
        let text = to_csv("erdoskac", ek_rows(&ek)).unwrap();
        assert!(text.lines().nth(1) == Some("t,empirical_cdf,phi,gap"));

        let lc = landreau_check(1000).unwrap();
        let back: LandreauCheck = from_json(&to_json(&lc).unwrap()).unwrap();
        assert_eq!(back, lc);
    }
}
