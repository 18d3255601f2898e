//! `friable`: command-line front end for friable-core.

mod number;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use friable_core::counting::{self, discrepancy, psi, psi_coprime, psi_progression, tau_cubed};
use friable_core::erdos_kac::{self, default_t_grid, ek_report, landreau_check, EkConfig};
use friable_core::mean_value::{mean_value_report, ArithmeticFunctionSpec, MeanValueOptions, Truncation};
use friable_core::report::{
    ek_rows, to_csv, to_json, AlphaRow, LandreauRow, MeanValueRow, PsiRow, RhoRow,
};
use friable_core::rho::RhoTable;
use friable_core::saddle::solve_alpha;
use friable_core::selfcheck::{self, SelfCheckReport, CRITERIA};

/// Exit status when `selfcheck` ran but some criterion failed.
const EXIT_CRITERIA_FAILED: u8 = 3;

fn integer(s: &str) -> Result<u64, String> {
    number::parse_integer(s)
}

#[derive(Parser, Debug)]
#[command(name = "friable", version, about = "Friable-number statistics against their analytic predictions")]
struct Cli {
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Report format. Without --output or FRIABLE_OUTPUT_DIR the report goes
    /// to stdout; with neither --format nor a destination only a summary is
    /// printed.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Report file.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Directory for report files when --output is absent; files are named
    /// after the subcommand.
    #[arg(long, global = true, env = "FRIABLE_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Psi(x, y); with --q also Psi_q(x, y); with --q and --a also Psi(x, y; a, q).
    Psi(PsiArgs),
    /// Delta(x, y; Q) with per-modulus rows.
    Discrepancy(DiscrepancyArgs),
    /// The Dickman function on a grid, or at one point.
    Rho(RhoArgs),
    /// The saddle point alpha(x, y).
    Alpha(AlphaArgs),
    /// Empirical mean of f(n - 1) over friable n against the predicted main term.
    Meanvalue(MeanValueArgs),
    /// Distribution of omega(n - 1) over friable n against the Gaussian.
    Erdoskac(ErdosKacArgs),
    /// Largest tau(n) / sum_{d | n, d^3 <= n} tau(d)^3 for n <= N.
    Landreau(LandreauArgs),
    /// Runs the acceptance criteria.
    Selfcheck(SelfCheckArgs),
}

#[derive(Args, Debug)]
struct PsiArgs {
    #[arg(long, value_parser = integer)]
    x: u64,
    #[arg(long, value_parser = integer)]
    y: u64,
    #[arg(long, value_parser = integer)]
    q: Option<u64>,
    #[arg(long, value_parser = integer, requires = "q")]
    a: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Weight {
    Unit,
    TauCubed,
}

#[derive(Args, Debug)]
struct DiscrepancyArgs {
    #[arg(long, value_parser = integer)]
    x: u64,
    #[arg(long, value_parser = integer)]
    y: u64,
    /// Largest modulus Q.
    #[arg(long = "big-q", value_parser = integer)]
    big_q: u64,
    /// Weight for the weighted total.
    #[arg(long, value_enum, default_value = "unit")]
    weight: Weight,
}

#[derive(Args, Debug)]
struct RhoArgs {
    #[arg(long, default_value_t = friable_core::rho::DEFAULT_U_MAX)]
    u_max: f64,
    #[arg(long, default_value_t = friable_core::rho::DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = 0.125)]
    spacing: f64,
    /// Print rho at this single point instead of a grid.
    #[arg(long)]
    u: Option<f64>,
}

#[derive(Args, Debug)]
struct AlphaArgs {
    #[arg(long, value_parser = integer)]
    x: u64,
    #[arg(long, value_parser = integer)]
    y: u64,
    #[arg(long, default_value_t = friable_core::saddle::DEFAULT_TOL)]
    tol: f64,
}

#[derive(Args, Debug)]
struct MeanValueArgs {
    #[arg(long, value_parser = integer)]
    x: u64,
    #[arg(long, value_parser = integer)]
    y: u64,
    /// Built-in function: one, phi_over_n, sigma_over_n, n_over_phi.
    #[arg(long, conflicts_with = "spec_file")]
    f: Option<String>,
    /// Spec file (see README for the grammar).
    #[arg(long)]
    spec_file: Option<PathBuf>,
    /// Fixed number of series terms instead of the automatic truncation.
    #[arg(long, value_parser = integer)]
    terms: Option<u64>,
    #[arg(long, value_parser = integer, default_value = "1e7")]
    prime_bound: u64,
    /// Exponent c in the regime test (log x)^c <= y.
    #[arg(long, default_value_t = friable_core::mean_value::DEFAULT_REGIME_C)]
    regime_c: f64,
}

#[derive(Args, Debug)]
struct ErdosKacArgs {
    #[arg(long, value_parser = integer)]
    x: u64,
    #[arg(long, value_parser = integer)]
    y: u64,
    /// Exponent in Y = exp(log x / (log log x)^c_Y).
    #[arg(long, default_value_t = erdos_kac::DEFAULT_C_Y)]
    c_y: f64,
    /// Grid as `start:stop:step`.
    #[arg(long)]
    t_grid: Option<String>,
}

#[derive(Args, Debug)]
struct LandreauArgs {
    #[arg(long, value_parser = integer)]
    n: u64,
}

#[derive(Args, Debug)]
struct SelfCheckArgs {
    /// Comma-separated criterion numbers (default: all).
    #[arg(long, value_delimiter = ',')]
    only: Option<Vec<u8>>,
}

/// Where a report goes.
struct Sink {
    format: Option<Format>,
    path: Option<PathBuf>,
}

impl Sink {
    fn new(cli: &Cli, name: &str) -> Self {
        let format = cli.format;
        let path = cli.output.clone().or_else(|| {
            cli.output_dir
                .as_ref()
                .map(|d| d.join(format!("{name}.{}", format.unwrap_or(Format::Csv).extension())))
        });
        Self { format, path }
    }

    /// Writes the report if a format or destination was asked for; returns
    /// whether the summary should still go to stdout.
    fn emit<R: Serialize, S: Serialize>(&self, kind: &str, rows: &[R], record: &S) -> Result<bool> {
        if self.format.is_none() && self.path.is_none() {
            return Ok(true);
        }
        let text = match self.format.unwrap_or(Format::Csv) {
            Format::Csv => to_csv(kind, rows)?,
            Format::Json => to_json(record)?,
        };
        match &self.path {
            Some(path) => {
                write_file(path, &text)?;
                Ok(true)
            }
            None => {
                print!("{text}");
                Ok(false)
            }
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("bad t-grid `{spec}`"))?;
    let [start, stop, step] = parts[..] else {
        bail!("t-grid must be start:stop:step");
    };
    if !(step > 0.0) || !(stop >= start) || (stop - start) / step > 1e6 {
        bail!("t-grid `{spec}` needs step > 0, stop >= start and at most 1e6 points");
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Psi(a) => {
            let sink = Sink::new(cli, "psi");
            let mut rows = vec![PsiRow {
                quantity: "psi".into(),
                x: a.x,
                y: a.y,
                q: None,
                a: None,
                value: psi(a.x, a.y)?,
            }];
            if let Some(q) = a.q {
                rows.push(PsiRow {
                    quantity: "psi_coprime".into(),
                    x: a.x,
                    y: a.y,
                    q: Some(q),
                    a: None,
                    value: psi_coprime(a.x, a.y, q)?,
                });
                if let Some(r) = a.a {
                    rows.push(PsiRow {
                        quantity: "psi_progression".into(),
                        x: a.x,
                        y: a.y,
                        q: Some(q),
                        a: Some(r),
                        value: psi_progression(a.x, a.y, r, q)?,
                    });
                }
            }
            if sink.emit("psi", &rows, &rows)? {
                for r in &rows {
                    println!("{}", r.value);
                }
            }
        }
        Command::Discrepancy(a) => {
            let sink = Sink::new(cli, "discrepancy");
            let report = discrepancy(a.x, a.y, a.big_q)?;
            let weighted = match a.weight {
                Weight::Unit => report.weighted_total,
                Weight::TauCubed => counting::weighted_discrepancy(a.x, a.y, a.big_q, tau_cubed)?,
            };
            if sink.emit("discrepancy", &report.rows, &report)? {
                println!("Delta = {}", report.delta);
                println!("weighted = {weighted}");
            }
        }
        Command::Rho(a) => {
            let sink = Sink::new(cli, "rho");
            let table = RhoTable::build(a.u_max, a.tol)?;
            match a.u {
                Some(u) => {
                    let v = table.rho_checked(u)?;
                    let rows = vec![RhoRow { u, rho: v.value }];
                    if sink.emit("rho", &rows, &rows)? {
                        println!("{}{}", v.value, if v.underflow { " (underflow)" } else { "" });
                    }
                }
                None => {
                    if !(a.spacing > 0.0) {
                        bail!("spacing must be positive");
                    }
                    let rows: Vec<RhoRow> = table.grid(a.spacing).into_iter().map(|(u, rho)| RhoRow { u, rho }).collect();
                    if sink.emit("rho", &rows, &rows)? {
                        println!("{} grid points on [0, {}], pieces per unit {}", rows.len(), table.u_max(), table.pieces());
                    }
                }
            }
        }
        Command::Alpha(a) => {
            let sink = Sink::new(cli, "alpha");
            let sp = solve_alpha(a.x as f64, a.y, a.tol)?;
            let rows = vec![AlphaRow::from(&sp)];
            if sink.emit("alpha", &rows, &sp)? {
                println!("alpha = {}", sp.alpha);
                println!("residual = {:e}", sp.residual);
            }
        }
        Command::Meanvalue(a) => {
            let sink = Sink::new(cli, "meanvalue");
            let spec = match (&a.f, &a.spec_file) {
                (Some(name), None) => ArithmeticFunctionSpec::builtin_named(name)?,
                (None, Some(path)) => ArithmeticFunctionSpec::from_file(path)?,
                _ => bail!("give exactly one of --f and --spec-file"),
            };
            let options = MeanValueOptions {
                truncation: a.terms.map_or(Truncation::Auto, Truncation::Fixed),
                prime_bound: a.prime_bound,
                regime_c: a.regime_c,
            };
            let report = mean_value_report(a.x, a.y, &spec, &options)?;
            let rows = vec![MeanValueRow::from(&report)];
            if sink.emit("meanvalue", &rows, &report)? {
                println!("R_f = {}", report.empirical);
                println!("predicted = {}", report.predicted.value);
                println!("gap = {:e}", report.gap);
                println!("budget = {}", report.budget);
                if report.predicted.capped {
                    println!("note: series truncation hit its cap");
                }
                if !report.predicted.agreement_certified {
                    println!("note: series/product agreement not certified");
                }
            }
        }
        Command::Erdoskac(a) => {
            let sink = Sink::new(cli, "erdoskac");
            let config = EkConfig::new(a.x, a.y, a.c_y)?;
            let grid = match &a.t_grid {
                Some(g) => parse_grid(g)?,
                None => default_t_grid(),
            };
            let report = ek_report(&config, &grid)?;
            if sink.emit("erdoskac", ek_rows(&report), &report)? {
                println!("discrepancy = {}", report.discrepancy.sup);
                println!("berry_esseen = {}", report.berry_esseen.value);
                println!("budget = {}", report.budget);
            }
        }
        Command::Landreau(a) => {
            let sink = Sink::new(cli, "landreau");
            let check = landreau_check(a.n)?;
            let rows = vec![LandreauRow::from(&check)];
            if sink.emit("landreau", &rows, &check)? {
                println!("max ratio = {}/{} at n = {}", check.tau, check.denominator, check.argmax);
            }
        }
        Command::Selfcheck(a) => {
            let sink = Sink::new(cli, "selfcheck");
            let ids = a.only.clone().unwrap_or_else(|| CRITERIA.to_vec());
            let mut clauses = Vec::new();
            for id in ids {
                let start = Instant::now();
                clauses.extend(selfcheck::run_criterion(id)?);
                eprintln!("criterion {id} took {:.1} s", start.elapsed().as_secs_f64());
            }
            let report = SelfCheckReport { clauses };
            if sink.emit("selfcheck", &report.clauses, &report)? {
                for c in &report.clauses {
                    let status = if c.passed { "PASS" } else { "FAIL" };
                    println!("[{status}] {}: {} (observed {}, threshold {})", c.criterion, c.label, c.observed, c.threshold);
                }
            }
            if !report.failing().is_empty() {
                return Ok(ExitCode::from(EXIT_CRITERIA_FAILED));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
