use std::fs;
use std::process::{Command, Output};

use friable_core::mean_value::MeanValueReport;
use friable_core::report::{from_csv, from_json, PsiRow};
use friable_core::selfcheck::Clause;

fn friable(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_friable"))
        .args(args)
        .env_remove("FRIABLE_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn psi_prints_the_count() {
    let out = friable(&["psi", "--x", "100", "--y", "5"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "34");
}

#[test]
fn psi_csv_lists_every_requested_quantity() {
    let out = friable(&["psi", "--x", "1e4", "--y", "7", "--q", "6", "--a", "1", "--format", "csv"]);
    assert!(out.status.success());
    let (kind, rows): (String, Vec<PsiRow>) = from_csv(&stdout(&out)).unwrap();
    assert_eq!(kind, "psi");
    let names: Vec<&str> = rows.iter().map(|r| r.quantity.as_str()).collect();
    assert_eq!(names, ["psi", "psi_coprime", "psi_progression"]);
    assert_eq!(rows[2].q, Some(6));
}

#[test]
fn alpha_meets_its_residual_contract() {
    let out = friable(&["alpha", "--x", "1e6", "--y", "100"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let field = |name: &str| -> f64 {
        text.lines()
            .find_map(|l| l.strip_prefix(name))
            .and_then(|v| v.trim().parse().ok())
            .unwrap()
    };
    let alpha = field("alpha =");
    let residual = field("residual =");
    assert!(alpha > 0.0 && alpha < 1.0);
    assert!(residual <= 1e-12 * 1e6f64.ln());
}

#[test]
fn bad_flags_exit_nonzero() {
    for args in [
        &["psi", "--x", "1.5", "--y", "5"][..],
        &["psi", "--x", "100"],
        &["psi", "--x", "100", "--y", "1"],
        &["rho", "--u-max", "80"],
        &["meanvalue", "--x", "1e4", "--y", "100", "--f", "tau"],
        &["erdoskac", "--x", "1e5", "--y", "1e3", "--c-y", "-1"],
        &["nonsense"],
    ] {
        let out = friable(args);
        assert!(!out.status.success(), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn meanvalue_writes_a_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mv.json");
    let out = friable(&[
        "meanvalue",
        "--x",
        "1e5",
        "--y",
        "1000",
        "--f",
        "phi_over_n",
        "--terms",
        "1e5",
        "--prime-bound",
        "1e5",
        "--format",
        "json",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: MeanValueReport = from_json(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!((report.x, report.y), (100_000, 1000));
    assert_eq!(report.spec, "phi_over_n");
    assert!(report.gap >= 0.0 && report.budget > 0.0);
}

#[test]
fn meanvalue_reads_spec_files() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("phi.spec");
    fs::write(&spec, "name = by_hand\nB = 3\nbeta = 0.5\nmajorant = 1 2\nlambda p = -1 * p^-1\n").unwrap();
    let run = |extra: &[&str]| {
        let mut args = vec!["meanvalue", "--x", "5e4", "--y", "300", "--terms", "1e4", "--prime-bound", "1e4"];
        args.extend_from_slice(extra);
        stdout(&friable(&args))
    };
    let by_hand = run(&["--spec-file", spec.to_str().unwrap()]);
    let builtin = run(&["--f", "phi_over_n"]);
    let pick = |s: &str| s.lines().find(|l| l.starts_with("R_f")).unwrap().to_string();
    assert_eq!(pick(&by_hand), pick(&builtin));
}

#[test]
fn output_dir_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_friable"))
        .args(["landreau", "--n", "1000"])
        .env("FRIABLE_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("landreau.csv")).unwrap();
    assert!(text.starts_with("# friable-csv v1 landreau\n"));
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for threads in ["1", "3"] {
        for (cmd, extra) in [
            ("erdoskac", &["--x", "3e5", "--y", "500"][..]),
            ("meanvalue", &["--x", "2e5", "--y", "300", "--f", "sigma_over_n", "--terms", "2e5", "--prime-bound", "2e5"]),
            ("discrepancy", &["--x", "2e5", "--y", "50", "--big-q", "40"]),
        ] {
            let path = dir.path().join(format!("{cmd}-{threads}.json"));
            let mut args = vec!["--threads", threads, "--format", "json", "--output", path.to_str().unwrap(), cmd];
            args.extend_from_slice(extra);
            let out = friable(&args);
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
            texts.push(fs::read(&path).unwrap());
        }
    }
    assert_eq!(texts[..3], texts[3..]);
}

#[test]
fn selfcheck_subset_reports_clauses() {
    let out = friable(&["selfcheck", "--only", "2,9", "--format", "csv"]);
    assert!(out.status.success());
    let (kind, clauses): (String, Vec<Clause>) = from_csv(&stdout(&out)).unwrap();
    assert_eq!(kind, "selfcheck");
    assert!(clauses.iter().all(|c| c.passed && (c.criterion == 2 || c.criterion == 9)));
    assert!(String::from_utf8_lossy(&out.stderr).contains("criterion 9 took"));
}
