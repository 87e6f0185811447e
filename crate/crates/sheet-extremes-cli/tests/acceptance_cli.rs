//! CLI acceptance: determinism of `certify` across worker counts
//! (criterion 9) and the stable command surface.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sheet-extremes"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

/// Criterion 9: certify with a fixed seed produces byte-identical output
/// at workers in {1, 4, 8}.
#[test]
fn acceptance_9_certify_deterministic_across_workers() {
    let outputs: Vec<Vec<u8>> = ["1", "4", "8"]
        .iter()
        .map(|w| {
            let out = run(&[
                "certify",
                "--h",
                "0.4,0.6",
                "--eps",
                "2.5,3,4,6",
                "--paths",
                "5000",
                "--grid",
                "32x32",
                "--seed",
                "4242",
                "--workers",
                w,
            ]);
            assert!(
                out.status.success(),
                "certify failed: {}",
                String::from_utf8_lossy(&out.stderr)
            );
            out.stdout
        })
        .collect();
    assert_eq!(outputs[0], outputs[1], "workers 1 vs 4 differ");
    assert_eq!(outputs[0], outputs[2], "workers 1 vs 8 differ");
    assert!(!outputs[0].is_empty());
    println!("ACCEPTANCE 9 certify determinism across workers: PASS");
}

#[test]
fn bound_eq12_matches_library() {
    let out = run(&["bound", "--family", "eq12", "--h", "0.5,0.5", "--eps", "3"]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("version,family,"));
    let row = lines.next().unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    let value: f64 = fields[7].parse().unwrap();
    let expected = sheet_extremes::bounds::bound_unit_square_eps(
        sheet_extremes::HurstPair::new(0.5, 0.5).unwrap(),
        3.0,
    )
    .unwrap()
    .value
    .unwrap();
    assert!((value - expected).abs() <= 1e-12 * expected);
}

#[test]
fn bound_invalid_threshold_row_exits_zero() {
    let out = run(&[
        "bound", "--family", "eq12", "--h", "0.5,0.5", "--eps", "1.5",
    ]);
    assert!(out.status.success(), "invalid rows are data, not errors");
    let text = stdout_str(&out);
    let row = text.lines().nth(1).unwrap();
    assert!(row.contains("false"), "row should be marked invalid: {row}");
    // value column is empty
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[7], "");
}

#[test]
fn bound_quadrant_proofform_row() {
    // below the runtime threshold the row is invalid-marked, exit 0
    let out = run(&[
        "bound",
        "--domain",
        "quadrant",
        "--family",
        "eq21-proofform",
        "--phi",
        "phi1",
        "--eps",
        "6",
    ]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    assert!(text.lines().nth(1).unwrap().contains("eq21-proofform"));
    // above the threshold the relaxed series genuinely diverges: exit 1
    let out = run(&[
        "bound",
        "--domain",
        "quadrant",
        "--family",
        "eq21-proofform",
        "--phi",
        "phi1",
        "--eps",
        "12",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(
        run(&["bound", "--family", "nosuch", "--eps", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["bound", "--eps", "3", "--domain", "blob"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["certify", "--paths", "0", "--eps", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    // eps must ascend
    assert_eq!(
        run(&["bound", "--family", "eq12", "--eps", "4,3"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn verify_passes_and_typo_mode_fails() {
    let out = run(&[
        "verify", "--h", "0.3,0.7", "--paths", "2000", "--grid", "10x10",
    ]);
    assert!(
        out.status.success(),
        "verify failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let out = run(&[
        "verify",
        "--h",
        "0.3,0.7",
        "--paths",
        "2000",
        "--grid",
        "10x10",
        "--use-paper-eq7-exponent",
    ]);
    assert_eq!(
        out.status.code(),
        Some(1),
        "the alternate exponent must fail the identity check"
    );
    let text = stdout_str(&out);
    let vertical = text
        .lines()
        .find(|l| l.contains("increment-variance-vertical"))
        .expect("vertical check row");
    assert!(vertical.ends_with("false"));
}

#[test]
fn verify_covering_sweep_has_no_violations() {
    let out = run(&[
        "verify",
        "--h",
        "0.5,0.5",
        "--paths",
        "1000",
        "--grid",
        "8x8",
        "--covering-sweep",
    ]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    let covering_rows: Vec<&str> = text.lines().filter(|l| l.contains(",covering,")).collect();
    assert!(covering_rows.len() >= 20);
    for row in covering_rows {
        assert!(row.ends_with("true"), "covering violation: {row}");
    }
}

#[test]
fn config_file_with_cli_override() {
    let dir = std::env::temp_dir().join("sheet_extremes_cli_test");
    std::fs::create_dir_all(&dir).unwrap();
    let config_path = dir.join("campaign.toml");
    std::fs::write(
        &config_path,
        r#"
hurst = [[0.5, 0.5]]
domain = "unit"
eps = [2.5, 4.0]
paths = 500
seed = 11
grid = "16x16"
workers = 2
format = "csv"
"#,
    )
    .unwrap();
    let base = run(&["certify", "--config", config_path.to_str().unwrap()]);
    assert!(
        base.status.success(),
        "{}",
        String::from_utf8_lossy(&base.stderr)
    );
    let base_text = stdout_str(&base);
    assert!(base_text.contains("2.5"));

    // the command line overrides the file
    let over = run(&[
        "certify",
        "--config",
        config_path.to_str().unwrap(),
        "--eps",
        "3.0",
    ]);
    assert!(over.status.success());
    let over_text = stdout_str(&over);
    assert!(over_text.contains(",3.0,"));
    assert!(!over_text.contains(",2.5,"));
}

#[test]
fn env_seed_is_honored() {
    let with_env = bin()
        .args([
            "certify", "--h", "0.5,0.5", "--eps", "3", "--paths", "300", "--grid", "8x8",
        ])
        .env("SHEET_EXTREMES_SEED", "777")
        .output()
        .unwrap();
    let with_flag = run(&[
        "certify", "--h", "0.5,0.5", "--eps", "3", "--paths", "300", "--grid", "8x8", "--seed",
        "777",
    ]);
    assert_eq!(with_env.stdout, with_flag.stdout);
}

#[test]
fn report_summarizes_json_and_csv() {
    let dir = std::env::temp_dir().join("sheet_extremes_cli_report");
    std::fs::create_dir_all(&dir).unwrap();
    for format in ["csv", "json"] {
        let path = dir.join(format!("certify.{format}"));
        let out = run(&[
            "certify",
            "--h",
            "0.5,0.5",
            "--eps",
            "3,5",
            "--paths",
            "400",
            "--grid",
            "8x8",
            "--seed",
            "5",
            "--format",
            format,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        let rep = run(&["report", "--input", path.to_str().unwrap()]);
        assert!(
            rep.status.success(),
            "{}",
            String::from_utf8_lossy(&rep.stderr)
        );
        let text = stdout_str(&rep);
        assert!(text.contains("violated: 0"), "{text}");
    }
}

#[test]
fn optimize_command_reports_best_family() {
    let out = run(&["optimize", "--h", "0.5,0.5", "--eps", "5"]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    let best_rows: Vec<&str> = text.lines().filter(|l| l.ends_with("true")).collect();
    assert_eq!(best_rows.len(), 1, "exactly one best family: {text}");
}
