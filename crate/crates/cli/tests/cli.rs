use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use num_rational::Rational64;
use quadgen::{
    interpolatory_rule, phase_nodes, DiscreteMeasure, EquilibriumMeasure, PhaseFunction,
    QuadratureRule, RuleMeta,
};

fn quadgen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quadgen"))
        .args(args)
        .env_remove("QUADGEN_DISC_POINTS")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = quadgen(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn csv_column(text: &str, col: &str) -> Vec<f64> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let idx = r.headers().unwrap().iter().position(|h| h == col).unwrap();
    r.records()
        .map(|rec| rec.unwrap()[idx].parse().unwrap())
        .collect()
}

#[test]
fn chebyshev_nodes_from_the_command_line() {
    let text = stdout(&["nodes", "--a", "1", "--n", "4", "--format", "csv"]);
    let x = csv_column(&text, "x_j");
    let dev = csv_column(&text, "deviation");
    assert_eq!(x.len(), 4);
    for (j, &xj) in x.iter().enumerate() {
        let expected = ((2 * (4 - j) - 1) as f64 * std::f64::consts::PI / 8.0).cos();
        assert!((xj - expected).abs() < 1e-15);
    }
    assert!(dev.iter().all(|d| d.abs() < 1e-13));
}

#[test]
fn closed_form_output_matches_phase_output() {
    let rounded = |args: &[&str]| -> Vec<String> {
        csv_column(&stdout(args), "x_j")
            .iter()
            .map(|x| format!("{x:.10}"))
            .collect()
    };
    let base = [
        "nodes", "--a", "1/2", "--zeta", "3", "--n", "8", "--format", "csv",
    ];
    let phase = rounded(&base);
    let mut cf = base.to_vec();
    cf.push("--closed-form");
    assert_eq!(phase, rounded(&cf));
}

#[test]
fn invalid_configurations_exit_with_code_2() {
    for args in [
        vec!["nodes", "--a", "1/2", "--zeta", "1.5", "--n", "8"],
        vec![
            "nodes",
            "--a",
            "1/2",
            "--zeta",
            "1.5",
            "--n",
            "8",
            "--closed-form",
        ],
        vec!["nodes", "--a", "3/2", "--zeta", "3", "--n", "8"],
        vec!["nodes", "--a", "0.5", "--zeta", "3", "--n", "8"],
        vec!["nodes", "--a", "1/2", "--n", "8"],
        vec![
            "nodes",
            "--a",
            "1/3",
            "--zeta",
            "3",
            "--n",
            "8",
            "--closed-form",
        ],
        vec![
            "weights", "--method", "varying", "--a", "1/3", "--zeta", "3", "--n", "4",
        ],
        vec!["study", "--a", "1", "--n-range", "8:4:1"],
        vec!["asym", "--a", "1/2", "--zeta", "3"],
        vec!["balayage", "--a", "1"],
    ] {
        let out = quadgen(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn perturbed_nodes_outside_the_phase_budget_exit_with_code_3() {
    let out = quadgen(&[
        "nodes", "--a", "1", "--n", "20", "--A", "1e-3", "--ell", "0.1", "--seed", "1",
    ]);
    assert_eq!(out.status.code(), Some(3));
    // The table is still written.
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"admissible\": false"));
}

#[test]
fn failed_study_verdict_is_reported_in_the_exit_code() {
    let out = quadgen(&[
        "study",
        "--equally-spaced",
        "--a",
        "1",
        "--n-range",
        "8:64:8",
    ]);
    assert_eq!(out.status.code(), Some(4));
    let out = quadgen(&["study", "--a", "1/2", "--zeta", "3", "--n-range", "8:64:8"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn identical_configuration_gives_identical_bytes() {
    for (name, args) in [
        (
            "study",
            vec![
                "study",
                "--a",
                "1/2",
                "--zeta",
                "3",
                "--n-range",
                "8:40:8",
                "--format",
                "csv",
            ],
        ),
        (
            "nodes",
            vec![
                "nodes", "--a", "1/2", "--zeta", "3", "--n", "12", "--A", "1e-9", "--ell", "0.5",
                "--seed", "7",
            ],
        ),
        (
            "asym",
            vec!["asym", "--a", "1/2", "--zeta", "3", "--n-range", "4:12:4"],
        ),
    ] {
        let mut files = Vec::new();
        for k in 0..2 {
            let path = tmp(&format!("determinism-{name}-{k}"));
            let path_s = path.to_str().unwrap().to_owned();
            let mut a = args.clone();
            a.extend(["--out", path_s.as_str()]);
            let out = quadgen(&a);
            assert!(
                out.status.code().is_some_and(|c| c == 0 || c == 3),
                "{name}"
            );
            files.push(fs::read(&path).unwrap());
        }
        assert_eq!(files[0], files[1], "{name}");
    }
}

#[test]
fn weights_round_trip_at_full_precision() {
    let em = EquilibriumMeasure::new(
        Rational64::new(1, 2),
        DiscreteMeasure::point_mass(3.0).unwrap(),
    )
    .unwrap();
    let x = phase_nodes(&PhaseFunction::new(em), 24).unwrap();
    let (direct, _) = interpolatory_rule(&x, RuleMeta::new("direct")).unwrap();

    let json = stdout(&["weights", "--a", "1/2", "--zeta", "3", "--n", "24"]);
    let rule = QuadratureRule::from_json(&json).unwrap();
    assert_eq!(rule.nodes(), direct.nodes());
    assert_eq!(rule.weights(), direct.weights());
    assert_eq!(rule.meta().a.as_deref(), Some("1/2"));

    let csv = stdout(&[
        "weights", "--a", "1/2", "--zeta", "3", "--n", "24", "--format", "csv",
    ]);
    let back = QuadratureRule::read_csv(csv.as_bytes(), 23, RuleMeta::new("csv")).unwrap();
    assert_eq!(back.nodes(), direct.nodes());
    assert_eq!(back.weights(), direct.weights());
}

#[test]
fn varying_rule_is_positive_and_sums_to_one() {
    let json = stdout(&[
        "weights", "--method", "varying", "--a", "3/4", "--zeta", "3", "--n", "8",
    ]);
    let rule = QuadratureRule::from_json(&json).unwrap();
    assert!(rule.weights().iter().all(|&w| w > 0.0));
    assert!((rule.weight_sum() - 1.0).abs() < 1e-12);
    assert!(rule.exactness_degree(Some(1e-9)) >= 11);
}

#[test]
fn masses_file_drives_the_measure() {
    let path = tmp("masses.json");
    fs::write(
        &path,
        r#"{"masses": [[2.0, 2.0], [2.0, -2.0]], "a": "1/2"}"#,
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let text = stdout(&[
        "balayage", "--masses", p, "--points", "9", "--format", "csv",
    ]);
    let tail = csv_column(&text, "balayage_tail");
    assert_eq!(tail.len(), 9);
    assert!(tail.windows(2).all(|w| w[1] < w[0]));
    let eq = csv_column(&text, "equilibrium_tail");
    assert!(eq.iter().all(|&v| v > 0.0 && v < 1.0));

    let nodes = stdout(&["nodes", "--masses", p, "--n", "10", "--format", "csv"]);
    assert!(csv_column(&nodes, "deviation")
        .iter()
        .all(|d| d.abs() < 1e-12));
    // An explicit --a overrides the file.
    let json = stdout(&["nodes", "--masses", p, "--a", "1/4", "--n", "3"]);
    assert!(json.contains("a=1/4"));
}

#[test]
fn asymptotics_report_skips_off_lattice_n() {
    let out = quadgen(&[
        "asym",
        "--a",
        "1/3",
        "--zeta",
        "3",
        "--n-range",
        "2:9:1",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["skipped"], serde_json::json!([2, 4, 5, 7, 8]));
    assert_eq!(v["records"].as_array().unwrap().len(), 3);
    // Fewer than three usable n cannot be fitted.
    let out = quadgen(&["asym", "--a", "1/3", "--zeta", "3", "--n-range", "2:6:1"]);
    assert_eq!(out.status.code(), Some(2));
}
