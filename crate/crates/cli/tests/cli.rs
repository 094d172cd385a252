use std::path::Path;
use std::process::{Command, Output};

use quasiherm::linalg::ComplexMatrix;
use quasiherm::report::{write_matrix, Verdict, VerificationReport};
use serde_json::Value;

fn quasiherm() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_quasiherm"));
    cmd.env_remove("QUASIHERM_TOLERANCES");
    cmd
}

fn run(cmd: &mut Command) -> (i32, Output) {
    let out = cmd.output().unwrap();
    (out.status.code().unwrap_or(-1), out)
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn matrix_entries(v: &Value) -> Vec<[f64; 2]> {
    serde_json::from_value(v["entries"].clone()).unwrap()
}

fn write_input(dir: &Path, m: &ComplexMatrix) -> std::path::PathBuf {
    let p = dir.join("input.json");
    write_matrix(&p, m).unwrap();
    p
}

#[test]
fn identity_input_passes() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_input(dir.path(), &ComplexMatrix::identity(2));
    let (code, out) = run(quasiherm().args(["analyze", "--samples", "1"]).arg(&input));
    assert_eq!(code, 0);
    let report = stdout_json(&out);
    assert_eq!(report["verdict"], "pass");
    let eta = matrix_entries(&report["eta"]);
    let expected = [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]];
    for (a, b) in eta.iter().zip(expected) {
        assert!((a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14);
    }
}

#[test]
fn two_level_model_report() {
    let (code, out) = run(quasiherm().args([
        "analyze",
        "--model",
        "two_level",
        "--param",
        "b=1",
        "--param",
        "c=4",
        "--samples",
        "5",
        "--seed",
        "7",
    ]));
    assert_eq!(code, 0);
    let report = stdout_json(&out);
    assert_eq!(report["verdict"], "pass");
    let eta = matrix_entries(&report["eta"]);
    let expected = [1.6, 0.0, 0.0, 0.4];
    for (a, b) in eta.iter().zip(expected) {
        assert!((a[0] - b).abs() < 1e-12 && a[1].abs() < 1e-12, "{eta:?}");
    }
    let family = &report["family"];
    assert_eq!(family["count"], 5);
    assert_eq!(family["seeds"], serde_json::json!([7, 8, 9, 10, 11]));
    for member in family["members"].as_array().unwrap() {
        for key in [
            "ph",
            "sim",
            "sym",
            "eta-prime",
            "A-ph",
            "A=US",
            "B-ph",
            "eta=BB",
            "eta-form",
            "eta-prime-3",
        ] {
            assert!(member["residuals"][key].as_f64().unwrap() <= 1e-8, "{key}");
        }
    }
    for key in ["ph", "H=H"] {
        assert!(report["identities"][key].as_f64().unwrap() <= 1e-8);
    }
}

#[test]
fn complex_spectrum_exits_one_and_names_the_pair() {
    let dir = tempfile::tempdir().unwrap();
    let rot = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [-1.0, 0.0]]).unwrap();
    let input = write_input(dir.path(), &rot);
    let (code, out) = run(quasiherm().arg("analyze").arg(&input));
    assert_eq!(code, 1);
    let report = stdout_json(&out);
    assert_eq!(report["verdict"], "error");
    assert_eq!(report["error"]["kind"], "ComplexSpectrum");
    let pair: Vec<[f64; 2]> =
        serde_json::from_value(report["error"]["eigenvalues"].clone()).unwrap();
    assert_eq!(pair.len(), 2);
    assert!((pair[0][1] + pair[1][1]).abs() < 1e-12 && (pair[0][1].abs() - 1.0).abs() < 1e-12);
}

#[test]
fn reports_are_deterministic_apart_from_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let (code, _) = run(quasiherm()
            .args([
                "analyze",
                "--model",
                "random",
                "--dim",
                "5",
                "--param",
                "seed=3",
                "--samples",
                "4",
                "--seed",
                "11",
                "--out",
            ])
            .arg(path));
        assert_eq!(code, 0);
    }
    let strip = |p: &Path| {
        let mut v: Value = serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("generated_at");
        serde_json::to_string(&v).unwrap()
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn report_round_trip_preserves_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let (code, _) = run(quasiherm()
        .args([
            "analyze",
            "--model",
            "swanson",
            "--dim",
            "8",
            "--param",
            "omega=2",
            "--param",
            "alpha=0.3",
            "--param",
            "beta=0.5",
            "--samples",
            "3",
            "--out",
        ])
        .arg(&path));
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&path).unwrap();
    let report = VerificationReport::read(&path).unwrap();
    assert_eq!(report.verdict, Verdict::Pass);
    assert_eq!(report.to_json().unwrap(), text);
    let raw: Value = serde_json::from_str(&text).unwrap();
    for (member, parsed) in raw["family"]["members"]
        .as_array()
        .unwrap()
        .iter()
        .zip(&report.family.as_ref().unwrap().members)
    {
        for (key, value) in member["residuals"].as_object().unwrap() {
            assert_eq!(
                value.as_f64().unwrap().to_bits(),
                parsed.residuals[key].to_bits()
            );
        }
    }
}

#[test]
fn tolerance_precedence() {
    let args = [
        "spectrum",
        "--model",
        "two_level",
        "--param",
        "b=2",
        "--param",
        "c=3",
    ];
    let (_, out) = run(quasiherm().args(args));
    assert_eq!(stdout_json(&out)["tolerances"]["residual_tol"], 1e-8);

    let (_, out) = run(quasiherm().args(args).env(
        "QUASIHERM_TOLERANCES",
        "residual_tol=1e-9,condition_cap=1e6",
    ));
    let report = stdout_json(&out);
    assert_eq!(report["tolerances"]["residual_tol"], 1e-9);
    assert_eq!(report["tolerances"]["condition_cap"], 1e6);

    let (_, out) = run(quasiherm()
        .args(args)
        .args(["--tol", "1e-7"])
        .env("QUASIHERM_TOLERANCES", "residual_tol=1e-9"));
    assert_eq!(stdout_json(&out)["tolerances"]["residual_tol"], 1e-7);

    let (code, _) = run(quasiherm()
        .args(args)
        .env("QUASIHERM_TOLERANCES", "residual_tol=-1"));
    assert_eq!(code, 1);
}

#[test]
fn spectrum_and_family_subcommands() {
    let (code, out) = run(quasiherm().args([
        "spectrum", "--model", "swanson", "--dim", "10", "--param", "omega=1",
    ]));
    assert_eq!(code, 0);
    let report = stdout_json(&out);
    assert_eq!(report["mode"], "spectrum");
    assert!(report.get("family").is_none());
    assert_eq!(
        report["certified_eigenvalues"].as_array().unwrap().len(),
        10
    );

    let (code, out) = run(quasiherm().args([
        "family",
        "--model",
        "random",
        "--dim",
        "4",
        "--samples",
        "2",
    ]));
    assert_eq!(code, 0);
    let report = stdout_json(&out);
    assert_eq!(report["mode"], "family");
    assert!(report.get("eta").is_none());
    assert_eq!(report["family"]["count"], 2);
}

#[test]
fn input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"dim": 2, "entries": [[1, 0]]}"#).unwrap();
    let (code, out) = run(quasiherm().arg("analyze").arg(&bad));
    assert_eq!(code, 1);
    assert_eq!(stdout_json(&out)["error"]["kind"], "ParseError");

    let (code, _) = run(quasiherm()
        .arg("analyze")
        .arg(dir.path().join("missing.json")));
    assert_eq!(code, 1);
    let (code, _) = run(quasiherm().arg("analyze"));
    assert_eq!(code, 1);
    let (code, _) = run(quasiherm().args(["analyze", "--bogus"]));
    assert_eq!(code, 1);
    let (code, _) = run(quasiherm().args(["analyze", "--model", "two_level", "--param", "c=-1"]));
    assert_eq!(code, 1);
    let (code, out) = run(quasiherm().args([
        "analyze",
        "--model",
        "random",
        "--dim",
        "6",
        "--max-dim",
        "5",
    ]));
    assert_eq!(code, 1);
    assert_eq!(stdout_json(&out)["error"]["kind"], "TooLarge");
}
