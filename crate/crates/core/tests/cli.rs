use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bernstein"))
        .args(args)
        .output()
        .expect("failed to run the bernstein binary")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|c| c.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn kappa_prints_value_and_bracket() {
    let out = run(&["kappa"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("0.4439938"), "{text}");
    assert!(text.contains("PASS"), "{text}");
}

#[test]
fn smooth_zero_weight_dominates_exponential() {
    let dir = tempfile::tempdir().unwrap();
    let w = write(
        dir.path(),
        "w.json",
        r#"{"kind":"builtin","name":"zero","bound":1}"#,
    );
    let out = run(&[
        "smooth",
        "--weight",
        &w,
        "--eps",
        "0.5",
        "--grid",
        "-10:10:201",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (header, rows) = csv_rows(&String::from_utf8(out.stdout).unwrap());
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let (x, big_w) = (col("x"), col("W"));
    assert_eq!(rows.len(), 201);
    for r in rows {
        assert!(r[big_w] >= (-0.5 * r[x].abs()).exp(), "{r:?}");
    }
}

#[test]
fn verify_passes_for_gaussian() {
    let dir = tempfile::tempdir().unwrap();
    let w = write(
        dir.path(),
        "w.json",
        r#"{"kind":"builtin","name":"gauss","bound":1}"#,
    );
    let out = run(&[
        "verify", "--weight", &w, "--eps", "0.5", "--grid", "-4:4:41",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["pass"], true);
}

#[test]
fn bad_input_and_precondition_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let w = write(
        dir.path(),
        "w.json",
        r#"{"kind":"builtin","name":"gauss","bound":1}"#,
    );
    assert_eq!(
        run(&[
            "smooth",
            "--weight",
            "/nonexistent.json",
            "--eps",
            "0.5",
            "--grid",
            "0:1:2"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(
        run(&["smooth", "--weight", &w, "--eps", "1.5", "--grid", "0:1:2"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn perturbation_run_reports_pass() {
    let dir = tempfile::tempdir().unwrap();
    let z = write(dir.path(), "z.json", r#"{"family":"n_squared","n_max":10}"#);
    let out = run(&[
        "perturb",
        "--zeros",
        &z,
        "--delta",
        "0.5",
        "--random",
        "3",
        "--maximal",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["pass"], true);
}

#[test]
fn inadmissible_shift_exits_with_precondition_code() {
    let dir = tempfile::tempdir().unwrap();
    let z = write(dir.path(), "z.json", r#"{"zeros":[-1,1]}"#);
    let s = write(dir.path(), "s.json", "[0.5, 0.0]");
    let out = run(&["perturb", "--zeros", &z, "--delta", "0.5", "--shifts", &s]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn criterion_two_point_sums() {
    let dir = tempfile::tempdir().unwrap();
    let w = write(
        dir.path(),
        "w.json",
        r#"{"kind":"discrete","points":[[-1,0.5],[1,0.5]],"bound":1}"#,
    );
    let z = write(dir.path(), "z.json", r#"{"zeros":[-1,1]}"#);
    let summary = dir.path().join("summary.json");
    let summary_s = summary.to_string_lossy().into_owned();
    let out = run(&[
        "criterion",
        "--weight",
        &w,
        "--zeros",
        &z,
        "--k",
        "1",
        "--json",
        &summary_s,
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&summary).unwrap()).unwrap();
    assert_eq!(json["report"]["sum"], 1.0, "{json}");
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .starts_with("# schema=1"));
}

#[test]
fn failed_verification_exits_with_code_four() {
    let dir = tempfile::tempdir().unwrap();
    let w = write(
        dir.path(),
        "w.json",
        r#"{"kind":"builtin","name":"gauss","bound":1}"#,
    );
    // A coarse difference step breaks the agreement check, nothing else.
    let out = run(&[
        "verify", "--weight", &w, "--eps", "0.5", "--grid", "-4:4:41", "--h", "0.5",
    ]);
    assert_eq!(out.status.code(), Some(4));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["pass"], false);
    assert_eq!(json["report"]["lower"]["pass"], true, "{json}");
    assert_eq!(json["report"]["derivative_agreement"]["pass"], false);
}
