use std::process::{Command, Output};

fn holomux(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holomux"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    let line = text.lines().next().expect("one error line");
    serde_json::from_str(line).unwrap()
}

#[test]
fn point_emits_a_versioned_json_document() {
    let out = holomux(&["point", "--d-over-l", "2", "--theta-deg", "30"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["command"], "point");
    for key in ["psi2", "psi3bar", "psi4", "psi5bar", "psi6", "n_plus"] {
        assert!(doc.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn csv_output_starts_with_the_banner() {
    let out = holomux(&["map", "--y-grid", "-1:1:3", "--z-grid", "0:1:2", "--tpol", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# holomux"));
    assert_eq!(lines.next().unwrap(), "y_over_l,z_over_l,n_plus");
    assert_eq!(lines.count(), 6);
}

#[test]
fn domain_errors_exit_with_two() {
    let out = holomux(&["point", "--d-over-l", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let err = stderr_json(&out);
    assert_eq!(err["schema_version"], 1);
    assert_eq!(err["error"], "domain");
}

#[test]
fn invalid_arguments_exit_with_two() {
    let out = holomux(&["point", "--tpol", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "invalid-arguments");

    let out = holomux(&["map", "--y-grid", "1:0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_flag_writes_the_same_bytes_as_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curves.csv");
    let args = ["curves", "--theta-deg", "0:30:2", "--d-over-l", "0.5:50:7"];
    let direct = holomux(&args);
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    let to_file = holomux(&with_out);
    assert!(direct.status.success() && to_file.status.success());
    assert!(to_file.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), direct.stdout);
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("out.csv");
    let out = holomux(&["psis", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "io");
}

#[test]
fn worker_count_does_not_change_the_output() {
    let base = ["psis", "--samples", "40", "--seed", "9"];
    let runs: Vec<Vec<u8>> = ["1", "3", "8"]
        .iter()
        .map(|t| {
            let mut args = vec!["--threads", t];
            args.extend(base);
            let out = holomux(&args);
            assert!(out.status.success());
            out.stdout
        })
        .collect();
    assert!(runs.windows(2).all(|w| w[0] == w[1]));
}
