use std::path::Path;
use std::process::Command;

use couplediv::cli::{run, EXIT_BUDGET, EXIT_DATA, EXIT_OK};
use couplediv::{
    build_instance, exact_disc, min_efc, read_csv, solve_min_efc, theorem_gap, verify_lemma,
    Allocation, Instance, SearchConfig, SetFamily,
};

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn cli(args: &[&str], stdin: &str) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("couplediv").chain(args.iter().copied());
    let code = run(argv, &mut stdin.as_bytes(), &mut out, &mut err);
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn json_line<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).unwrap() + "\n"
}

#[test]
fn verify_matches_library_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let fam = write(dir.path(), "fam.json", r#"{"m": 2, "sets": [[0], [1]]}"#);
    let alloc = write(dir.path(), "alloc.json", r#"{"owner": [0, 1]}"#);
    let o = cli(&["verify", &fam, "--alloc", &alloc], "");
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);

    let family = SetFamily::new(2, &[vec![0], vec![1]]).unwrap();
    let cert = verify_lemma(&family, &Allocation::new(2, vec![0, 1]).unwrap()).unwrap();
    assert_eq!(o.stdout, json_line(&cert));
    assert_eq!(cert.c_star, 1);
}

#[test]
fn disc_of_singleton_with_two_colors() {
    let o = cli(&["disc", "-", "--k", "2"], r#"{"m": 1, "sets": [[0]]}"#);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["value"]["value"], "1/2");
    assert_eq!(v["method"], "exact");
    assert!(o.stderr.contains("nodes:"));
}

#[test]
fn build_and_envy_match_library() {
    let dir = tempfile::tempdir().unwrap();
    let fam_text = r#"{"m": 4, "sets": [[0, 1], [0, 2]]}"#;
    let fam = write(dir.path(), "fam.json", fam_text);
    let o = cli(&["build", &fam], "");
    assert_eq!(o.code, EXIT_OK);
    let family: SetFamily = serde_json::from_str(fam_text).unwrap();
    let inst = build_instance(&family);
    assert_eq!(o.stdout, json_line(&inst));
    let round: Instance = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(round, inst);

    let inst_path = write(dir.path(), "inst.json", &o.stdout);
    let alloc = write(dir.path(), "alloc.json", r#"{"owner": [0, 0, 1, 1]}"#);
    let o = cli(&["envy", &inst_path, "--alloc", &alloc], "");
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let report = min_efc(&inst, &Allocation::new(2, vec![0, 0, 1, 1]).unwrap()).unwrap();
    assert_eq!(o.stdout, json_line(&report));
    assert_eq!(report.c_star, 2);
}

#[test]
fn solve_and_gap_match_library() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"m": 3, "sets": [[0, 1], [1, 2], [0, 2]]}"#;
    let fam_path = write(dir.path(), "fam.json", text);
    let family: SetFamily = serde_json::from_str(text).unwrap();

    let o = cli(&["gap", &fam_path], "");
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert_eq!(
        o.stdout,
        json_line(&theorem_gap(&family, SearchConfig::default()).unwrap())
    );

    let inst_path = write(
        dir.path(),
        "inst.json",
        &json_line(&build_instance(&family)),
    );
    let o = cli(&["solve", &inst_path], "");
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let lib = solve_min_efc(&build_instance(&family), SearchConfig::default()).unwrap();
    assert_eq!(o.stdout, json_line(&lib));

    // parallel search reports the same optimum
    let o = cli(&["solve", &inst_path, "--threads", "4"], "");
    let par: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(par["best_c"], lib.best_c);
}

#[test]
fn exact_disc_output_matches_library() {
    let text = r#"{"m": 3, "sets": [[0, 1], [0, 2], [1, 2]]}"#;
    let o = cli(&["disc", "-", "--k", "2"], text);
    assert_eq!(o.code, EXIT_OK);
    let family: SetFamily = serde_json::from_str(text).unwrap();
    let sol = exact_disc(&family, 2, SearchConfig::default().budget).unwrap();
    let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["value"], serde_json::to_value(sol.value).unwrap());
    assert_eq!(v["value"]["value"], 1);
}

#[test]
fn envy_with_mismatched_items_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(
        dir.path(),
        "inst.json",
        r#"{"m": 2, "couples": [{"agent1": [1, 0], "agent2": [0, 1]}, {"agent1": [0, 1], "agent2": [1, 0]}]}"#,
    );
    let alloc = write(dir.path(), "alloc.json", r#"{"owner": [0, 1, 1]}"#);
    let o = cli(&["envy", &inst, "--alloc", &alloc], "");
    assert_eq!(o.code, EXIT_DATA);
    assert!(o.stdout.is_empty());
    assert!(o.stderr.contains("m = 2"), "{}", o.stderr);
}

#[test]
fn validate_reports_violations() {
    let o = cli(&["validate", "-", "--n", "2"], r#"{"owner": [0, 2]}"#);
    assert_eq!(o.code, EXIT_DATA);
    let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["kind"], "allocation");
    assert_eq!(v["ok"], false);
    assert!(v["violation"]
        .as_str()
        .unwrap()
        .contains("owner index out of range"));

    let o = cli(
        &["validate", "-"],
        r#"{"m": 2, "couples": [{"agent1": [1, 2], "agent2": [0, 1]}], "binary": true}"#,
    );
    assert_eq!(o.code, EXIT_DATA);

    let o = cli(&["validate", "-"], r#"{"m": 2, "sets": [[0], [1]]}"#);
    assert_eq!(o.code, EXIT_OK);
    assert_eq!(o.stdout, "{\"kind\":\"family\",\"ok\":true}\n");

    let o = cli(&["validate", "-"], r#"{"m": 2, "sets": [[0, 5]]}"#);
    assert_eq!(o.code, EXIT_DATA);

    let o = cli(&["validate", "-"], "not json");
    assert_eq!(o.code, EXIT_DATA);
}

#[test]
fn bad_arguments_exit_with_data_error() {
    let o = cli(&["disc", "-", "--frobnicate"], "");
    assert_eq!(o.code, EXIT_DATA);
    assert!(!o.stderr.is_empty());
    assert_eq!(
        cli(&["sweep", "--n", "3-1", "--m", "1-2"], "").code,
        EXIT_DATA
    );
    assert_eq!(
        cli(&["verify", "/nonexistent/fam.json", "--alloc", "x"], "").code,
        EXIT_DATA
    );
    assert_eq!(cli(&["--help"], "").code, EXIT_OK);
}

#[test]
fn exhausted_budget_exits_with_budget_code() {
    let o = cli(
        &["disc", "-", "--k", "2", "--budget", "1"],
        r#"{"m": 2, "sets": [[0, 1]]}"#,
    );
    assert_eq!(o.code, EXIT_BUDGET, "{}", o.stderr);
    let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["exhaustive"], false);
}

#[test]
fn sweep_writes_csv_and_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let jsonl = dir.path().join("out.jsonl");
    let o = cli(
        &[
            "sweep",
            "--n",
            "1-2",
            "--m",
            "1-3",
            "--out",
            csv.to_str().unwrap(),
            "--jsonl",
            jsonl.to_str().unwrap(),
        ],
        "",
    );
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let records = read_csv(std::fs::File::open(&csv).unwrap()).unwrap();
    assert_eq!(records.len(), 6);
    assert!(records.iter().all(|r| r.exhaustive));
    assert_eq!(std::fs::read_to_string(&jsonl).unwrap().lines().count(), 6);
}

#[test]
fn binary_reads_stdin_and_sets_exit_status() {
    use std::io::Write;
    use std::process::Stdio;
    let mut child = Command::new(env!("CARGO_BIN_EXE_couplediv"))
        .args(["disc", "-", "--k", "2"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(br#"{"m": 1, "sets": [[0]]}"#)
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"1/2\""));

    let out = Command::new(env!("CARGO_BIN_EXE_couplediv"))
        .arg("--bogus")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_DATA));
}
