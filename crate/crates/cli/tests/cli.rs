use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn snrw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_snrw")).args(args).output().expect("binary runs")
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).display().to_string()
}

fn body(out: &Output) -> Value {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let (header, json) = text.split_once('\n').expect("header line");
    assert!(header.starts_with("# snrw "), "{header}");
    serde_json::from_str(json).unwrap()
}

fn check_names(v: &Value) -> Vec<(String, bool)> {
    v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (c["name"].as_str().unwrap().to_string(), c["passed"].as_bool().unwrap()))
        .collect()
}

#[test]
fn lemma_run_passes_and_echoes_config() {
    let out = snrw(&["verify-lemmas", "--alphabet", "2", "--maxlen", "2", "--nmax", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = body(&out);
    assert_eq!(v["config"]["nmax"], 3);
    assert_eq!(v["result"]["h"], "const:2");
    assert_eq!(v["result"]["reports"][0]["checked_count"], 1_032_192);
    assert!(v["passed"].as_bool().unwrap());
}

#[test]
fn theorem_two_contrapositive_check() {
    let out = snrw(&["run-reduction", "--theorem", "2", "--g", "const:3", "--horizon", "8", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let checks = check_names(&body(&out));
    assert!(checks.contains(&("contrapositive".to_string(), true)));
}

#[test]
fn usage_errors_exit_two_without_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.txt");
    let bad = dir.path().join("bad.conf");
    fs::write(&bad, "not a key value line\n").unwrap();
    let out = snrw(&["--config", bad.to_str().unwrap(), "--out", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!report.exists());
    assert_eq!(snrw(&["verify-lemmas", "--nmax", "many"]).status.code(), Some(2));
    assert_eq!(snrw(&["run-reduction", "--theorem", "1", "--h", "cubic:1"]).status.code(), Some(2));
    assert_eq!(snrw(&["verify-lemmas", "--nmax", "0"]).status.code(), Some(2));
}

#[test]
fn property_failure_exits_one_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.txt");
    let out = snrw(&[
        "check-immunity",
        "--numbering",
        &data("small.numbering"),
        "--r",
        "evens",
        "--horizon",
        "5",
        "--expect-clean",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = fs::read_to_string(&report).unwrap();
    let v: Value = serde_json::from_str(text.split_once('\n').unwrap().1).unwrap();
    let found: Vec<u64> = v["result"]["violations"]["violations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|w| w["e"].as_u64().unwrap())
        .collect();
    assert_eq!(found, vec![0, 4]);
}

#[test]
fn config_file_supplies_command_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(&conf, "command = verify-lemmas\nnmax = 2\nrandom: 30\nseed = 7\n").unwrap();
    let a = snrw(&["--config", conf.to_str().unwrap()]);
    assert_eq!(a.status.code(), Some(0));
    let v = body(&a);
    assert_eq!(v["config"]["random"], 30);
    assert_eq!(v["config"]["nmax"], 2);
    // the command line wins over the file
    let b = snrw(&["verify-lemmas", "--config", conf.to_str().unwrap(), "--nmax", "1"]);
    assert_eq!(body(&b)["config"]["nmax"], 1);
}

#[test]
fn same_seed_same_body() {
    let args = ["run-reduction", "--theorem", "io-match", "--seed", "3", "--hesc", "linear:5,2"];
    let one = String::from_utf8(snrw(&args).stdout).unwrap();
    let two = String::from_utf8(snrw(&args).stdout).unwrap();
    assert_eq!(one.split_once('\n').unwrap().1, two.split_once('\n').unwrap().1);
    let other = String::from_utf8(snrw(&["run-reduction", "--theorem", "io-match", "--seed", "4"]).stdout).unwrap();
    assert_ne!(one.split_once('\n').unwrap().1, other.split_once('\n').unwrap().1);
}

#[test]
fn eval_reads_programs_and_oracles() {
    let out = snrw(&["eval", "--program", &data("evens.urm"), "--input", "6"]);
    assert_eq!(body(&out)["result"]["outcome"]["status"]["Halted"], "1");
    let out = snrw(&["eval", "--index", "12345", "--budget", "10"]);
    assert_eq!(body(&out)["result"]["program"], "Z 0\nP 0 0 0\nO 0 3\n");
    let dir = tempfile::tempdir().unwrap();
    let prog = dir.path().join("query.urm");
    fs::write(&prog, "O 1 0  # R0 = oracle(R1)\n").unwrap();
    let out = snrw(&["eval", "--program", prog.to_str().unwrap(), "--input", "2", "--oracle", "5,6,7"]);
    assert_eq!(body(&out)["result"]["outcome"]["status"]["Halted"], "7");
    let out = snrw(&["eval", "--program", prog.to_str().unwrap(), "--input", "3", "--oracle", "5,6,7", "--budget", "50"]);
    assert_eq!(body(&out)["result"]["outcome"]["status"], "Exhausted");
}

#[test]
fn program_numbering_spec() {
    let out = snrw(&[
        "check-immunity",
        "--numbering",
        &data("segments.numbering"),
        "--h",
        "linear:1,0",
        "--horizon",
        "6",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = body(&out);
    assert_eq!(v["result"]["numbering"].as_str().unwrap().split(';').count(), 2);
    let found = v["result"]["violations"]["violations"].as_array().unwrap();
    // D_e = {0, ..., e-1} has e members against h(e) = e: never strictly more
    assert!(found.is_empty());
}

#[test]
fn pandemic_family_and_defeat() {
    let family = data("family.txt");
    let out = snrw(&[
        "check-pandemic",
        "--family",
        &family,
        "--f",
        "linear:40,0",
        "--h",
        "const:3",
        "--horizon",
        "6",
        "--min-witnesses",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(check_names(&body(&out)).len(), 2);
    let out = snrw(&[
        "check-pandemic",
        "--numbering",
        &data("segments.numbering"),
        "--h",
        "linear:1,1",
        "--horizon",
        "6",
        "--defeat",
        "--search-cap",
        "50",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = body(&out);
    assert!(v["result"]["endemic"]["witnesses"].as_array().unwrap().is_empty());
    let out = snrw(&["build-numbering", "--construction", "pandemic", "--family", &family, "--f", "linear:40,0", "--h", "const:3", "--horizon", "6"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(snrw(&["build-numbering", "--construction", "pandemic"]).status.code(), Some(2));
}

#[test]
fn forcing_report_has_transcript() {
    let out = snrw(&["simulate-forcing", "--stages", "4", "--oracle-budget", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = body(&out);
    assert_eq!(v["result"]["transcript"].as_array().unwrap().len(), 4);
    assert_eq!(v["result"]["label"], "approximation at budget 0 (window 1)");
}
