use std::path::Path;
use std::process::Command;

use delegation_lab::report::{Field, Report, CSV_HEADER};
use delegation_lab::schema::instance_to_json;
use delegation_lab::{builtin, rational::rat};
use tempfile::TempDir;

fn lab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_delegation-lab"))
        .args(args)
        .env_remove("DELEGATION_LAB_CAPS")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = lab(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json_report(args: &[&str]) -> Report {
    let mut full = args.to_vec();
    full.extend(["--output", "json"]);
    Report::from_json(&stdout(&full)).unwrap()
}

fn detail(report: &Report, key: &str) -> String {
    let entry = report.details.iter().find(|e| e.key == key).unwrap_or_else(|| panic!("no {key}"));
    match &entry.value {
        Field::Number(n) => n.exact.clone(),
        Field::Text(t) => t.clone(),
    }
}

fn alpha(report: &Report, label: &str) -> String {
    let row = report.rows.iter().find(|r| r.label == label).unwrap();
    row.alpha.as_ref().unwrap().exact.clone()
}

#[test]
fn gap_on_the_second_table() {
    let r = json_report(&["gap", "--builtin", "table2", "--epsilon", "1/2", "--tie-break", "principal-favoring"]);
    assert_eq!(alpha(&r, ""), "2/3");
    let text = stdout(&["gap", "--builtin", "table2", "--epsilon", "1/2", "--tie-break", "principal-favoring"]);
    assert!(text.contains("alpha 2/3 (≈ 0.666667)"), "{text}");
}

#[test]
fn lottery_gain_on_the_first_table() {
    let r = json_report(&["reproduce", "prop-lottery-positive", "--epsilon", "1/4"]);
    assert_eq!(alpha(&r, "deterministic"), "4/7");
    assert_eq!(alpha(&r, "lottery"), "11/14");
}

#[test]
fn no_lottery_gain_on_the_second_table() {
    let r = json_report(&["reproduce", "prop-lottery-negative", "--epsilon", "1/2", "--grid", "1/10"]);
    assert_eq!(r.tie_break, "principal-favoring");
    assert_eq!(alpha(&r, "deterministic"), "2/3");
    assert_eq!(alpha(&r, "lottery"), "2/3");
}

#[test]
fn prophet_check_on_coins() {
    let r = json_report(&["prophet-check", "--builtin", "coins2"]);
    assert_eq!(detail(&r, "ratio"), "1/1");
    assert_eq!(detail(&r, "gambler_value"), "3/4");
}

#[test]
fn half_suite_reports_no_violations() {
    let r = json_report(&["reproduce", "cor-half", "--count", "30", "--seed", "5"]);
    assert_eq!(detail(&r, "violations"), "0");
    assert_eq!(r.instance, "random seed 5");
}

#[test]
fn reports_are_deterministic() {
    let runs: &[&[&str]] = &[
        &["gap", "--builtin", "table1", "--epsilon", "1/3"],
        &["build-policy", "from-greedy", "--builtin", "coins2"],
        &["prophet-check", "--builtin", "table2", "--epsilon", "1/4", "--search"],
        &["adaptivity", "--builtin", "table1", "--epsilon", "1/10"],
        &["reproduce", "cor-half", "--count", "20"],
    ];
    for args in runs {
        for format in ["text", "json"] {
            let mut full = args.to_vec();
            full.extend(["--output", format]);
            assert_eq!(stdout(&full), stdout(&full), "{full:?}");
        }
        let mut csv = args.to_vec();
        csv.extend(["--output", "csv"]);
        let strip = |s: String| s.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect::<Vec<_>>();
        let first = stdout(&csv);
        assert!(first.starts_with(CSV_HEADER));
        assert_eq!(strip(first), strip(stdout(&csv)));
    }
}

#[test]
fn json_reports_round_trip() {
    let text = stdout(&["reproduce", "prop-lottery-positive", "--output", "json"]);
    let report = Report::from_json(&text).unwrap();
    assert_eq!(report.to_json().unwrap(), text);
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn instance_files_match_the_builtins() {
    let dir = TempDir::new().unwrap();
    let inst = builtin::table1(&rat(1, 4)).unwrap();
    let path = write(&dir, "t1.json", &instance_to_json(&inst).unwrap());
    let from_file = json_report(&["gap", "--instance", &path]);
    let builtin = json_report(&["gap", "--builtin", "table1", "--epsilon", "1/4"]);
    assert_eq!(from_file.rows, builtin.rows);
}

#[test]
fn saved_policies_evaluate_identically() {
    let dir = TempDir::new().unwrap();
    let saved = dir.path().join("policy.json");
    let saved = saved.to_str().unwrap();
    let built = json_report(&["build-policy", "composed", "--builtin", "table1", "--epsilon", "1/4", "--save", saved]);
    assert!(Path::new(saved).exists());
    let evaluated = json_report(&["eval-policy", "--policy", saved, "--builtin", "table1", "--epsilon", "1/4"]);
    assert_eq!(built.rows[0].value, evaluated.rows[0].value);
    assert_eq!(built.rows[0].alpha, evaluated.rows[0].alpha);
}

#[test]
fn menu_files() {
    let dir = TempDir::new().unwrap();
    let menu = r#"{"lotteries": [
        {"atoms": [{"set": [{"element": "1", "x": [4, 1], "y": [3, 4]}], "p": [1, 1]}]},
        {"atoms": [
            {"set": [{"element": "2", "x": [1, 1], "y": [1, 1]}], "p": [1, 2]},
            {"set": [{"element": "1", "x": [0, 1], "y": [0, 1]}], "p": [1, 2]}
        ]}
    ]}"#;
    let path = write(&dir, "menu.json", menu);
    let r = json_report(&["eval-policy", "--menu", &path, "--builtin", "table1", "--epsilon", "1/4"]);
    assert_eq!(r.rows.len(), 1);
    // high element 1 (w.p. 1/4): the sure lottery pays 4. Otherwise the coin
    // flip pays 1 half the time.
    assert_eq!(r.rows[0].value.as_ref().unwrap().exact, "11/8");

    let broken = write(&dir, "broken.json", r#"{"lotteries": [{"atoms": []}]}"#);
    assert_eq!(lab(&["eval-policy", "--menu", &broken, "--builtin", "table1", "--epsilon", "1/4"]).status.code(), Some(2));
}

#[test]
fn exit_codes() {
    assert_eq!(lab(&["gap", "--builtin", "table1", "--epsilon", "3/2"]).status.code(), Some(2));
    assert_eq!(lab(&["gap", "--instance", "/nonexistent/file.json"]).status.code(), Some(2));
    assert_eq!(lab(&["eval-policy", "--builtin", "coins2"]).status.code(), Some(2));
    let capped = Command::new(env!("CARGO_BIN_EXE_delegation-lab"))
        .args(["gap", "--builtin", "coins2"])
        .env("DELEGATION_LAB_CAPS", "policy_candidates=1")
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(3));
    assert_eq!(lab(&["gap", "--builtin", "coins2", "--caps", "dp_states=2"]).status.code(), Some(3));
}
