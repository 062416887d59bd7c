use std::path::Path;
use std::process::{Command, Output};

use rlpe::report::Report;

const CSV_HEADER: &str = "domain,strategy,seed,wall_time,nodes_expanded,solver_steps,satisfaction_ratio";

fn rlpe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rlpe")).args(args).env("RLPE_WORKERS", "1").output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn taxi_fuel_explanation_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = rlpe(&["explain", "--builtin", "taxi-fuel", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let r = Report::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(r.satisfied);
    assert_eq!(r.sequence.len(), 1);
    assert_eq!(r.sequence[0].params["action"], "move");
    assert_eq!(r.sequence[0].params["literal"], "fuel>0");
    assert!(String::from_utf8(o.stdout).unwrap().contains("action move no longer requires fuel>0"));
}

#[test]
fn malformed_policy_exits_1_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let o = rlpe(&["export", "--builtin", "twocell", "--out-dir", path(dir.path())]);
    assert!(o.status.success());
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"entries\": [\n    {\"state\": }\n  ]\n}\n").unwrap();
    let d = dir.path().join("twocell.domain.json");
    let c = dir.path().join("twocell.catalog.json");
    let o = rlpe(&["explain", "--domain", path(&d), "--policy", path(&bad), "--catalog", path(&c)]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn zero_timeout_exits_2_with_root_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = rlpe(&["explain", "--builtin", "taxi-fuel", "--timeout", "0", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let r = Report::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(r.sequence.is_empty());
    assert_eq!(r.stats.nodes_expanded, 1);
    assert!(r.ratio < 1.0);
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(rlpe(&["explain", "--builtin", "chess"]).status.code(), Some(1));
    assert_eq!(rlpe(&["explain", "--builtin", "taxi-fuel", "--depth", "0"]).status.code(), Some(1));
    assert_eq!(rlpe(&["explain"]).status.code(), Some(1));
    assert_eq!(rlpe(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_file_runs_exported_fixture() {
    let dir = tempfile::tempdir().unwrap();
    assert!(rlpe(&["export", "--builtin", "frozen-lake", "--out-dir", path(dir.path())]).status.success());
    let cfg = dir.path().join("frozen-lake.run.json");
    let text = dir.path().join("r.txt");
    let o = rlpe(&["explain", "--config", path(&cfg), "--format", "text", "--out", path(&text)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read(&text).unwrap(), o.stdout);
}

#[test]
fn csv_schema_is_stable_across_strategies() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("suite.csv");
    assert!(rlpe(&["suite", "--seeds", "1", "--csv", path(&suite)]).status.success());
    let text = std::fs::read_to_string(&suite).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().all(|r| r.split(',').count() == 7));
    for s in ["base", "pretrain", "precluster"] {
        let one = dir.path().join(format!("{s}.csv"));
        rlpe(&["explain", "--builtin", "two-agent", "--strategy", s, "--csv", path(&one)]);
        let text = std::fs::read_to_string(&one).unwrap();
        assert_eq!(text.lines().next(), Some(CSV_HEADER), "{s}");
        assert!(text.lines().nth(1).unwrap().starts_with(&format!("two-agent,{s},0,")));
    }
}

#[test]
fn checked_in_fixtures_match_export() {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let dir = tempfile::tempdir().unwrap();
    for name in ["twocell", "taxi-fuel"] {
        assert!(rlpe(&["export", "--builtin", name, "--out-dir", path(dir.path())]).status.success());
        for kind in ["domain", "policy", "catalog", "run"] {
            let file = format!("{name}.{kind}.json");
            assert_eq!(
                std::fs::read(dir.path().join(&file)).unwrap(),
                std::fs::read(fixtures.join(&file)).unwrap(),
                "{file}"
            );
        }
    }
}
