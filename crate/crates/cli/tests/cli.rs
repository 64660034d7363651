use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cks-verify"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn legendre_table_matches_closed_form() {
    let o = run(&["transform", "--fn", "exp", "--legendre", "--t", "1..5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,log_ell,r_star"));
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        let t = cols[0];
        assert!((cols[1] - t * (1.0 - t.ln())).abs() < 1e-8 * t.max(1.0), "{line}");
        assert!((cols[2] - t).abs() < 1e-6 * t, "{line}");
    }
}

#[test]
fn dual_transform_as_json() {
    let o = run(&["transform", "--fn", "beta_exp:0.5", "--dual", "--r", "1,4", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<serde_json::Value> = serde_json::from_str(&stdout(&o)).unwrap();
    for row in rows {
        let r = row["r"].as_f64().unwrap();
        let want = 0.5 * r * r;
        assert!((row["log_value"].as_f64().unwrap() - want).abs() < 1e-5 * want);
    }
}

#[test]
fn l_series_columns() {
    let o = run(&["transform", "--fn", "exp", "--lsharp", "--r", "0..2/3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("r,log_value,log_tail_bound\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["transform", "--fn", "exp", "--legendre"]).status.code(), Some(2));
    assert_eq!(run(&["transform", "--fn", "nonsense", "--legendre", "--t", "1"]).status.code(), Some(2));
    assert_eq!(run(&["transform", "--fn", "exp", "--legendre", "--t", "3..1"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "no-such-suite"]).status.code(), Some(2));
    assert_eq!(run(&["verify"]).status.code(), Some(2));
    assert_eq!(run(&["check", "--fn", "exp", "--cond", "Z9"]).status.code(), Some(2));
    // clap rejects unknown flags with its own usage code.
    assert_eq!(run(&["verify", "--bogus"]).status.code(), Some(2));
}

#[test]
fn check_exit_codes_follow_verdict() {
    let pass = run(&["check", "--fn", "exp", "--cond", "U2"]);
    assert_eq!(pass.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&pass)).unwrap();
    assert_eq!(v["verdict"], "PassOnGrid");

    let fail = run(&["check", "--fn", "exp_2", "--cond", "U2"]);
    assert_eq!(fail.status.code(), Some(1));

    assert_eq!(run(&["check", "--seq", "bell:2", "--cond", "B2", "--n", "30"]).status.code(), Some(0));
    // A growth condition on a derived sequence applies to its growth function.
    assert_eq!(run(&["check", "--seq", "from-growth:exp_2", "--cond", "U2"]).status.code(), Some(1));
}

#[test]
fn verify_writes_reports_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "legendre-exp-closed-form", "--suite", "stirling-sandwich", "--seed", "3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(&dir.path().join("legendre-exp-closed-form.json"));
    assert_eq!(report["seed"], 3);
    assert_eq!(report["violations"], 0);
    assert!(report["timestamp"].as_str().unwrap().starts_with("unix:"));
    let summary = read_json(&dir.path().join("summary.json"));
    assert_eq!(summary["passed"], true);
    assert_eq!(summary["suites"].as_array().unwrap().len(), 2);
}

#[test]
fn violations_exit_1_and_csv_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "verify",
        "legendre-exp-closed-form",
        "--tolerance",
        "-1",
        "--format",
        "csv",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let csv = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert!(csv.starts_with("suite,passed,trials,violations,worst_margin,tolerance\n"));
    assert!(csv.contains("legendre-exp-closed-form,false,30,30,"));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[suites]\nkeys = [\"legendre-exp-closed-form\"]\nseed = 11\ntrials = 5\n").unwrap();
    let out = dir.path().join("out");
    let o = run(&["verify", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let report = read_json(&out.join("legendre-exp-closed-form.json"));
    assert_eq!(report["seed"], 11);
    assert_eq!(report["trials"], 5);

    let o = run(&["verify", "--config", cfg.to_str().unwrap(), "--seed", "12", "--trials", "7", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let report = read_json(&out.join("legendre-exp-closed-form.json"));
    assert_eq!(report["seed"], 12);
    assert_eq!(report["trials"], 7);
}

#[test]
fn config_function_feeds_transform() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fn.toml");
    std::fs::write(&cfg, "[function]\nkind = \"beta_exp\"\nbeta = 0.5\ndual = true\n").unwrap();
    let via_cfg = run(&["transform", "--config", cfg.to_str().unwrap(), "--legendre", "--t", "2"]);
    let via_flag = run(&["transform", "--fn", "dual:beta_exp:0.5", "--legendre", "--t", "2"]);
    assert_eq!(via_cfg.status.code(), Some(0));
    assert_eq!(stdout(&via_cfg), stdout(&via_flag));
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[suites]\nseeds = 4\n").unwrap();
    assert_eq!(run(&["verify", "all", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["verify", "all", "--config", "/nonexistent/cfg.toml"]).status.code(), Some(2));
}

#[test]
fn sequence_export_and_list() {
    let o = run(&["sequence", "--seq", "bell:1", "--n", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let bell: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap().exp().round()).collect();
    assert_eq!(bell, vec![1.0, 1.0, 2.0, 5.0, 15.0, 52.0, 203.0]);

    let o = run(&["list"]);
    assert_eq!(stdout(&o).lines().count(), 39);
}
