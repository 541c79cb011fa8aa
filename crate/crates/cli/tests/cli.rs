use std::process::{Command, Output};

fn hcgame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hcgame"))
        .args(args)
        .env_remove("HCGAME_JOBS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn values_rows_and_exit_codes() {
    let o = hcgame(&["values", "--m-range", "2..3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "m,omega_c,omega_c_exact,omega_q,theta_star,omega_ns,advantage");
    assert!(lines[1].starts_with("2,0.75,3/4,0.853553390593,0.785398163397,1,"));
    assert!(lines[2].starts_with("3,0.625,5/8,0.728553390593,"));

    assert_eq!(hcgame(&["values", "--m-range", "1..3"]).status.code(), Some(2));
    assert_eq!(hcgame(&["values", "--m-range", "2..65"]).status.code(), Some(2));
    assert_eq!(hcgame(&["values", "--format", "xml"]).status.code(), Some(2));
    assert_eq!(hcgame(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn values_json() {
    let o = hcgame(&["values", "--m", "2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["m"], 2);
    assert_eq!(v[0]["omega_c_exact"], "3/4");
    assert_eq!(v[0]["omega_ns"], 1.0);
}

#[test]
fn figure_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig.csv");
    let o = hcgame(&["figure3", "--m-max", "12", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 12);
    assert!(text.starts_with("m,classical,quantum,nosignalling\n2,0.75,"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",1")));

    let bad = hcgame(&["figure3", "--out", dir.path().join("missing/fig.csv").to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn verify_reports() {
    let o = hcgame(&["verify", "classical", "--m", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let rep: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rep["pass"], true);
    assert_eq!(rep["seed"], 42);
    assert_eq!(rep["summary"]["rows"][0]["brute_force"], "5/8");

    let o = hcgame(&["verify", "nosignalling", "--m", "4", "--seed", "9"]);
    assert_eq!(o.status.code(), Some(0));
    let rep: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rep["seed"], 9);
    assert_eq!(rep["summary"]["rows"][0]["value"], "1/1");

    assert_eq!(hcgame(&["verify", "classical", "--m", "4"]).status.code(), Some(2));
    assert_eq!(hcgame(&["verify", "everything"]).status.code(), Some(2));
}

#[test]
fn verify_failure_exits_one() {
    // the closed-form average does not describe the simulated strategy beyond two players
    let o = hcgame(&["verify", "quantum", "--m", "3"]);
    assert_eq!(o.status.code(), Some(1));
    let rep: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rep["pass"], false);
}

#[test]
fn lemma2_flags_and_reproducibility() {
    let args = ["verify", "lemma2", "--trials", "50", "--dim", "6", "--max-power", "4", "--seed", "3", "--jobs", "1"];
    let a = hcgame(&args);
    let b = hcgame(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let rep: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(rep["summary"]["trials"], 50);
    assert_eq!(rep["summary"]["max_dim"], 6);
}

#[test]
fn jobs_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_hcgame"))
        .args(["values", "--m", "5"])
        .env("HCGAME_JOBS", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(o.stdout, hcgame(&["values", "--m", "5", "--jobs", "3"]).stdout);
    assert_eq!(hcgame(&["values", "--jobs", "0"]).status.code(), Some(2));
}

#[test]
fn eval_answers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("answer.json");
    // question (1,0): player 1 needs product -1
    std::fs::write(
        &path,
        r#"[{"player":1,"question_bit":1,"values":[1,-1]},{"player":2,"question_bit":0,"values":[1,1]}]"#,
    )
    .unwrap();
    let o = hcgame(&["eval", "--input", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["question"], serde_json::json!([1, 0]));
    assert_eq!(v["predicate"], true);
    assert_eq!(v["in_z"], true);

    std::fs::write(&path, r#"[{"player":2,"question_bit":0,"values":[1,1]}]"#).unwrap();
    assert_eq!(hcgame(&["eval", "--input", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn export_ns_lines() {
    let o = hcgame(&["export-ns", "--m", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 8 * 8);
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["p"], "1/8");
    }
    assert_eq!(hcgame(&["export-ns", "--m", "5"]).status.code(), Some(2));
}
