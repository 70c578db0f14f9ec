use std::process::{Command, Output};

fn fraclift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fraclift"))
        .args(args)
        .env_remove("FRACLIFT_TOL")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn deriv_json_is_byte_identical_across_runs() {
    let args = [
        "deriv", "--expr", "exp(x) + (x-0)^3", "--k", "0.5", "--at", "0.5", "--at", "2",
        "--compare-paths", "--format", "json",
    ];
    let (a, b) = (fraclift(&args), fraclift(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let doc: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(doc["orders"][0], 0.5);
    assert_eq!(doc["rl"]["values"].as_array().unwrap().len(), 2);
    for row in doc["diff"].as_array().unwrap() {
        assert!(row["abs_diff"].as_f64().unwrap() <= 1e-12 * row["rl"].as_f64().unwrap().abs());
    }
}

#[test]
fn deriv_csv_has_seventeen_digits() {
    let o = fraclift(&["deriv", "--expr", "x", "--k", "0.5", "--at", "1", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "x,value\n1.0000000000000000e0,1.1283791670955126e0\n");
}

#[test]
fn deriv_marks_the_kernel() {
    let o = fraclift(&["deriv", "--expr", "(x-0)^(-0.5)", "--k", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("result (rl): 0 (kernel: α+1−k = 0)"));
    let o = fraclift(&["deriv", "--expr", "x^(-0.5)", "--k", "0.5", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["annihilated"][0]["exp"], -0.5);
    assert_eq!(doc["annihilated"][0]["kernel_index"], 0.0);
    assert!(doc["result"]["terms"].as_array().unwrap().is_empty());
}

#[test]
fn lift_and_project_through_files() {
    let dir = std::env::temp_dir().join(format!("fraclift-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let series = dir.join("f.json");
    std::fs::write(
        &series,
        r#"{"basepoint": 0.0, "terms": [{"exp": -0.5, "coef": 1.0}]}"#,
    )
    .unwrap();
    let o = fraclift(&["lift", "--file", series.to_str().unwrap(), "--shift", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let lifted = dir.join("rho.json");
    std::fs::write(&lifted, &o.stdout).unwrap();
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["offset"], 1.0);

    // the slot is hidden at offset 1 and reappears after another half step
    let o = fraclift(&["project", "--file", lifted.to_str().unwrap(), "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(doc["terms"].as_array().unwrap().is_empty());
    let o = fraclift(&[
        "project", "--file", lifted.to_str().unwrap(), "--shift", "0.5", "--format", "json",
    ]);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["terms"][0]["exp"], -1.5);
    assert!((doc["terms"][0]["coef"].as_f64().unwrap() + 0.5).abs() < 1e-15);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn oracle_compare_emits_csv() {
    let o = fraclift(&[
        "oracle-compare", "--expr", "x", "--k", "0.5", "--at", "0.25", "--at", "1", "--at", "2.25",
        "--max-diff", "1e-5",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,termwise,oracle,abs_diff");
    assert_eq!(lines.len(), 4);
    assert!(lines[2].starts_with("1.0000000000000000e0,1.1283791670955126e0,"));
}

#[test]
fn oracle_compare_failure_threshold() {
    let o = fraclift(&[
        "oracle-compare", "--expr", "exp(x)", "--order", "4", "--k", "0.5", "--at", "1",
        "--rel-tol", "1", "--max-diff", "1e-12",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn kernel_check_lists_every_term() {
    let o = fraclift(&["kernel-check", "--expr", "x^(-1.5) + x^(-0.5) + x^1.5", "--k", "1.5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("2 of 3 terms annihilated"), "{text}");
}

#[test]
fn tolerance_comes_from_the_environment() {
    // 0.5 + 1e-7 counts as an integer order only under a loose tolerance
    let args = ["kernel-check", "--expr", "x^(-0.5)", "--k", "0.5000001", "--format", "csv"];
    let strict = fraclift(&args);
    assert!(stdout(&strict).lines().nth(1).unwrap().contains(",false,"));
    let loose = Command::new(env!("CARGO_BIN_EXE_fraclift"))
        .args(args)
        .env("FRACLIFT_TOL", "1e-6")
        .output()
        .unwrap();
    assert!(stdout(&loose).lines().nth(1).unwrap().contains(",true,"));
    let bad = Command::new(env!("CARGO_BIN_EXE_fraclift"))
        .args(args)
        .env("FRACLIFT_TOL", "abc")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let flag = fraclift(&["--tol", "1e-6", "kernel-check", "--expr", "x^(-0.5)", "--k", "0.5000001"]);
    assert!(stdout(&flag).contains("1 of 1 terms annihilated"));
}

#[test]
fn usage_errors() {
    assert_eq!(fraclift(&[]).status.code(), Some(2));
    assert_eq!(fraclift(&["deriv", "--k", "1"]).status.code(), Some(2));
    assert_eq!(
        fraclift(&["deriv", "--expr", "x", "--file", "f.json", "--k", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(fraclift(&["deriv", "--expr", "y", "--k", "1"]).status.code(), Some(2));
    assert_eq!(
        fraclift(&["deriv", "--expr", "x", "--k", "1", "--format", "xml"]).status.code(),
        Some(2)
    );
    assert_eq!(
        fraclift(&["deriv", "--expr", "(x-1)^0.5", "--k", "1"]).status.code(),
        Some(2)
    );
    let o = fraclift(&["deriv", "--expr", "x +", "--k", "1"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("column 4"));
    assert_eq!(
        fraclift(&["deriv", "--expr", "x", "--k", "0.5", "--at", "-1"]).status.code(),
        Some(2)
    );
}

#[test]
fn verify_csv_lists_suites() {
    let o = fraclift(&["verify", "--suite", "d6p", "--suite", "kernel", "--cases", "20", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(1).unwrap().starts_with("d6p,true,"));
}
