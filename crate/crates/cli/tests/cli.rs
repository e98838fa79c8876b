use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypercircle"))
        .args(args)
        .env_remove("HYPERCIRCLE_TOL")
        .output()
        .expect("spawn hypercircle")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn help_exits_zero() {
    let o = run(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("beta-sweep"));
}

#[test]
fn usage_errors_exit_one_with_single_line() {
    for args in [
        vec!["table", "--bogus"],
        vec!["table", "--levels", "3..1"],
        vec!["mesh", "--level", "0"],
        vec!["table", "--beta", "-1"],
        vec!["table", "--domain", "circle"],
        vec!["estimate", "--f", "nope"],
        vec!["mesh", "--levels", "1..2"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        let err = stderr(&o);
        assert_eq!(err.lines().count(), 1, "{args:?}: {err}");
        assert!(err.starts_with("error[usage]: "), "{args:?}: {err}");
    }
}

#[test]
fn unwritable_output_is_io_error() {
    let o = run(&["table", "--out", "/nonexistent-dir/x.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error[io]: "));
}

#[test]
fn single_row_table_has_dash_rate() {
    let o = run(&["table", "--domain", "square", "--level", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines.len(), 2);
    let cols: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(cols[5], "-");
    assert_eq!(cols[6], "0.4144");
    assert_eq!(cols[7], "0.5740");
}

#[test]
fn table_csv_and_json_agree() {
    let csv = stdout(&run(&[
        "table",
        "--domain",
        "right-triangle",
        "--levels",
        "1..2",
    ]));
    let json = stdout(&run(&[
        "table",
        "--domain",
        "right-triangle",
        "--levels",
        "1..2",
        "--format",
        "json",
    ]));
    let rows: Vec<serde_json::Value> = serde_json::from_str(&json).unwrap();
    for (line, row) in csv.lines().skip(1).zip(&rows) {
        let cols: Vec<&str> = line.split(',').collect();
        for (k, key) in ["h", "kappa", "c1", "mh"].iter().enumerate() {
            let c: f64 = cols[k + 1].parse().unwrap();
            assert_eq!(c.to_bits(), row[key].as_f64().unwrap().to_bits(), "{key}");
        }
    }
    assert!(rows[0]["rate"].is_null());
    assert!(rows[1]["rate"].as_f64().is_some());
}

#[test]
fn estimate_csv_and_json_agree() {
    let csv = stdout(&run(&[
        "estimate",
        "--domain",
        "equilateral",
        "--level",
        "2",
        "--format",
        "csv",
    ]));
    let json = stdout(&run(&[
        "estimate",
        "--domain",
        "equilateral",
        "--level",
        "2",
    ]));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    for (key, cell) in header.iter().zip(&row) {
        if let Some(x) = v[*key].as_f64() {
            assert_eq!(cell.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{key}");
        }
    }
    assert!(v["true_err_h1"].as_f64().unwrap() <= v["bound_h1"].as_f64().unwrap());
}

#[test]
fn output_is_independent_of_jobs() {
    let a = run(&[
        "beta-sweep",
        "--domain",
        "lshape",
        "--levels",
        "1..2",
        "--jobs",
        "1",
    ]);
    let b = run(&[
        "beta-sweep",
        "--domain",
        "lshape",
        "--levels",
        "1..2",
        "--jobs",
        "4",
    ]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn duplicate_beta_warns_and_is_dropped() {
    let o = run(&["beta-sweep", "--level", "1", "--betas", "10,1,10"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("duplicate beta 10"));
    assert_eq!(stdout(&o).lines().count(), 3);
}

#[test]
fn tolerance_env_var_is_honoured() {
    let o = Command::new(env!("CARGO_BIN_EXE_hypercircle"))
        .args(["table", "--level", "1"])
        .env("HYPERCIRCLE_TOL", "5")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("got 5"));

    let o = Command::new(env!("CARGO_BIN_EXE_hypercircle"))
        .args(["table", "--level", "1"])
        .env("HYPERCIRCLE_TOL", "1e-8")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mesh.json");
    let o = run(&[
        "mesh",
        "--domain",
        "lshape",
        "--level",
        "1",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["triangles"].as_array().unwrap().len(), 24);
}

#[test]
fn verify_prints_tap() {
    let o = run(&["verify", "--domain", "square", "--level", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let plan = s.lines().next().unwrap();
    let n: usize = plan.trim_start_matches("1..").parse().unwrap();
    assert_eq!(s.lines().filter(|l| l.starts_with("ok ")).count(), n);
}
