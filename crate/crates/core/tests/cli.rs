use bigamma::cli::run;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("bigamma").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn single_cell_table() {
    let (code, out, _) = call(&["table", "--xs", "1", "--ys", "1"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "x,y,value,err,converged");
    assert_eq!(lines.len(), 2);
    let cols: Vec<&str> = lines[1].split(',').collect();
    let v: f64 = cols[2].parse().unwrap();
    assert!((v - 1.0).abs() < 1e-12);
    assert_eq!(cols[4], "true");
}

#[test]
fn default_table_has_nine_rows() {
    let (code, out, _) = call(&["table"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 10);
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["table", "--xs", "0.5,1.7", "--ys", "0.3,2"][..],
        &["--format", "json", "eval", "2", "2", "--z", "0.4"][..],
        &["--format", "csv", "verify", "--grid", "x=0.5,2;y=1,3;a=2;z=0.3,0.6;p=0.5;m=1,2;n=2"][..],
    ] {
        let first = call(args);
        assert_eq!(first.0, 0, "{args:?}: {}", first.2);
        for _ in 0..2 {
            assert_eq!(call(args), first, "{args:?}");
        }
    }
}

#[test]
fn eval_formats() {
    let (code, out, _) = call(&["--format", "csv", "eval", "2", "2", "--z", "0.5"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("quantity,x,y,z,value,err,converged\n"));
    assert_eq!(out.lines().count(), 4);

    let (code, out, _) = call(&["--format", "json", "eval", "1", "1"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v[0]["quantity"], "bigamma");
    assert!((v[0]["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(v[0]["z"].is_null());
}

#[test]
fn bad_input_exits_one() {
    for args in [
        &["eval", "-1", "2"][..],
        &["eval", "1", "2", "--z", "1.5"][..],
        &["table", "--xs", ""][..],
        &["verify", "--checks", "nosuch"][..],
        &["verify", "--grid", "q=1"][..],
        &["--rel-tol", "-1", "eval", "1", "1"][..],
        &["frobnicate"][..],
    ] {
        let (code, _, err) = call(args);
        assert_eq!(code, 1, "{args:?}");
        assert!(!err.is_empty(), "{args:?}");
    }
    let (code, out, _) = call(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("verify"));
}

#[test]
fn coeffs_then_series() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gl.tbl");
    let p = path.to_str().unwrap();
    let (code, out, err) = call(&["coeffs", "--kind", "GAMMA_LN", "--max-m", "13", "--max-n", "13", "--out", p]);
    assert_eq!(code, 0, "{out}{err}");
    let (code, _, _) = call(&["coeffs", "--kind", "GAMMA_LN", "--max-m", "2", "--max-n", "2", "--out", p]);
    assert_eq!(code, 1, "refuses to overwrite");

    let (code, out, _) = call(&["--format", "csv", "series", "1.2", "0.9", "--table", p]);
    assert_eq!(code, 0);
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    let rel: f64 = row[7].parse().unwrap();
    assert!(rel < 1e-6, "{out}");

    let (code, _, err) = call(&["series", "3", "3", "--table", p]);
    assert_eq!(code, 1);
    assert!(err.contains("radius"), "{err}");
    let (code, _, _) = call(&["series", "1.1", "1.1", "--which", "beta", "--table", p]);
    assert_eq!(code, 1, "kind mismatch");
}

#[test]
fn verify_json_summary() {
    let (code, out, _) = call(&["--format", "json", "verify", "--checks", "quadrant,diag", "--grid", "x=0.5,2;y=0.7,3"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["summary"]["fail"], 0);
    assert!(v["records"].as_array().unwrap().len() >= 4);
}
