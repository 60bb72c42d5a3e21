use std::process::{Command, Output};

fn mrl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mrl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn read_rows(path: &std::path::Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(|x| x.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn eval_fraclinear_truncation() {
    let out = mrl(&["eval", "--model", "fraclinear:c=2,d=0.5", "--t", "4", "--order", "4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("7.750000000000e0"), "{text}");
    assert!(text.contains("8.000000000000e0"), "{text}");
}

#[test]
fn eval_several_times() {
    let out = mrl(&["eval", "--model", "exponential:rate=0.5", "--t", "1,10,100", "--order", "0"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(2)
        .map(|l| l.split_whitespace().filter_map(|x| x.parse().ok()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    for row in rows {
        // t r s m_quad err m_exp m_closed rm
        for col in [3, 5, 6] {
            assert!((row[col] - 2.0).abs() < 1e-9, "{row:?}");
        }
    }
}

#[test]
fn eval_oscillating_at_zero() {
    let out = mrl(&["eval", "--model", "oscillating:a=2,b=1,c=4,d=3", "--t", "0"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("5.000000000000e-1"));
}

#[test]
fn expand_prints_s_first() {
    let out = mrl(&["expand", "--model", "fraclinear:c=2,d=0.5", "--t", "0", "--order", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(rows.len(), 4);
    for (row, theta) in rows.iter().zip(["2.000000000000e0", "1.000000000000e0", "5.000000000000e-1", "2.500000000000e-1"]) {
        assert_eq!(row.split_whitespace().nth(1), Some(theta), "{row}");
        assert!(row.contains(" yes "), "{row}");
    }
}

#[test]
fn coeffs_listings() {
    let out = mrl(&["coeffs", "--order", "3", "--form", "theta"]);
    assert_eq!(stdout(&out).trim(), "1·s(s′)³ + 4·s²s′s″ + 1·s³s‴");
    assert_eq!(stdout(&mrl(&["coeffs", "--order", "1", "--form", "c"])).trim(), "0");
    assert_eq!(stdout(&mrl(&["coeffs", "--order", "4", "--form", "c"])).trim(), "3(r′)² − r‴");
}

#[test]
fn coeffs_order_cap_is_an_error() {
    let out = mrl(&["coeffs", "--order", "40"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    let out = mrl(&["eval", "--model", "gompertz:a=1", "--t", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse"));
    assert_eq!(mrl(&["eval", "--model", "exponential:rate=1", "--t", "-1"]).status.code(), Some(2));
    assert_eq!(mrl(&["verify", "--suite", "bogus"]).status.code(), Some(2));
    assert_eq!(mrl(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn verify_single_model() {
    let out = mrl(&["verify", "--model", "linearmrl:a=1,b=0.5", "--suite", "all", "--level", "fast"]);
    let text = stdout(&out);
    assert!(out.status.success(), "{text}");
    assert!(text.contains("0 failed"));
}

#[test]
fn table_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("frac.csv");
    let args = [
        "table", "--model", "fraclinear:c=2,d=0.5", "--t-start", "0", "--t-end", "10", "--steps", "3", "--order", "2",
        "--csv", path.to_str().unwrap(),
    ];
    assert!(mrl(&args).status.success());
    let (header, rows) = read_rows(&path);
    assert_eq!(
        header.join(","),
        "t,r,s,m_quad,m_quad_err,m_exp,rm_product,theta_0,theta_1,theta_2"
    );
    assert_eq!(rows.len(), 3);
    assert_eq!(rows.iter().map(|r| r[0]).collect::<Vec<_>>(), vec![0.0, 5.0, 10.0]);
    for row in &rows {
        assert!((row[6] - 2.0).abs() < 1e-8, "rm_product {}", row[6]);
    }

    let again = dir.path().join("again.csv");
    let mut args2 = args;
    args2[12] = again.to_str().unwrap();
    assert!(mrl(&args2).status.success());
    let (_, rows2) = read_rows(&again);
    let bits = |rows: &[Vec<f64>]| -> Vec<u64> { rows.iter().flatten().map(|x| x.to_bits()).collect() };
    assert_eq!(bits(&rows), bits(&rows2));
}

#[test]
fn table_exponential_constant_mrl() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.csv");
    let out = mrl(&[
        "table", "--model", "exponential:rate=0.5", "--t-start", "0", "--t-end", "50", "--steps", "6", "--order", "0",
        "--csv", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let (_, rows) = read_rows(&path);
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| (r[3] - 2.0).abs() < 1e-8));
}

#[test]
fn unwritable_table_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("x.csv");
    let out = mrl(&[
        "table", "--model", "exponential:rate=1", "--t-start", "0", "--t-end", "1", "--steps", "2",
        "--csv", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}
