use std::path::PathBuf;

use assert_cmd::Command;

fn qmaj() -> Command {
    let mut cmd = Command::cargo_bin("qmaj").unwrap();
    cmd.env_remove("QMAJ_PRECISION");
    cmd
}

fn stdout_of(args: &[&str]) -> String {
    let out = qmaj().args(args).assert().success().get_output().stdout.clone();
    String::from_utf8(out).unwrap()
}

fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name);
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn table_matches_fixtures() {
    assert_eq!(stdout_of(&["table", "--family", "A", "--n-max", "6", "--format", "csv"]), fixture("table_a_n6.csv"));
    assert_eq!(stdout_of(&["table", "--family", "B", "--n-max", "4"]), fixture("table_b_n4.csv"));
}

#[test]
fn table_header_only_for_n_max_one() {
    assert_eq!(stdout_of(&["table", "--family", "A", "--n-max", "1"]), "family,n,k,coefficient\n");
}

#[test]
fn table_json_is_valid_and_exact() {
    let text = stdout_of(&["table", "--family", "B", "--n-max", "4", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 30);
    let last = rows.last().unwrap();
    assert_eq!(last["n"], 4);
    assert_eq!(last["k"], 16);
    assert_eq!(last["coefficient"], "1");
}

#[test]
fn table_writes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.csv");
    qmaj()
        .args(["table", "--family", "A", "--n-max", "6", "--out"])
        .arg(&path)
        .assert()
        .success();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), fixture("table_a_n6.csv"));
}

#[test]
fn unwritable_output_exits_3_and_names_path() {
    let out = qmaj()
        .args(["table", "--family", "A", "--n-max", "3", "--out", "/no/such/dir/t.csv"])
        .assert()
        .code(3)
        .get_output()
        .stderr
        .clone();
    assert!(String::from_utf8(out).unwrap().contains("/no/such/dir/t.csv"));
}

#[test]
fn moments_examples() {
    let a = stdout_of(&["moments", "--family", "A", "--n", "4"]);
    assert!(a.contains("10/3") && a.contains("20/9"), "{a}");
    let b = stdout_of(&["moments", "--family", "B", "--n", "2"]);
    assert!(b.contains("12/5") && b.contains("26/25"), "{b}");
    let json = stdout_of(&["moments", "--family", "A", "--n", "4", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["mean"], "10/3");
    assert_eq!(v["variance"], "20/9");
}

#[test]
fn moments_rejects_empty_family() {
    qmaj().args(["moments", "--family", "A", "--n", "1"]).assert().code(2);
}

#[test]
fn verify_examples_pass() {
    for args in [
        ["--family", "A", "--n-max", "20", "--oracle-max", "7"],
        ["--family", "B", "--n-max", "12", "--oracle-max", "5"],
        ["--family", "A", "--n-max", "2", "--oracle-max", "2"],
    ] {
        let out = stdout_of(&[&["verify"][..], &args[..]].concat());
        assert!(!out.contains("FAIL"), "{out}");
    }
}

#[test]
fn verify_output_independent_of_workers() {
    let base = ["verify", "--family", "B", "--n-max", "8", "--oracle-max", "5", "--workers"];
    let one = stdout_of(&[&base[..], &["1"]].concat());
    let many = stdout_of(&[&base[..], &["4"]].concat());
    assert_eq!(one, many);
}

#[test]
fn verify_rejects_oversized_oracle() {
    qmaj()
        .args(["verify", "--family", "A", "--n-max", "5", "--oracle-max", "12"])
        .assert()
        .code(2);
}

#[test]
fn normality_csv_rows_and_trailer() {
    let text = stdout_of(&["normality", "--family", "A", "--n-list", "10", "--format", "csv"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "family,n,x,pmf,cdf_empirical,cdf_normal");
    assert_eq!(lines.len(), 1 + 45 + 1);
    assert!(lines.last().unwrap().starts_with("A,10,KS,,,"));
    assert!(lines.iter().all(|l| l.split(',').count() == 6));
}

#[test]
fn normality_ks_decreases() {
    let a = stdout_of(&["normality", "--family", "A", "--n-list", "5,10,20", "--precision", "30"]);
    assert!(a.contains("KS strictly decreasing along the list: yes"), "{a}");
    let b = stdout_of(&["normality", "--family", "B", "--n-list", "4,8,16", "--precision", "30"]);
    assert!(b.contains("KS strictly decreasing along the list: yes"), "{b}");
}

#[test]
fn normality_json_parses() {
    let text = stdout_of(&["normality", "--family", "B", "--n-list", "2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
    assert_eq!(v["rows"][0]["pmf"], "1/5");
}

#[test]
fn normality_rejects_degenerate_n() {
    qmaj().args(["normality", "--family", "A", "--n-list", "2"]).assert().code(2);
}

fn limits_csv(args: &[&str]) -> Vec<Vec<String>> {
    let text = stdout_of(&[&["limits", "--format", "csv"][..], args].concat());
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn limits_tannery_targets() {
    let rows = limits_csv(&["--family", "A", "--n-list", "10,20,40", "--t", "1", "--x", "-1"]);
    let tannery: Vec<_> = rows.iter().filter(|r| r[1] == "tannery sum").collect();
    assert_eq!(tannery.len(), 3);
    assert!(tannery[0][4].starts_with("0.3678794"));
    let rows = limits_csv(&["--family", "B", "--n-list", "8,16", "--t", "1", "--x", "-1"]);
    assert!(rows.iter().any(|r| r[1] == "tannery sum" && r[4].starts_with("0.6065306")));
}

#[test]
fn limits_mgf_exactly_one_at_zero() {
    let rows = limits_csv(&["--family", "A", "--n-list", "10", "--t", "0", "--x", "1"]);
    let mgf = rows.iter().find(|r| r[1] == "standardized mgf").unwrap();
    assert_eq!(mgf[3], "1.0000000000000000000");
    assert_eq!(mgf[5], "0.0000000000000000000");
}

#[test]
fn limits_rejects_large_x() {
    qmaj()
        .args(["limits", "--family", "A", "--n-list", "10", "--x", "1.5"])
        .assert()
        .code(2);
}

#[test]
fn usage_errors_exit_2() {
    qmaj().args(["table", "--family", "C", "--n-max", "3"]).assert().code(2);
    qmaj().args(["moments", "--family", "A"]).assert().code(2);
    qmaj()
        .args(["moments", "--family", "A", "--n", "4"])
        .env("QMAJ_PRECISION", "10")
        .assert()
        .code(2);
}

#[test]
fn precision_from_environment() {
    let out = qmaj()
        .args(["moments", "--family", "A", "--n", "4"])
        .env("QMAJ_PRECISION", "25")
        .assert()
        .success()
        .get_output()
        .stdout
        .clone();
    assert!(String::from_utf8(out).unwrap().contains("1.4907119849998597976"));
}
