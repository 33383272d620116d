use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_fractal-zeta"));
    c.env_remove("FRACTAL_ZETA_PRECISION");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("fractal-zeta-{}-{name}", std::process::id()))
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON")
}

fn as_f64(v: &Value) -> f64 {
    match v {
        Value::String(s) => s.parse().unwrap(),
        Value::Number(n) => n.as_f64().unwrap(),
        _ => panic!("not a number: {v}"),
    }
}

#[test]
fn phi_coefficients_from_model_file() {
    let path = models_dir().join("sg2-neumann.json");
    let o = run(&["phi", "--model", path.to_str().unwrap(), "--coeffs", "10", "--precision", "30"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,phi,err"));
    let row2: Vec<&str> = text.lines().nth(3).unwrap().split(',').collect();
    assert_eq!(row2[0], "2");
    assert!((row2[1].parse::<f64>().unwrap() - 0.05).abs() < 1e-25);
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn phi_eval_sinh() {
    let o = run(&["phi", "--model", "sinh", "--eval", "1.0", "--precision", "30"]);
    assert!(o.status.success());
    let v = json(&o);
    let re = v["value"][0].as_str().unwrap();
    assert!(re.starts_with("1.0861612696"), "{re}");
    assert!(v["err"].is_number());
}

#[test]
fn phi_grid_has_err_column() {
    let o = run(&["phi", "--model", "sg2-neumann", "--grid", "lin:0:4:5", "--precision", "20"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("x,re,im,err"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn missing_model_names_path() {
    let o = run(&["phi", "--model", "/nonexistent/model.json", "--coeffs", "3"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("/nonexistent/model.json"), "{err}");
}

#[test]
fn bad_grid_is_validation_error() {
    let o = run(&["spectrum", "--model", "sg2-dirichlet", "--count-grid", "log:0:10:5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn empty_spectrum_keeps_header() {
    let o = run(&["spectrum", "--model", "sg2-dirichlet", "--X", "0", "--precision", "20"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "eigenvalue,err,w,m,word,mu,multiplicity,root_multiplicity\n");
}

#[test]
fn spectrum_records_match_multiplicities() {
    let o = run(&["spectrum", "--model", "sg2-dirichlet", "--X", "1e4", "--precision", "30"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut total = 0u64;
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert!(f[0].parse::<f64>().unwrap() <= 1e4);
        total += f[6].parse::<u64>().unwrap() * f[7].parse::<u64>().unwrap();
    }
    let o = run(&["spectrum", "--model", "sg2-dirichlet", "--count-grid", "lin:1e4:1e4:1", "--precision", "30"]);
    let count: u64 = stdout(&o).lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(total, count);
}

#[test]
fn counting_csv_has_ratio() {
    let o = run(&["spectrum", "--model", "sg2-neumann", "--count-grid", "log:1:1e6:512", "--precision", "20"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert!(header.contains(&"ratio") && header.contains(&"err"));
    assert_eq!(text.lines().count(), 513);
    let counts: Vec<u64> =
        text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(counts.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn heat_trace_and_dimension() {
    let o = run(&["spectrum", "--model", "sg2-dirichlet", "--heat-grid", "log:1e-3:1:4", "--precision", "20"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("t,value,err,warning\n"));
    let o = run(&["spectrum", "--model", "sg2-dirichlet", "--dimension", "--precision", "20"]);
    let v = json(&o);
    let ds = v["ds_half"].as_f64().unwrap();
    assert!((ds - 3f64.ln() / 5f64.ln()).abs() < 1e-12);
}

#[test]
fn zeta_value_both_routes() {
    let o = run(&["zeta", "--model", "sg2-neumann", "--s", "2+0i", "--w", "-3", "--precision", "30"]);
    assert!(o.status.success());
    let v = json(&o);
    let routes = v["values"][0]["routes"].as_array().unwrap();
    let tags: Vec<&str> = routes.iter().map(|r| r["method"].as_str().unwrap()).collect();
    assert_eq!(tags, ["direct-sum", "mellin"]);
    let a = as_f64(&routes[0]["value"][0]);
    let b = as_f64(&routes[1]["value"][0]);
    assert!((a - b).abs() < 1e-15 * a.abs());
    assert!(routes.iter().all(|r| r["err"].is_number()));
}

#[test]
fn zeta_special_neumann() {
    let o = run(&["zeta", "--model", "sg2-neumann", "--special", "--precision", "30"]);
    assert!(o.status.success());
    let v = json(&o);
    let comps = v["special"]["comparisons"].as_array().unwrap();
    let find = |name: &str| comps.iter().find(|c| c["name"] == name).unwrap()["computed"].as_f64().unwrap();
    assert!((find("zeta_delta(1)") - 7.0 / 30.0).abs() < 1e-14);
    assert!((find("zeta_delta(2)") - 1.0 / 150.0).abs() < 1e-14);
    assert!((find("zeta_delta'(0) [published]") - 0.9685221499).abs() < 1e-10);
}

#[test]
fn zeta_poles_include_cancelled_grid() {
    let o = run(&["zeta", "--model", "sg2-dirichlet", "--poles", "--mmax", "5", "--precision", "30"]);
    assert!(o.status.success());
    let v = json(&o);
    let poles = v["poles"].as_array().unwrap();
    let grid: Vec<&Value> = poles.iter().filter(|p| p["kind"] == "zeta-grid").collect();
    assert_eq!(grid.len(), 11);
    assert!(grid.iter().all(|p| p["cancelled"] == true));
    let live = poles.iter().filter(|p| p["cancelled"] == false).count();
    assert!(live > 0);
}

#[test]
fn zeta_without_task_is_rejected() {
    let o = run(&["zeta", "--model", "sg2-neumann", "--precision", "20"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn zeta_near_pole_is_validation_error() {
    let rho = (2f64.ln() / 5f64.ln()).to_string();
    let o = run(&["zeta", "--model", "sg2-neumann", "--s", &rho, "--w", "-3", "--precision", "20"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn verify_sinh_oracle() {
    let o = run(&["verify", "--oracle", "sinh", "--precision", "30"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn verify_decimation_levels() {
    let o = run(&["verify", "--model", "sg2-dirichlet", "--decimation", "--levels", "3"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS closure 2->3"));
}

#[test]
fn perturbed_model_fails_verification() {
    let path = temp_path("perturbed.json");
    let mut model: Value =
        serde_json::from_str(&std::fs::read_to_string(models_dir().join("sg2-dirichlet.json")).unwrap()).unwrap();
    model["offsets"][2]["P"] = serde_json::json!([0, 3, -5]);
    std::fs::write(&path, model.to_string()).unwrap();
    let o = run(&["verify", "--model", path.to_str().unwrap(), "--decimation", "--levels", "2"]);
    std::fs::remove_file(&path).ok();
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL mismatch"));
}

#[test]
fn invalid_model_exit_code() {
    let path = temp_path("invalid.json");
    std::fs::write(&path, r#"{"name":"bad","poly":[5,1],"offsets":[{"w":3,"P":[1],"Q":[1],"m_min":0}],"julia_negative":true}"#)
        .unwrap();
    let o = run(&["phi", "--model", path.to_str().unwrap(), "--coeffs", "2"]);
    std::fs::remove_file(&path).ok();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_file_and_determinism() {
    let a = temp_path("a.csv");
    let b = temp_path("b.csv");
    for p in [&a, &b] {
        let o = run(&["spectrum", "--model", "sg3-dirichlet", "--X", "1e3", "--output", p.to_str().unwrap()]);
        assert!(o.status.success());
        assert!(o.stdout.is_empty());
    }
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    std::fs::remove_file(&a).ok();
    std::fs::remove_file(&b).ok();
    assert!(!x.is_empty());
    assert_eq!(x, y);
}

#[test]
fn precision_from_environment() {
    let o = bin()
        .args(["phi", "--model", "sinh", "--eval", "1"])
        .env("FRACTAL_ZETA_PRECISION", "25")
        .output()
        .unwrap();
    let v = json(&o);
    let re = v["value"][0].as_str().unwrap();
    assert_eq!(re.trim_start_matches('-').chars().filter(|c| c.is_ascii_digit()).count(), 25, "{re}");
}
