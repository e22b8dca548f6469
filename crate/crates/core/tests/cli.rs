use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_krein"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().args(args).arg("--out").arg(dir).output().unwrap()
}

fn report(dir: &Path, cmd: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(format!("{cmd}_report.json"))).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# schema: krein/1"));
    lines.skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn write_matrix(path: &Path, rows: usize, re: &[f64], im: &[f64]) {
    let nest = |x: &[f64]| x.chunks(rows).map(<[f64]>::to_vec).collect::<Vec<_>>();
    let v = serde_json::json!({"rows": rows, "cols": rows, "re": nest(re), "im": nest(im)});
    fs::write(path, v.to_string()).unwrap();
}

#[test]
fn verify_random_instance() {
    let dir = scratch("verify");
    let out = run(&dir, &["verify", "--random", "8", "2", "42", "--fn", "z^3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&dir, "verify");
    assert!(r["rel_error"].as_f64().unwrap() <= 1e-7);
    assert_eq!(r["schema"], "krein/1");
    assert_eq!(r["passed"], true);
}

#[test]
fn gen_then_verify_from_files() {
    let dir = scratch("gen");
    let out = run(&dir, &["gen", "--n", "6", "--rank", "2", "--seed", "11"]);
    assert_eq!(out.status.code(), Some(0));
    for f in ["U.json", "A.json", "V.json"] {
        let m: Value = serde_json::from_str(&fs::read_to_string(dir.join(f)).unwrap()).unwrap();
        assert_eq!(m["schema"], "krein/1");
        let re = m["re"].as_array().unwrap();
        assert_eq!(re.len(), 6);
        assert!(re.iter().all(|r| r.as_array().unwrap().len() == 6));
    }
    let u = dir.join("U.json");
    let a = dir.join("A.json");
    let out = run(&dir, &["verify", "--u", u.to_str().unwrap(), "--a", a.to_str().unwrap(), "--fn", "cos"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn ssf_with_zero_generator_is_one_zero_arc() {
    let dir = scratch("ssf-zero");
    run(&dir, &["gen", "--n", "4", "--seed", "3"]);
    let a = dir.join("zero.json");
    write_matrix(&a, 4, &[0.0; 16], &[0.0; 16]);
    let u = dir.join("U.json");
    let out = run(&dir, &["ssf", "--u", u.to_str().unwrap(), "--a", a.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&dir.join("ssf.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][2].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn ssf_json_format() {
    let dir = scratch("ssf-json");
    let out = run(&dir, &["ssf", "--random", "5", "2", "9", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let t: Value = serde_json::from_str(&fs::read_to_string(dir.join("ssf.json")).unwrap()).unwrap();
    assert_eq!(t["schema"], "krein/1");
    assert!(report(&dir, "ssf")["mean_check"].as_f64().unwrap().abs() <= 1e-10);
}

#[test]
fn schurnorm_lower_bounds_increase() {
    let dir = scratch("schurnorm");
    let out = run(&dir, &["schurnorm", "--fn", "abs-theta", "--grids", "8,16,32"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&dir.join("schurnorm.csv"));
    let lower: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(lower.len(), 3);
    assert!(lower.windows(2).all(|w| w[1] > w[0]), "{lower:?}");
    for r in &rows {
        assert!(r[1].parse::<f64>().unwrap() <= r[2].parse::<f64>().unwrap() + 1e-9);
    }
}

#[test]
fn deriv_and_twist_write_tables() {
    let dir = scratch("deriv");
    let out = run(&dir, &["deriv", "--random", "6", "2", "5", "--fn", "z^2", "--steps", "1e-2,1e-3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(csv_rows(&dir.join("deriv.csv")).len(), 2);
    let out = run(&dir, &["twist", "--random", "4", "1", "5", "--fn", "z^2", "--grid", "16", "--route", "ssf"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(csv_rows(&dir.join("twist.csv")).len(), 16);
}

#[test]
fn doi_of_identity_function_returns_t() {
    let dir = scratch("doi");
    run(&dir, &["gen", "--n", "3", "--seed", "2"]);
    let t = dir.join("T.json");
    let re = [1.0, 2.0, 0.0, 0.0, -1.0, 0.5, 3.0, 0.0, 1.0];
    write_matrix(&t, 3, &re, &[0.0; 9]);
    let u = dir.join("U.json");
    let out = run(&dir, &["doi", "--u", u.to_str().unwrap(), "--t", t.to_str().unwrap(), "--fn", "z^1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let m: Value = serde_json::from_str(&fs::read_to_string(dir.join("doi.json")).unwrap()).unwrap();
    let got: Vec<f64> = m["re"].as_array().unwrap().iter().flat_map(|r| r.as_array().unwrap().clone()).map(|x| x.as_f64().unwrap()).collect();
    for (got, want) in got.into_iter().zip(re) {
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn corrupted_unitary_exits_2() {
    let dir = scratch("corrupt");
    let u = dir.join("U.json");
    write_matrix(&u, 2, &[1.0, 0.0, 0.0, 1.5], &[0.0; 4]);
    let a = dir.join("A.json");
    write_matrix(&a, 2, &[0.0; 4], &[0.0; 4]);
    let out = run(&dir, &["verify", "--u", u.to_str().unwrap(), "--a", a.to_str().unwrap(), "--fn", "z^2"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["message"].as_str().unwrap().contains("UnitaryMatrix invariant"), "{err}");
    assert!(dir.join("error.json").exists());
}

#[test]
fn bad_arguments_exit_2() {
    let dir = scratch("badargs");
    assert_eq!(run(&dir, &["verify", "--random", "4", "1", "1", "--fn", "nope"]).status.code(), Some(2));
    assert_eq!(run(&dir, &["frobnicate"]).status.code(), Some(2));
    let out = run(&dir, &["verify", "--u", "/nonexistent.json", "--a", "/nonexistent.json", "--fn", "z^2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn suite_exits_3_when_tolerance_is_unreachable() {
    let dir = scratch("suite");
    let out = run(&dir, &["suite", "--only", "dkbs", "--tol", "1e-16"]);
    assert_eq!(out.status.code(), Some(3));
    let r = report(&dir, "suite");
    assert_eq!(r["passed"], false);
    let out = run(&dir, &["suite", "--only", "dkbs,twist"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn outputs_are_deterministic() {
    let a = scratch("det-a");
    let b = scratch("det-b");
    for dir in [&a, &b] {
        run(dir, &["gen", "--n", "5", "--rank", "2", "--seed", "77"]);
        run(dir, &["ssf", "--random", "5", "2", "77"]);
    }
    for f in ["U.json", "A.json", "V.json", "ssf.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = scratch("config");
    let cfg = dir.join("run.toml");
    fs::write(&cfg, "n = 3\nseed = 5\nrank = 1\n").unwrap();
    let out = run(&dir, &["gen", "--config", cfg.to_str().unwrap(), "--n", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&dir, "gen");
    assert_eq!(r["n"], 4);
    assert_eq!(r["seed"], 5);
    fs::write(&cfg, "bogus = 1\n").unwrap();
    assert_eq!(run(&dir, &["gen", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn numbers_carry_17_significant_digits() {
    let dir = scratch("digits");
    run(&dir, &["gen", "--n", "2", "--seed", "1"]);
    let text = fs::read_to_string(dir.join("U.json")).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    let x = v["re"][0][0].as_f64().unwrap();
    let literal = text.split("\"re\":").nth(1).unwrap().trim_start_matches([' ', '[', '\n']);
    let literal = literal.split([',', ']']).next().unwrap().trim();
    let mantissa = literal.split(['e', 'E']).next().unwrap().replace(['-', '.'], "");
    assert_eq!(mantissa.len(), 17, "{literal}");
    assert_eq!(literal.parse::<f64>().unwrap(), x);
}
