use std::path::PathBuf;
use std::process::{Command, Output};

use etaforge::field::{rat, Field};
use etaforge::{CycNum, CycSeries};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_etaforge"))
        .args(args)
        .env_remove("ETAFORGE_PREC_DEFAULT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn temp_file(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("etaforge-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn quotient_file(name: &str, level: u64, terms: &[(u64, &str, i64)]) -> PathBuf {
    let terms: Vec<Value> = terms
        .iter()
        .map(|(t, c, e)| serde_json::json!({"t": t, "char": c, "exp": e.to_string()}))
        .collect();
    let body = serde_json::json!({
        "level": level,
        "constant": {"zeta_order": 1, "coeffs": ["1"]},
        "terms": terms,
    });
    temp_file(name, &body.to_string())
}

/// Euler's pentagonal series `sum (-1)^k q^{k(3k-1)/2}` over all integers k.
fn pentagonal(n: usize) -> Vec<i64> {
    let mut c = vec![0; n];
    for k in -20i64..=20 {
        let e = k * (3 * k - 1) / 2;
        if (e as usize) < n {
            c[e as usize] += if k % 2 == 0 { 1 } else { -1 };
        }
    }
    c
}

#[test]
fn expand_eta_matches_pentagonal_numbers() {
    let o = run(&["expand", "eta", "--prec", "40", "--json"]);
    assert!(o.status.success());
    let f = CycSeries::from_json_str(&stdout(&o)).unwrap();
    assert_eq!(f.leading_exponent(), &rat(1, 24));
    let want: Vec<CycNum> = pentagonal(40).into_iter().map(CycNum::from_integer).collect();
    assert_eq!(f.coeffs(), want.as_slice());
}

#[test]
fn expand_eta_chi_kronecker3() {
    let o = run(&["expand", "eta-chi", "--char", "kronecker:3", "--prec", "5", "--json"]);
    assert!(o.status.success());
    let f = CycSeries::from_json_str(&stdout(&o)).unwrap();
    assert_eq!(f.coeffs()[0], CycNum::from_integer(1));
    assert_eq!(f.coeffs()[1], CycNum::zeta(3, 2) - CycNum::zeta(3, 1));
}

#[test]
fn expand_e2_is_twice_sigma() {
    let o = run(&["expand", "e2", "--psi", "one:1", "--phi", "one:1", "--prec", "30", "--json"]);
    let f = CycSeries::from_json_str(&stdout(&o)).unwrap();
    assert_eq!(f.coeffs()[0], CycNum::from_rational(&rat(-1, 12)));
    for n in 1..30i64 {
        let sigma: i64 = (1..=n).filter(|d| n % d == 0).sum();
        assert_eq!(f.coeffs()[n as usize], CycNum::from_integer(2 * sigma), "n = {n}");
    }
}

#[test]
fn default_precision_comes_from_environment() {
    let o = run(&["expand", "eta", "--json"]);
    assert_eq!(CycSeries::from_json_str(&stdout(&o)).unwrap().precision(), 120);
    let o = Command::new(env!("CARGO_BIN_EXE_etaforge"))
        .args(["expand", "eta", "--json"])
        .env("ETAFORGE_PREC_DEFAULT", "17")
        .output()
        .unwrap();
    assert_eq!(CycSeries::from_json_str(&stdout(&o)).unwrap().precision(), 17);
}

#[test]
fn json_output_is_deterministic() {
    let args = ["multiplier", "--char", "kronecker:3", "--json"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let args = ["expand", "eta-chi", "--char", "chi:5:4:2=1", "--prec", "30", "--json"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn orders_table_json() {
    let o = run(&["orders", "--char", "kronecker:3", "--json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["level"], 9);
    assert_eq!(v["valence_sum"], 0);
    let rows: Vec<(String, i64)> = v["cusps"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["cusp"].as_str().unwrap().to_string(), r["order"].as_i64().unwrap()))
        .collect();
    for (cusp, order) in [("oo", 0), ("0", 0), ("1/3", -3), ("2/3", 3)] {
        assert!(rows.contains(&(cusp.to_string(), order)), "{cusp}: {rows:?}");
    }
}

#[test]
fn orders_text_for_kronecker5() {
    let o = run(&["orders", "--char", "kronecker:5"]);
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.split_whitespace().collect::<Vec<_>>() == ["2/5", "1", "-25"]));
    assert!(text.contains("valence sum 0"));
}

#[test]
fn decompose_delta_quotient() {
    let q = quotient_file("delta.json", 2, &[(1, "one:1", -24), (2, "one:1", 24)]);
    let o = run(&["decompose", "--level", "2", "--quotient", q.to_str().unwrap(), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["certified"], true);
    let exps: Vec<(u64, String)> = v["expr"]["terms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| (t["t"].as_u64().unwrap(), t["exp"].as_str().unwrap().to_string()))
        .collect();
    assert!(exps.contains(&(1, "-24/1".into())) && exps.contains(&(2, "24/1".into())), "{exps:?}");
}

#[test]
fn decompose_generalized_quotient_from_series() {
    let q = quotient_file("k3.json", 9, &[(1, "kronecker:3", 12)]);
    let series = run(&["expand", "quotient", "--file", q.to_str().unwrap(), "--prec", "20", "--json"]);
    let s = temp_file("k3-series.json", &stdout(&series));
    let o = run(&["decompose", "--level", "9", "--series", s.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("kronecker:3") && text.ends_with("certified\n"), "{text}");
}

#[test]
fn non_quotient_is_not_certified() {
    // 1 + q has a zero of order 1 at an interior point of H, so it is no quotient
    let mut c = vec![CycNum::from_integer(0); 20];
    c[0] = CycNum::from_integer(1);
    c[1] = CycNum::from_integer(1);
    let s = temp_file("poly.json", &CycSeries::from_coeffs(c).to_json_string());
    let o = run(&["decompose", "--level", "2", "--series", s.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("not certified"));
}

#[test]
fn verify_cusp_order_suite_passes() {
    let o = run(&["verify", "lemma3", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let checks = v["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 16);
    assert!(checks.iter().all(|c| c["pass"] == true));
}

#[test]
fn multiplier_fixtures_are_twelfth_roots() {
    let o = run(&["multiplier", "--char", "psi4", "--json"]);
    assert!(o.status.success());
    let rows: Vec<Value> = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(rows.len() > 3);
    for r in rows {
        let dev: f64 = r["deviation"].as_str().unwrap().parse().unwrap();
        assert!(dev < 1e-4, "{r}");
    }
}

#[test]
fn multiplier_rejects_matrix_outside_the_group() {
    let o = run(&["multiplier", "--char", "kronecker:3", "--gamma", "1,0,2,1"]);
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn error_paths_have_distinct_codes() {
    assert_eq!(run(&["verify", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["expand", "eta-chi", "--prec", "4"]).status.code(), Some(2));
    assert_eq!(run(&["decompose", "--level", "9", "--series", "/nonexistent/x.json"]).status.code(), Some(3));
    assert_eq!(run(&["expand", "eta-chi", "--char", "kronecker:4"]).status.code(), Some(4));
    let bad = temp_file("bad.json", "{not json");
    assert_eq!(run(&["decompose", "--level", "9", "--series", bad.to_str().unwrap()]).status.code(), Some(4));
    assert_eq!(run(&["orders", "--char", "chi:5:4:2=1"]).status.code(), Some(5));
    let q = quotient_file("low.json", 9, &[(1, "kronecker:3", 12)]);
    let o = run(&["decompose", "--level", "9", "--quotient", q.to_str().unwrap(), "--prec", "5"]);
    assert_eq!(o.status.code(), Some(5));
    let help = stdout(&run(&["--help"]));
    for code in ["0  success", "1  decomposition", "2  usage", "3  input", "4  malformed", "5  precondition"] {
        assert!(help.contains(code), "{code}");
    }
}
