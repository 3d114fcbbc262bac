//! End-to-end runs of the `minima-forge` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use minima_forge::rational::{parse_rational, rat, Rational};
use minima_forge_cli::config::{Experiment, ExperimentConfig};
use minima_forge_cli::document::TemplateDocument;
use minima_forge_cli::table::Table;
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_minima-forge"));
    c.env_remove("MINIMA_FORGE_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn build(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let p = path(dir, name);
    let mut full = vec!["build"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", s(&p)]);
    let out = run(&full);
    assert_eq!(code(&out), 0, "build {args:?}: {}", stderr(&out));
    p
}

fn rate_rows(out: &Output) -> Vec<(Rational, Rational)> {
    let table = Table::from_csv(&stdout(out)).unwrap();
    table
        .rows
        .iter()
        .map(|r| {
            let t = parse_rational(&r[0]).unwrap();
            let d = parse_rational(&format!("{}/{}", r[1], r[2])).unwrap();
            (t, d)
        })
        .collect()
}

#[test]
fn validate_zero_template() {
    let dir = TempDir::new().unwrap();
    let p = build(&dir, "zero.json", &["zero", "--m", "2", "--n", "3"]);
    let out = run(&["validate", s(&p)]);
    assert_eq!(code(&out), 0);
    let last: Value = serde_json::from_str(stdout(&out).lines().last().unwrap()).unwrap();
    assert_eq!(last["valid"], true);
}

#[test]
fn validate_reports_slope_violation() {
    let dir = TempDir::new().unwrap();
    let p = build(&dir, "zero.json", &["zero", "--m", "2", "--n", "3"]);
    let mut doc = TemplateDocument::from_json(&std::fs::read_to_string(&p).unwrap()).unwrap();
    // Slope 1/m + 1 on the first component.
    doc.slopes[0][0] = "3/2".into();
    let bad = path(&dir, "bad.json");
    std::fs::write(&bad, doc.to_json()).unwrap();
    let out = run(&["validate", s(&bad)]);
    assert_eq!(code(&out), 1);
    let lines: Vec<Value> = stdout(&out).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(lines.iter().any(|v| v["axiom"] == "II"), "{lines:?}");
    assert_eq!(lines.last().unwrap()["valid"], false);
}

#[test]
fn validate_pulse_round_trip() {
    let dir = TempDir::new().unwrap();
    let p = build(&dir, "pulse.json", &["pulse", "--m", "3", "--n", "2", "--r", "3", "--k-max", "3"]);
    assert_eq!(code(&run(&["validate", s(&p)])), 0);
    let doc = TemplateDocument::from_json(&std::fs::read_to_string(&p).unwrap()).unwrap();
    let meta = doc.metadata.as_ref().unwrap();
    assert!(meta.version.as_deref().unwrap().starts_with("minima-forge "));
    assert!(matches!(meta.config.as_ref().unwrap().experiment, Experiment::PulseBuild(_)));
    assert_eq!(TemplateDocument::from_json(&doc.to_json()).unwrap(), doc);
}

#[test]
fn validate_error_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run(&["validate", s(&path(&dir, "missing.json"))])), 3);
    let broken = path(&dir, "broken.json");
    std::fs::write(&broken, "{\"m\": 1").unwrap();
    assert_eq!(code(&run(&["validate", s(&broken)])), 2);
    let bad_rat = path(&dir, "rat.json");
    std::fs::write(
        &bad_rat,
        r#"{"m":1,"n":1,"start":"0/1","breakpoints":[],"initial_values":["0","x"],"slopes":[["0","0"]]}"#,
    )
    .unwrap();
    assert_eq!(code(&run(&["validate", s(&bad_rat)])), 2);
}

#[test]
fn rate_zero_template() {
    let dir = TempDir::new().unwrap();
    let p = build(&dir, "zero.json", &["zero", "--m", "2", "--n", "3"]);
    let out = run(&["rate", s(&p), "--at", "7"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("T,delta_avg_num,delta_avg_den\n7/1,6,1\n"));
}

#[test]
fn rate_quadrilateral_period() {
    let dir = TempDir::new().unwrap();
    let p = build(&dir, "quad.json", &["quad", "--m", "2", "--n", "3", "--r", "2", "--scale", "5"]);
    let rows = rate_rows(&run(&["rate", s(&p), "--at", "5"]));
    assert_eq!(rows, vec![(rat(5, 1), rat(18, 5))]);
    let rows = rate_rows(&run(&["rate", s(&p)]));
    assert_eq!(rows.last().unwrap(), &(rat(5, 1), rat(18, 5)));
}

#[test]
fn rate_pulse_telescoping_bound() {
    let dir = TempDir::new().unwrap();
    let p = build(&dir, "pulse.json", &["pulse", "--m", "1", "--n", "1", "--r", "1", "--k-max", "4"]);
    let rows = rate_rows(&run(&["rate", s(&p), "--at", "252"]));
    assert!(rows[0].1 >= rat(246, 252), "{:?}", rows[0]);
}

#[test]
fn rate_bounds_and_round_trip() {
    let dir = TempDir::new().unwrap();
    let p = build(&dir, "quad.json", &["quad", "--m", "2", "--n", "3", "--r", "1", "--periods", "4"]);
    let csv = path(&dir, "rate.csv");
    let out = run(&["rate", s(&p), "--bounds", "4", "--out", s(&csv)]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let table = Table::from_csv(&text).unwrap();
    assert_eq!(table.to_csv(), text);
    let (tag, bounds) = &table.trailers[0];
    assert_eq!(tag, "bounds");
    let lower = parse_rational(bounds["lower"].as_str().unwrap()).unwrap();
    let upper = parse_rational(bounds["upper"].as_str().unwrap()).unwrap();
    assert!(lower <= upper);
    let Experiment::TemplateRate(params) = &table.config.experiment else { panic!("kind") };
    assert_eq!(params.bounds.as_deref(), Some("4"));
}

#[test]
fn rate_json_embeds_config() {
    let dir = TempDir::new().unwrap();
    let p = build(&dir, "zero.json", &["zero", "--m", "1", "--n", "2"]);
    let out = run(&["rate", s(&p), "--at", "1,3/2", "--format", "json"]);
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["rows"][1]["delta"], "2/1");
    let cfg: ExperimentConfig = serde_json::from_value(doc["config"].clone()).unwrap();
    assert!(matches!(cfg.experiment, Experiment::TemplateRate(_)));
    assert!(doc["version"].as_str().unwrap().starts_with("minima-forge "));
}

#[test]
fn build_feasibility() {
    let out = run(&["build", "pulse", "--m", "2", "--n", "2", "--r", "3"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("r = 3 > max(m, n) = 2"), "{}", stderr(&out));
    let out = run(&["build", "quad", "--m", "2", "--n", "3", "--r", "3"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("r > min(m,n)"), "{}", stderr(&out));
    assert_eq!(code(&run(&["build", "pulse", "--m", "2", "--r", "1"])), 2);
    assert_eq!(code(&run(&["build", "pulse", "--m", "2", "--n", "2", "--r", "1", "--tau1", "x"])), 2);
}

#[test]
fn build_reflect_is_involutive() {
    let dir = TempDir::new().unwrap();
    let p = build(&dir, "pulse.json", &["pulse", "--m", "3", "--n", "1", "--r", "2", "--k-max", "2"]);
    let once = build(&dir, "once.json", &["reflect", "--input", s(&p)]);
    let twice = build(&dir, "twice.json", &["reflect", "--input", s(&once)]);
    let load = |p: &Path| TemplateDocument::from_json(&std::fs::read_to_string(p).unwrap()).unwrap();
    let (a, b, c) = (load(&p), load(&once), load(&twice));
    assert_eq!((b.m, b.n), (1, 3));
    assert_eq!(a.path().unwrap(), c.path().unwrap());
}

#[test]
fn flow_rows_are_monotone() {
    let out = run(&["flow", "--m", "1", "--n", "2", "--a", r#"[["1","2"]]"#, "--u-grid", "1:3/2:6", "--orders", "1,2,3"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let table = Table::from_csv(&stdout(&out)).unwrap();
    assert_eq!(table.rows.len(), 6);
    let cols: Vec<Vec<Rational>> = (1..=3)
        .map(|j| {
            table.column(&format!("lambda{j}_sq")).unwrap().iter().map(|x| parse_rational(x).unwrap()).collect()
        })
        .collect();
    for ((a, b), c) in cols[0].iter().zip(&cols[1]).zip(&cols[2]) {
        assert!(a <= b && b <= c);
    }
    assert_eq!(table.trailers.iter().filter(|(t, _)| t == "verdict").count(), 3);
    for h in ["u", "t", "lambda1", "h1", "h3"] {
        assert!(table.header.iter().any(|x| x == h), "{h}");
    }
}

#[test]
fn flow_fibonacci_is_ba_like_with_horizon() {
    let out = run(&["flow", "--m", "1", "--n", "1", "--a", "fib:12", "--u-grid", "1:2:7", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let v = &doc["verdicts"][0];
    assert_eq!(v["kind"], "BA-like");
    assert!(v["horizon_note"].as_str().unwrap().contains("u <= 72/1"));
    assert_eq!(doc["trace"]["samples"].as_array().unwrap().len(), 7);
}

#[test]
fn flow_dual_product_in_range() {
    let out = run(&["flow", "--m", "1", "--n", "1", "--a", r#"[["3/7"]]"#, "--u-grid", "1:2:8", "--dual"]);
    assert_eq!(code(&out), 0);
    let table = Table::from_csv(&stdout(&out)).unwrap();
    for x in table.column("dual1_product_sq").unwrap() {
        let v = parse_rational(x).unwrap();
        assert!(v >= rat(1, 1) && v <= rat(4, 1), "{x}");
    }
    for x in table.column("dual1_product").unwrap() {
        let v: f64 = x.parse().unwrap();
        assert!((1.0..=2.0).contains(&v));
    }
}

#[test]
fn flow_float_mode_columns() {
    let out = run(&["flow", "--m", "1", "--n", "1", "--a", "[[1.4142135623730951]]", "--u-grid", "1:2:4"]);
    assert_eq!(code(&out), 0);
    let table = Table::from_csv(&stdout(&out)).unwrap();
    assert!(table.header.iter().any(|h| h == "lambda1_f64"));
    assert!(table.header.iter().any(|h| h == "err1"));
    assert!(!table.header.iter().any(|h| h.ends_with("_sq")));
}

#[test]
fn flow_cross_check_and_file_output() {
    let dir = TempDir::new().unwrap();
    let a = path(&dir, "a.json");
    std::fs::write(&a, r#"[["2/7"]]"#).unwrap();
    let out_path = path(&dir, "trace.csv");
    let spec = format!("@{}", s(&a));
    let out = run(&["flow", "--m", "1", "--n", "1", "--a", &spec, "--u-grid", "1:2:6", "--norm", "linf",
        "--cross-check", "30", "--out", s(&out_path)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).starts_with("order 1: "));
    let table = Table::from_csv(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let (_, report) = table.trailers.iter().find(|(t, _)| t == "cross-check").unwrap();
    assert_eq!(report["pass"], true);
    let Experiment::FlowTrace(p) = &table.config.experiment else { panic!("kind") };
    assert_eq!(p.a_resolved, vec![vec!["2/7".to_string()]]);
}

#[test]
fn flow_is_deterministic_across_thread_counts() {
    let args = ["flow", "--m", "2", "--n", "1", "--a", "rand:11", "--u-grid", "1:2:5", "--orders", "1,3", "--dual"];
    let base = run(&args);
    let single = bin().args(args).env("MINIMA_FORGE_THREADS", "1").output().unwrap();
    assert_eq!(code(&base), 0);
    assert_eq!(base.stdout, single.stdout);
    let bad = bin().args(args).env("MINIMA_FORGE_THREADS", "zero").output().unwrap();
    assert_eq!(code(&bad), 2);
}

#[test]
fn flow_input_errors() {
    assert_eq!(code(&run(&["flow", "--m", "1", "--n", "1", "--a", "[[1]]", "--u-grid", "1:1:4"])), 2);
    assert_eq!(code(&run(&["flow", "--m", "1", "--n", "2", "--a", "[[1]]"])), 2);
    assert_eq!(code(&run(&["flow", "--m", "1", "--n", "1", "--a", "fib:x"])), 2);
    assert_eq!(code(&run(&["flow", "--m", "1", "--n", "1", "--a", "@/no/such/file"])), 3);
    assert_eq!(code(&run(&["flow", "--m", "1", "--n", "1", "--a", "[[1]]", "--out", "/no/such/dir/t.csv"])), 3);
    assert_eq!(code(&run(&["flow", "--m", "1", "--n", "1", "--a", "[[1.5]]", "--dual"])), 1);
}

#[test]
fn scan_reports_tuple() {
    let out = run(&["scan", "--m", "1", "--n", "1", "--a", r#"[["1/2"]]"#, "--q-max", "10"]);
    assert_eq!(code(&out), 0);
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["scan"]["c_hat_pow_m_exact"], "0/1");
    assert_eq!(doc["config"]["kind"], "ba-scan");
}

#[test]
fn dual_and_minkowski_checks() {
    let out = run(&["dual-check", "--m", "1", "--n", "2", "--a", "rand:4", "--u", "2"]);
    assert_eq!(code(&out), 0);
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["flow_identity"]["pass"], true);
    assert_eq!(doc["products_within"], true);
    let out = run(&["dual-check", "--basis", r#"[["3",0],[0,"1/3"]]"#]);
    assert_eq!(code(&out), 0);
    for norm in ["l2", "linf"] {
        let out = run(&["mink-check", "--basis", r#"[["2",1],[0,"1/2"]]"#, "--norm", norm]);
        assert_eq!(code(&out), 0, "{norm}");
        let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
        assert_eq!(doc["pass"], true);
    }
    assert_eq!(code(&run(&["mink-check", "--m", "1", "--n", "1", "--a", "[[0]]"])), 2);
    assert_eq!(code(&run(&["mink-check", "--basis", "[[1, 2], [2, 4]]"])), 1);
}

#[test]
fn selftest_subset_is_deterministic() {
    let a = run(&["selftest", "--only", "1,2,3,7"]);
    let b = run(&["selftest", "--only", "1,2,3,7"]);
    assert_eq!(code(&a), 0, "{}", stdout(&a));
    assert_eq!(a.stdout, b.stdout);
    assert!(stderr(&a).contains("criterion 1:"));
    assert!(stdout(&a).lines().last().unwrap().starts_with("selftest: PASS"));
}

#[test]
fn selftest_catches_mutation() {
    let out = run(&["selftest", "--only", "4", "--inject", "pulse"]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("[FAIL] 4 "), "{text}");
    assert!(text.contains("selftest: FAIL in 4"), "{text}");
    assert_eq!(code(&run(&["selftest", "--inject", "nothing"])), 2);
}

#[test]
fn selftest_full_suite_passes() {
    let out = run(&["selftest"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let main_lines = stdout(&out).lines().filter(|l| l.starts_with("[PASS] ")).count();
    assert!(main_lines >= 10);
}
