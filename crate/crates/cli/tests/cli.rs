use std::path::Path;
use std::process::Command;

use difit_cli::{round_sig, run_with_env};
use difit_core::{fit_weibull, Dist, Family, RngStream, WeibullMethod};
use serde_json::Value;

fn difit(args: &[&str]) -> (i32, String, String) {
    difit_env(args, None)
}

fn difit_env(args: &[&str], seed: Option<&str>) -> (i32, String, String) {
    let argv = std::iter::once("difit").chain(args.iter().copied());
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_with_env(argv, seed, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap_or_else(|e| panic!("{e}: {s}"))
}

/// Tree table in the default layout: plot id in column 1, dbh in 10, height in 11.
fn write_trees(path: &Path, plot: i64, dbh: &[f64]) {
    let mut s = String::from("plot,a,b,c,d,e,f,g,h,dbh,height\n");
    for (i, d) in dbh.iter().enumerate() {
        s.push_str(&format!("{plot},0,0,0,0,0,0,0,{i},{d},{}\n", 1.3 + d * 0.6));
        s.push_str(&format!("{},0,0,0,0,0,0,0,{i},99,99\n", plot + 1));
    }
    std::fs::write(path, s).unwrap();
}

const BS3: &str = "0.4,0.3,0.3,0.1,0.25,0.5,8,5,2";

#[test]
fn simulate_is_reproducible_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = ["a.csv", "b.csv", "c.csv"].iter().map(|f| dir.path().join(f)).collect();
    for (p, seed) in paths.iter().zip(["7", "7", "8"]) {
        let (code, out, err) = difit(&[
            "simulate", "--family", "birnbaum-saunders", "--k", "3", "--params", BS3, "--n", "500", "--seed", seed,
            "--out", p.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{err}");
        assert_eq!(json(&out)["seed"], seed.parse::<u64>().unwrap());
    }
    let read = |p: &Path| std::fs::read_to_string(p).unwrap();
    assert_eq!(read(&paths[0]), read(&paths[1]));
    assert_ne!(read(&paths[0]), read(&paths[2]));
    assert_eq!(read(&paths[0]).lines().count(), 501);
}

#[test]
fn simulate_to_stdout_matches_library_draws() {
    let (code, out, _) = difit(&["simulate", "--family", "weibull", "--params", "2,20,5", "--n", "4", "--seed", "3"]);
    assert_eq!(code, 0);
    let want = Dist::new(Family::Weibull, &[2.0, 20.0, 5.0]).unwrap().sample(4, &mut RngStream::new(3)).unwrap();
    let got: Vec<f64> = out.lines().skip(1).map(|l| l.parse().unwrap()).collect();
    assert_eq!(got, want);
}

#[test]
fn seed_falls_back_to_environment() {
    let args = ["mixture", "sample", "--family", "gamma", "--k", "1", "--params", "1,2,3", "--n", "5"];
    let (_, from_env, _) = difit_env(&args, Some("42"));
    let mut with_flag = args.to_vec();
    with_flag.extend(["--seed", "42"]);
    let (_, from_flag, _) = difit_env(&with_flag, Some("9"));
    assert_eq!(json(&from_env)["sample"], json(&from_flag)["sample"]);
    assert_eq!(json(&from_env)["seed"], 42);
    let (_, default, _) = difit_env(&args, None);
    assert_eq!(json(&default)["seed"], difit_cli::DEFAULT_SEED);
    let (code, _, err) = difit_env(&args, Some("abc"));
    assert_eq!(code, 2);
    assert!(err.contains("DIFIT_SEED"));
}

#[test]
fn mixture_pdf_at_origin() {
    // Weibull(shape 1, scale 2, location 0) has density 1/2 at 0
    let (code, out, err) = difit(&["mixture", "pdf", "--family", "weibull", "--k", "1", "--params", "1,1,2,0", "--x", "0"]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(json(&out)["pdf"][0], 0.5);
}

#[test]
fn mixture_quantile_inverts_cdf() {
    let common = ["--family", "birnbaum-saunders", "--k", "3", "--params", BS3];
    let mut q = vec!["mixture", "quantile"];
    q.extend(common);
    q.extend(["--x", "0.1,0.5,0.9"]);
    let (code, out, _) = difit(&q);
    assert_eq!(code, 0);
    let xs: Vec<String> = json(&out)["quantile"].as_array().unwrap().iter().map(|v| v.to_string()).collect();
    let mut c = vec!["mixture", "cdf"];
    c.extend(common);
    let joined = xs.join(",");
    c.extend(["--x", &joined]);
    let (_, out, _) = difit(&c);
    for (p, got) in [0.1, 0.5, 0.9].iter().zip(json(&out)["cdf"].as_array().unwrap()) {
        assert!((got.as_f64().unwrap() - p).abs() < 1e-8);
    }
}

#[test]
fn gsm_log_and_upper_tail() {
    let base = ["gsm", "cdf", "--omega", "0.3,0.7", "--beta", "2", "--x", "1.5"];
    let (_, lower, _) = difit(&base);
    let mut up = base.to_vec();
    up.push("--upper");
    let (_, upper, _) = difit(&up);
    let l = json(&lower)["cdf"][0].as_f64().unwrap();
    let u = json(&upper)["cdf"][0].as_f64().unwrap();
    assert!((l + u - 1.0).abs() < 1e-9);
    let (_, logpdf, _) = difit(&["gsm", "pdf", "--omega", "0.3,0.7", "--beta", "2", "--x", "1.5", "--log"]);
    let (_, pdf, _) = difit(&["gsm", "pdf", "--omega", "0.3,0.7", "--beta", "2", "--x", "1.5"]);
    let lp = json(&logpdf)["pdf"][0].as_f64().unwrap();
    let p = json(&pdf)["pdf"][0].as_f64().unwrap();
    assert!((lp.exp() - p).abs() < 1e-9 * p);
}

#[test]
fn tabulate_single_point() {
    let (code, out, err) = difit(&["tabulate", "--family", "weibull", "--params", "1,2,0", "--min", "0", "--max", "0", "--points", "1"]);
    assert_eq!(code, 0, "{err}");
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines, ["x,density", "0,0.5"]);
}

#[test]
fn tabulated_mixture_integrates_to_one() {
    let (code, out, _) = difit(&[
        "tabulate", "--family", "birnbaum-saunders", "--k", "3", "--params", BS3, "--min", "0.01", "--max", "60",
        "--points", "20001",
    ]);
    assert_eq!(code, 0);
    let rows: Vec<(f64, f64)> = out
        .lines()
        .skip(1)
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    let area: f64 = rows.windows(2).map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0).sum();
    assert!((area - 1.0).abs() < 1e-3, "{area}");
}

#[test]
fn usage_errors_exit_two() {
    let (code, _, err) = difit(&["fit-weibull", "--no-such-flag"]);
    assert_eq!(code, 2);
    assert!(!err.is_empty());
    let (code, _, _) = difit(&["mixture", "pdf", "--family", "weibull", "--params", "1,2,0"]);
    assert_eq!(code, 2, "--x missing");
    let (code, out, _) = difit(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("fit-mixture"));
}

#[test]
fn numeric_failure_exits_one_with_payload() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("flat.csv");
    std::fs::write(&p, "x\n3\n3\n3\n3\n").unwrap();
    let (code, out, _) = difit(&["fit-weibull", "--data", p.to_str().unwrap()]);
    assert_eq!(code, 1);
    let v = json(&out);
    assert_eq!(v["command"], "fit-weibull");
    assert_eq!(v["error"]["kind"], "degenerate-sample");
    let (code, out, _) = difit(&["mixture", "pdf", "--family", "gamma", "--k", "2", "--params", "0.5,0.5,1", "--x", "1"]);
    assert_eq!(code, 1);
    assert_eq!(json(&out)["error"]["kind"], "param-count");
}

#[test]
fn fit_weibull_reports_library_estimates() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("trees.csv");
    let x = Dist::new(Family::Weibull, &[2.5, 15.0, 4.0]).unwrap().sample(60, &mut RngStream::new(11)).unwrap();
    write_trees(&p, 3, &x);
    let (code, out, err) = difit(&["fit-weibull", "--data", p.to_str().unwrap(), "--plot", "3", "--three-param", "--method", "mps"]);
    assert_eq!(code, 0, "{err}");
    let v = json(&out);
    let want = fit_weibull(&x, true, WeibullMethod::Mps, None).unwrap();
    for (name, w) in ["alpha", "beta", "mu"].iter().zip(want.estimate) {
        assert_eq!(v["estimate"][name].as_f64().unwrap(), round_sig(w), "{name}");
    }
    assert_eq!(v["input"]["n"], 60);
    assert_eq!(v["measures"]["log_likelihood"].as_f64().unwrap(), round_sig(want.measures.log_likelihood));
}

#[test]
fn fitted_report_can_be_tabulated() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("x.csv");
    let x = Dist::new(Family::Weibull, &[2.0, 10.0, 0.0]).unwrap().sample(200, &mut RngStream::new(5)).unwrap();
    let body: String = std::iter::once("x".to_string()).chain(x.iter().map(f64::to_string)).collect::<Vec<_>>().join("\n");
    std::fs::write(&data, body).unwrap();
    let (code, out, _) = difit(&["fit-mixture", "--data", data.to_str().unwrap(), "--family", "weibull", "--k", "2"]);
    assert_eq!(code, 0);
    let report = dir.path().join("fit.json");
    std::fs::write(&report, &out).unwrap();
    let (code, table, err) = difit(&["tabulate", "--fit", report.to_str().unwrap(), "--min", "1", "--max", "5", "--points", "3"]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(table.lines().count(), 4);
}

#[test]
fn bayes_reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("trees.csv");
    let x = Dist::new(Family::Weibull, &[2.0, 20.0, 5.0]).unwrap().sample(40, &mut RngStream::new(1)).unwrap();
    write_trees(&p, 1, &x);
    let args = ["fit-bayes-weibull", "--data", p.to_str().unwrap(), "--plot", "1", "--n-simul", "600", "--n-burn", "300", "--seed", "5"];
    let (code, a, err) = difit(&args);
    assert_eq!(code, 0, "{err}");
    let (_, b, _) = difit(&args);
    assert_eq!(a, b);
    assert_eq!(json(&a)["seed"], 5);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_difit");
    let ok = Command::new(bin).args(["mixture", "cdf", "--family", "gamma", "--k", "1", "--params", "1,2,1", "--x", "1"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let bad = Command::new(bin).arg("nonsense").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
