use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn hublf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hublf"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn generate(dir: &TempDir, name: &str, extra: &[&str]) -> PathBuf {
    let out = dir.path().join(name);
    let mut args = vec!["generate", "--out", p(&out)];
    args.extend_from_slice(extra);
    let res = hublf(&args);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    out
}

fn solve(inst: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["solve", "--instance", p(inst), "--out", p(out)];
    args.extend_from_slice(extra);
    hublf(&args)
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn generate_is_deterministic_and_uniform() {
    let dir = TempDir::new().unwrap();
    let a = generate(&dir, "a.txt", &["--n", "10", "--scenario", "sp", "--rho", "0.1", "--seed", "4"]);
    let b = generate(&dir, "b.txt", &["--n", "10", "--scenario", "sp", "--rho", "0.1", "--seed", "4"]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let inst = hublf::instance::load_instance(&a).unwrap();
    assert_eq!(inst.distinct_probabilities(1e-12), vec![0.1]);
}

#[test]
fn clustered_probabilities_come_from_three_values() {
    let dir = TempDir::new().unwrap();
    let a = generate(&dir, "cp.txt", &["--n", "10", "--scenario", "cp"]);
    let inst = hublf::instance::load_instance(&a).unwrap();
    for v in inst.distinct_probabilities(1e-12) {
        assert!([0.1, 0.2, 0.3].contains(&v), "{v}");
    }
}

#[test]
fn bad_flags_are_usage_errors() {
    let res = hublf(&["generate", "--n", "five", "--out", "x"]);
    assert_eq!(res.status.code(), Some(2));
    let res = hublf(&["report", "--out", "x.csv"]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn solve_m0_matches_oracle() {
    let dir = TempDir::new().unwrap();
    let inst_path = generate(&dir, "i.txt", &["--n", "4", "--commodities", "8", "--seed", "3"]);
    let out = dir.path().join("m0.json");
    let res = solve(&inst_path, &out, &["--model", "m0"]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let inst = hublf::instance::load_instance(&inst_path).unwrap();
    let sol = hublf::formulations::DesignSolution::load(&out).unwrap();
    let (oracle, _) = hublf::oracle::oracle_m0(&inst).unwrap();
    assert!((sol.objective() - oracle).abs() < 1e-6);
}

#[test]
fn solve_m2_passes_audit_and_reports_infeasible_lambda() {
    let dir = TempDir::new().unwrap();
    let inst_path = generate(&dir, "i.txt", &["--n", "5", "--commodities", "8"]);
    let out = dir.path().join("m2.json");
    let res = solve(&inst_path, &out, &["--model", "m2", "--lambda", "2", "--beta", "1"]);
    assert_eq!(res.status.code(), Some(0));
    let sol = hublf::formulations::DesignSolution::load(&out).unwrap();
    assert!(hublf::analysis::lambda_audit(5, &sol, 2).is_empty());

    let res = solve(&inst_path, &dir.path().join("bad.json"), &["--model", "m2", "--lambda", "6"]);
    assert_eq!(res.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&res.stderr).contains("infeasible"));
}

#[test]
fn clustered_model_refuses_many_probabilities() {
    let dir = TempDir::new().unwrap();
    let inst_path = generate(&dir, "rp.txt", &["--n", "8", "--scenario", "rp", "--rho", "0.3", "--commodities", "4"]);
    let res = solve(&inst_path, &dir.path().join("c.json"), &["--model", "m1c"]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("distinct values"));
}

#[test]
fn node_limit_is_reported_as_limit() {
    let dir = TempDir::new().unwrap();
    let inst_path = generate(&dir, "i.txt", &["--n", "6", "--commodities", "12"]);
    let res = solve(&inst_path, &dir.path().join("s.json"), &["--model", "m1", "--node-limit", "1"]);
    assert!(matches!(res.status.code(), Some(0) | Some(3)));
}

#[test]
fn zero_probability_simulation_always_routes() {
    let dir = TempDir::new().unwrap();
    let inst_path = generate(&dir, "i.txt", &["--n", "5", "--rho", "0", "--commodities", "6"]);
    let sol = dir.path().join("m0.json");
    assert!(solve(&inst_path, &sol, &["--model", "m0"]).status.success());
    let csv = dir.path().join("sim.csv");
    let res = hublf(&[
        "simulate", "--instance", p(&inst_path), "--solutions", p(&sol), "--trials", "200", "--out", p(&csv),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let rows = csv_rows(&csv);
    assert_eq!(rows[0][3], "tau_f");
    assert_eq!(rows.len(), 1 + 4 * 21);
    assert!(rows[1..].iter().all(|r| r[3] == "1"));
}

#[test]
fn single_trial_simulation_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let inst_path = generate(&dir, "i.txt", &["--n", "5", "--rho", "0.4", "--commodities", "6"]);
    let sol = dir.path().join("m0.json");
    assert!(solve(&inst_path, &sol, &["--model", "m0"]).status.success());
    let run = |name: &str| {
        let csv = dir.path().join(name);
        let res = hublf(&[
            "simulate", "--instance", p(&inst_path), "--solutions", p(&sol), "--trials", "1", "--seed", "9",
            "--scenarios", "fs1", "--q-grid", "0,0.5", "--out", p(&csv),
        ]);
        assert!(res.status.success());
        fs::read_to_string(csv).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn simulation_rejects_foreign_solution() {
    let dir = TempDir::new().unwrap();
    let a = generate(&dir, "a.txt", &["--n", "4", "--seed", "1", "--commodities", "4"]);
    let b = generate(&dir, "b.txt", &["--n", "4", "--seed", "2", "--commodities", "4"]);
    let sol = dir.path().join("a.json");
    assert!(solve(&a, &sol, &["--model", "m0"]).status.success());
    let res = hublf(&["simulate", "--instance", p(&b), "--solutions", p(&sol), "--out", p(&dir.path().join("x.csv"))]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("mismatch"));
}

#[test]
fn pipeline_report_has_one_row_per_model() {
    let dir = TempDir::new().unwrap();
    let inst_path = generate(&dir, "i.txt", &["--n", "5", "--rho", "0.2", "--commodities", "6"]);
    let runs: [(&str, &[&str]); 5] = [
        ("m0", &["--model", "m0"]),
        ("m1", &["--model", "m1"]),
        ("m2_2", &["--model", "m2", "--lambda", "2", "--beta", "1"]),
        ("m2_3", &["--model", "m2", "--lambda", "3", "--beta", "1"]),
        ("m2_4", &["--model", "m2", "--lambda", "4", "--beta", "1"]),
    ];
    let mut files = Vec::new();
    for (name, flags) in runs {
        let out = dir.path().join(format!("{name}.json"));
        let res = solve(&inst_path, &out, flags);
        assert_eq!(res.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&res.stderr));
        files.push(out);
    }
    let csv = dir.path().join("report.csv");
    let mut args = vec!["report", "--out", p(&csv), "--solutions"];
    args.extend(files.iter().map(|f| p(f)));
    assert!(hublf(&args).status.success());
    let rows = csv_rows(&csv);
    assert_eq!(rows.len(), 6);
    let header = &rows[0];
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    assert_eq!(rows[1][col("model")], "M0");
    assert_eq!(rows[1][col("price_of_robustness")].parse::<f64>().unwrap(), 0.0);
    let hubs: Vec<usize> = rows[3..].iter().map(|r| r[col("hubs")].parse().unwrap()).collect();
    assert!(hubs.windows(2).all(|w| w[0] <= w[1]), "{hubs:?}");
    for (lambda, h) in (2..=4).zip(&hubs) {
        assert!(*h >= lambda);
    }
}
