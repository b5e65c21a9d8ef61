use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_halfspace"));
    c.env_remove("HALFSPACE_WORKERS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn read_csv(p: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(p).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn col(rows: &[Vec<String>], i: usize) -> Vec<f64> {
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn simulate_asep_writes_cdf_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("asep.csv");
    let o = run(&[
        "simulate", "--model", "asep", "--q", "0.4", "--alpha", "0.5", "--beta", "0.2", "--tau", "20", "--samples", "20000",
        "--seed", "7", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = read_csv(&out);
    assert_eq!(h, ["s", "cdf", "stderr"]);
    let f = col(&rows, 1);
    assert!(f.windows(2).all(|w| w[1] >= w[0]));
    assert_eq!(*f.last().unwrap(), 1.0);
    // 17 significant digits
    assert!(rows[0][1].split('e').next().unwrap().len() >= 18);
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("asep.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["config"]["subcommand"], "simulate");
    assert_eq!(m["library_version"], "0.1.0");
    assert!(m["notes"][0].as_str().unwrap().contains("converted (alpha,beta)"));
}

#[test]
fn simulate_asep_accepts_t_nu() {
    let o = run(&["simulate", "--model", "asep", "--q", "0.3", "--t", "0.2", "--nu", "2", "--tau", "5", "--samples", "1000"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("converted (t,nu)"));
}

#[test]
fn missing_alpha_exits_2() {
    let o = run(&["simulate", "--model", "asep", "--q", "0.4", "--beta", "0.2", "--tau", "20"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["simulate", "--model", "asep", "--q", "0.4", "--alpha", "0.5", "--beta", "0.2", "--t", "0.1", "--nu", "2", "--tau", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_sixvertex_distribution() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sv.csv");
    let o = run(&[
        "simulate", "--model", "sixvertex", "--n", "64", "--a", "0.4", "--q", "0.3", "--t", "0.2", "--nu", "2", "--samples",
        "5000", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = read_csv(&out);
    assert_eq!(h, ["h", "count", "pmf", "cdf", "stderr"]);
    assert_eq!(rows.len(), 65);
    let counts: u64 = rows.iter().map(|r| r[1].parse::<u64>().unwrap()).sum();
    assert_eq!(counts, 5000);
    assert_eq!(*col(&rows, 3).last().unwrap(), 1.0);
}

#[test]
fn bad_model_params_exit_2() {
    assert_eq!(run(&["simulate", "--model", "sixvertex", "--n", "3", "--a", "0.4", "--q", "0.3", "--t", "0.6", "--nu", "2"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--model", "sixvertex", "--n", "3", "--a", "0.4,0.2", "--q", "0.3", "--t", "0.1", "--nu", "2"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--model", "lattice"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
}

#[test]
fn limit_table_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lim.csv");
    let o = run(&["limit", "--dist", "cross", "--xi", "1.0", "--s-min", "-5", "--s-max", "3", "--step", "0.25", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = read_csv(&out);
    assert_eq!(h, ["s", "F_cross(xi=1)"]);
    assert_eq!(rows.len(), 33);
    let f = col(&rows, 1);
    assert!(f.windows(2).all(|w| w[1] >= w[0]));
    let all = run(&["limit", "--s-min", "-2", "--s-max", "0", "--step", "1", "--xi", "0.5,2"]);
    assert!(all.status.success());
    let text = String::from_utf8_lossy(&all.stdout);
    assert!(text.starts_with("s,F_GSE,F_GOE,F_cross(xi=0.5),F_cross(xi=2)"));
    assert_eq!(run(&["limit", "--dist", "cross", "--xi", "0.5", "--delta", "0.7"]).status.code(), Some(2));
}

#[test]
fn pfaffian_cdf_and_regime_errors() {
    let base = ["pfaffian-cdf", "--model", "sixvertex", "--n", "2", "--a", "0.4", "--q", "0.3", "--t", "0.2", "--nu", "2", "--s-min", "-1", "--s-max", "2"];
    let o = run(&base);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8_lossy(&o.stdout).to_string();
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let vals: Vec<f64> = r.records().map(|x| x.unwrap()[1].parse().unwrap()).collect();
    assert_eq!(vals.len(), 4);
    assert!(vals.windows(2).all(|w| w[1] > w[0]));
    let mut mismatch = base.to_vec();
    mismatch.extend(["--regime", "gauss"]);
    assert_eq!(run(&mismatch).status.code(), Some(2));
    let mut pole = base.to_vec();
    pole.extend(["--r", "0.9"]);
    let o = run(&pole);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("pole"));
}

#[test]
fn pfaffian_cdf_asep() {
    let o = run(&["pfaffian-cdf", "--model", "asep", "--q", "0.3", "--t", "0.2", "--nu", "2", "--tau", "5", "--s-min", "-4", "--s-max", "0"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 6);
}

#[test]
fn verify_yangbaxter_passes() {
    let o = run(&["verify", "--suite", "yangbaxter"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rep: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rep["passed"], true);
    assert!(rep["checks"].as_array().unwrap().len() >= 9);
}

#[test]
fn verify_failure_exits_1_with_case() {
    // one sample has zero empirical variance
    let o = run(&["verify", "--suite", "asep", "--mc-samples", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("failed checks") && err.contains("\"threshold\""));
    assert_eq!(run(&["verify", "--suite", "nonsense"]).status.code(), Some(2));
}

#[test]
fn converge_writes_rows() {
    let o = run(&["converge", "--model", "sixvertex", "--nu", "2", "--sizes", "20,40"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8_lossy(&o.stdout).to_string();
    let mut r = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(r.headers().unwrap().iter().collect::<Vec<_>>(), ["n", "target", "centre", "scale", "points", "sup_distance"]);
    let rows: Vec<_> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[0][1], "GSE");
    assert_eq!(run(&["converge", "--model", "asep", "--nu", "2"]).status.code(), Some(2));
}

#[test]
fn config_round_trip_gives_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let o = run(&["simulate", "--model", "asep", "--q", "0.3", "--t", "0.2", "--nu", "1", "--tau", "8", "--samples", "3000", "--seed", "3", "--out", a.to_str().unwrap()]);
    assert!(o.status.success());
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.csv.manifest.json")).unwrap()).unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, serde_json::to_string(&m["config"]).unwrap()).unwrap();
    let b = dir.path().join("b.csv");
    let o = run(&["--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let m2: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("b.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["config"], m2["config"]);
    assert_eq!(run(&["--config", cfg.to_str().unwrap(), "verify"]).status.code(), Some(2));
    std::fs::write(&cfg, "{\"schema_version\": 99, \"subcommand\": \"verify\"}").unwrap();
    assert_eq!(run(&["--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn output_independent_of_worker_count() {
    let args = ["simulate", "--model", "asep", "--q", "0.3", "--t", "0.2", "--nu", "2", "--tau", "6", "--samples", "4000", "--seed", "9"];
    let one = bin().args(args).arg("--workers").arg("1").output().unwrap();
    let env = bin().args(args).env("HALFSPACE_WORKERS", "3").output().unwrap();
    assert!(one.status.success() && env.status.success());
    assert_eq!(one.stdout, env.stdout);
    assert_eq!(bin().args(args).env("HALFSPACE_WORKERS", "x").output().unwrap().status.code(), Some(2));
}
