//! Command-line front-end: simulations, Pfaffian cdfs, limit tables, verification suites and
//! convergence studies, written as CSV/JSON with a run manifest.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use halfspace::asep::{mc_cdf, nu_inverse_from_rates, rates_from_params};
use halfspace::lattice::sample_heights;
use halfspace::limits::{limit_table, LimitFamily, LimitKernelSpec};
use halfspace::pfaffian::kernel::cdf_table_checked;
use halfspace::pfaffian::{KernelParams, Radii, Regime};
use halfspace::study::sixvertex_convergence;
use halfspace::verify::{run_suite, Suite, VerifyOptions};
use halfspace::ModelParams;

const SCHEMA_VERSION: u32 = 1;
const WORKERS_ENV: &str = "HALFSPACE_WORKERS";

#[derive(Parser, Debug)]
#[command(name = "halfspace", version, about = "Half-space six-vertex model and ASEP: simulation, Pfaffian formulas, limit laws")]
struct Cli {
    /// JSON run configuration; replaces the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (stdout if absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Manifest file (defaults to <out>.manifest.json, or stderr when writing to stdout).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Worker threads (default: $HALFSPACE_WORKERS, else all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Option<Command>,
}

/// A resolved run: serialized into manifests and accepted by --config.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(flatten)]
    pub command: Command,
}

#[derive(Subcommand, Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Monte Carlo samples of ASEP currents or six-vertex heights.
    Simulate(SimulateArgs),
    /// Fredholm Pfaffian cdf of the shifted height or current.
    PfaffianCdf(PfaffianArgs),
    /// Table of F_GSE, F_GOE and F_cross.
    Limit(LimitArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Sup-distance of rescaled six-vertex Pfaffian cdfs to the limit law.
    Converge(ConvergeArgs),
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, PartialEq, Default)]
pub struct ModelArgs {
    /// asep or sixvertex
    #[arg(long, default_value = "sixvertex")]
    pub model: String,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    /// ASEP injection rate.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// ASEP ejection rate.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub zeta: f64,
    /// Rapidities: one value (with --n) or a comma-separated list.
    #[arg(long, value_delimiter = ',')]
    pub a: Vec<f64>,
    /// Number of rows.
    #[arg(long)]
    pub n: Option<usize>,
    /// ASEP time τ; the current is N(τ/(1−q)).
    #[arg(long)]
    pub tau: Option<f64>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct PfaffianArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub s_min: i64,
    #[arg(long, allow_hyphen_values = true)]
    pub s_max: i64,
    /// Expected regime (base, goe, gauss); a mismatch with ν is an error.
    #[arg(long)]
    pub regime: Option<String>,
    /// Trapezoid nodes per contour.
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub r_prime: Option<f64>,
    #[arg(long)]
    pub r_b: Option<f64>,
    /// Window convergence tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct LimitArgs {
    /// gse, goe, cross or all
    #[arg(long, default_value = "all")]
    pub dist: String,
    /// Crossover parameters.
    #[arg(long, value_delimiter = ',', default_value = "1.0")]
    pub xi: Vec<f64>,
    #[arg(long, default_value_t = -6.0, allow_hyphen_values = true)]
    pub s_min: f64,
    #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
    pub s_max: f64,
    #[arg(long, default_value_t = 0.25)]
    pub step: f64,
    /// Ray vertex δ override.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Initial Nyström nodes.
    #[arg(long)]
    pub nystrom_nodes: Option<usize>,
    /// Truncation length L.
    #[arg(long)]
    pub length: Option<f64>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct VerifyArgs {
    /// special, symfunc, measures, lattice, yangbaxter, asep, pfaffian, limits or all
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub mc_samples: u64,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct ConvergeArgs {
    /// Only sixvertex is supported.
    #[arg(long, default_value = "sixvertex")]
    pub model: String,
    #[arg(long)]
    pub nu: f64,
    #[arg(long, default_value_t = 0.5)]
    pub a: f64,
    #[arg(long, default_value_t = 0.3)]
    pub q: f64,
    #[arg(long, default_value_t = 0.2)]
    pub t: f64,
    #[arg(long, default_value_t = 0.5)]
    pub zeta: f64,
    #[arg(long, value_delimiter = ',', default_value = "100,200,400")]
    pub sizes: Vec<usize>,
}

/// Failure classes and their exit codes.
#[derive(Debug)]
enum Failure {
    /// Invalid input or regime mismatch: exit 2.
    Input(String),
    /// Failed invariant or numerical failure: exit 1.
    Check(String),
}

impl From<halfspace::Error> for Failure {
    fn from(e: halfspace::Error) -> Self {
        use halfspace::Error::*;
        match e {
            InvalidParam(_) | Regime(_) | Pole(_) | Dimension(_) | TooLarge(_) => Failure::Input(e.to_string()),
            Convergence(_) | NonFinite(_) => Failure::Check(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Check(format!("i/o: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Check(format!("csv: {e}"))
    }
}

fn input(msg: impl Into<String>) -> Failure {
    Failure::Input(msg.into())
}

/// 17 significant digits.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Rows and metadata of a finished run.
struct Output {
    kind: &'static str,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    /// Replaces the CSV body when present.
    json: Option<serde_json::Value>,
    notes: Vec<String>,
    failed: Option<String>,
}

impl Output {
    fn csv(kind: &'static str, header: &[&str]) -> Self {
        Output {
            kind,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            json: None,
            notes: Vec::new(),
            failed: None,
        }
    }
}

fn require(v: Option<f64>, name: &str, model: &str) -> Result<f64, Failure> {
    v.ok_or_else(|| input(format!("--{name} is required for --model {model}")))
}

/// (q, t, ν, α, β) for ASEP from either coordinate system.
fn asep_coordinates(m: &ModelArgs, notes: &mut Vec<String>) -> Result<(f64, f64, f64, f64, f64), Failure> {
    let q = require(m.q, "q", "asep")?;
    match (m.alpha, m.beta, m.t, m.nu) {
        (Some(alpha), Some(beta), None, None) => {
            let d = nu_inverse_from_rates(q, alpha, beta)?;
            let nu = 1.0 / d.nu_inv;
            notes.push(format!("converted (alpha,beta)=({alpha},{beta}) to (t,nu)=({},{nu})", d.t));
            Ok((q, d.t, nu, alpha, beta))
        }
        (None, None, Some(t), Some(nu)) => {
            let r = rates_from_params(q, t, nu)?;
            notes.push(format!("converted (t,nu)=({t},{nu}) to (alpha,beta)=({},{})", r.alpha, r.beta));
            Ok((q, t, nu, r.alpha, r.beta))
        }
        (None, None, None, None) | (Some(_), None, ..) | (None, Some(_), ..) => {
            Err(input("--model asep needs --alpha and --beta, or --t and --nu"))
        }
        _ => Err(input("give either (--alpha, --beta) or (--t, --nu), not both")),
    }
}

fn sixvertex_params(m: &ModelArgs) -> Result<ModelParams, Failure> {
    let q = require(m.q, "q", "sixvertex")?;
    let t = require(m.t, "t", "sixvertex")?;
    let nu = require(m.nu, "nu", "sixvertex")?;
    let a = match (m.a.len(), m.n) {
        (0, _) => return Err(input("--a is required for --model sixvertex")),
        (1, Some(n)) => vec![m.a[0]; n],
        (1, None) => return Err(input("--n is required with a single --a value")),
        (k, Some(n)) if k != n => return Err(input(format!("--a has {k} values but --n is {n}"))),
        _ => m.a.clone(),
    };
    let p = ModelParams::new(q, t, nu, m.zeta, a);
    p.check_probabilistic()?;
    Ok(p)
}

fn tau_of(m: &ModelArgs) -> Result<f64, Failure> {
    let tau = require(m.tau, "tau", "asep")?;
    if !(tau >= 0.0) {
        return Err(input(format!("--tau={tau} must be nonnegative")));
    }
    Ok(tau)
}

fn simulate(a: &SimulateArgs) -> Result<Output, Failure> {
    match a.model.model.as_str() {
        "asep" => {
            let mut out = Output::csv("asep-current-cdf", &["s", "cdf", "stderr"]);
            let (q, _, _, alpha, beta) = asep_coordinates(&a.model, &mut out.notes)?;
            let tau = tau_of(&a.model)?;
            let emp = mc_cdf(q, alpha, beta, tau, a.samples, a.seed)?;
            out.notes.push("s ranges over -N(tau/(1-q))".into());
            let (lo, hi) = (emp.values[0], emp.values[emp.values.len() - 1]);
            for s in lo..=hi {
                out.rows.push(vec![s.to_string(), fmt(emp.eval(s as f64)), fmt(emp.stderr(s as f64))]);
            }
            Ok(out)
        }
        "sixvertex" => {
            let p = sixvertex_params(&a.model)?;
            let n = p.a.len();
            let mut out = Output::csv("sixvertex-height-cdf", &["h", "count", "pmf", "cdf", "stderr"]);
            let hs = sample_heights(n, &p, a.seed, a.samples)?;
            let mut counts = vec![0u64; n + 1];
            for h in &hs {
                counts[h.height] += 1;
            }
            let total = a.samples as f64;
            let mut acc = 0u64;
            for (h, &c) in counts.iter().enumerate() {
                acc += c;
                let f = acc as f64 / total;
                out.rows.push(vec![h.to_string(), c.to_string(), fmt(c as f64 / total), fmt(f), fmt((f * (1.0 - f) / total).sqrt())]);
            }
            Ok(out)
        }
        other => Err(input(format!("unknown --model '{other}' (asep or sixvertex)"))),
    }
}

fn parse_regime(s: &str) -> Result<Regime, Failure> {
    match s {
        "base" => Ok(Regime::Base),
        "goe" => Ok(Regime::Goe),
        "gauss" => Ok(Regime::Gauss),
        _ => Err(input(format!("unknown --regime '{s}' (base, goe or gauss)"))),
    }
}

fn pfaffian_cdf(a: &PfaffianArgs) -> Result<Output, Failure> {
    if a.s_min > a.s_max {
        return Err(input("--s-min must not exceed --s-max"));
    }
    let mut out = Output::csv(
        "pfaffian-cdf",
        &["s", "cdf", "quadrature_estimate", "window_m", "window_estimate", "skew_deviation", "imag_residual"],
    );
    let mut kp = match a.model.model.as_str() {
        "asep" => {
            let (q, t, nu, _, _) = asep_coordinates(&a.model, &mut out.notes)?;
            let tau = tau_of(&a.model)?;
            out.notes.push(format!("law of -N(tau/(1-q)) + chi + 2S with raw time {}", tau / (1.0 - q)));
            KernelParams::asep(tau / (1.0 - q), &ModelParams::new(q, t, nu, a.model.zeta, vec![]))?
        }
        "sixvertex" => {
            out.notes.push("law of h(n,n) + chi + 2S".into());
            KernelParams::sixvertex(&sixvertex_params(&a.model)?)?
        }
        other => return Err(input(format!("unknown --model '{other}' (asep or sixvertex)"))),
    };
    if let Some(r) = &a.regime {
        kp = kp.with_regime(parse_regime(r)?)?;
    }
    if let Some(n) = a.nodes {
        kp = kp.with_nodes(n);
    }
    if a.r.is_some() || a.r_prime.is_some() || a.r_b.is_some() {
        let d = kp.radii;
        kp = kp.with_radii(Radii { r: a.r.unwrap_or(d.r), r_prime: a.r_prime.unwrap_or(d.r_prime), r_b: a.r_b.unwrap_or(d.r_b) })?;
    }
    out.notes.push(format!("regime {:?}, radii {:?}, nodes {}", kp.regime, kp.radii, kp.nodes));
    for c in cdf_table_checked(&kp, a.s_min, a.s_max, a.tol)? {
        out.rows.push(vec![
            c.s.to_string(),
            fmt(c.value),
            fmt(c.quadrature_estimate),
            c.window_m.to_string(),
            fmt(c.window_estimate),
            fmt(c.skew_deviation),
            fmt(c.imag_residual),
        ]);
    }
    Ok(out)
}

fn limit(a: &LimitArgs) -> Result<Output, Failure> {
    if !(a.step > 0.0) || a.s_min > a.s_max {
        return Err(input("need --step > 0 and --s-min <= --s-max"));
    }
    let cross = || a.xi.iter().map(|&xi| (LimitFamily::Cross { xi }, format!("F_cross(xi={xi})")));
    let families: Vec<(LimitFamily, String)> = match a.dist.as_str() {
        "gse" => vec![(LimitFamily::Gse, "F_GSE".into())],
        "goe" => vec![(LimitFamily::Goe, "F_GOE".into())],
        "cross" => cross().collect(),
        "all" => [(LimitFamily::Gse, "F_GSE".to_string()), (LimitFamily::Goe, "F_GOE".to_string())].into_iter().chain(cross()).collect(),
        other => return Err(input(format!("unknown --dist '{other}' (gse, goe, cross or all)"))),
    };
    let steps = ((a.s_max - a.s_min) / a.step + 1e-9).floor() as usize;
    let grid: Vec<f64> = (0..=steps).map(|i| a.s_min + a.step * i as f64).collect();
    let mut header = vec!["s".to_string()];
    let mut columns = Vec::new();
    let mut out = Output::csv("limit-table", &[]);
    for (fam, name) in families {
        let mut spec = LimitKernelSpec::new(fam)?;
        if let Some(d) = a.delta {
            spec = spec.with_delta(d)?;
        }
        if let Some(m) = a.nystrom_nodes {
            spec.nystrom_nodes = m;
        }
        spec.length = a.length;
        spec.validate()?;
        let tab = limit_table(&grid, &spec)?;
        let worst = tab.iter().map(|v| v.refinement).fold(0.0, f64::max);
        out.notes.push(format!("{name}: delta {}, max Nystrom refinement change {worst:e}", spec.delta));
        header.push(name);
        columns.push(tab);
    }
    out.header = header;
    for (i, s) in grid.iter().enumerate() {
        let mut row = vec![fmt(*s)];
        row.extend(columns.iter().map(|c| fmt(c[i].value)));
        out.rows.push(row);
    }
    Ok(out)
}

fn verify(a: &VerifyArgs) -> Result<Output, Failure> {
    let suite: Suite = a.suite.parse()?;
    let rep = run_suite(suite, &VerifyOptions { seed: a.seed, mc_samples: a.mc_samples })?;
    let mut out = Output::csv("verify-report", &[]);
    for c in &rep.checks {
        eprintln!("{} [{}] {} (value {:e}, threshold {:e})", if c.passed { "PASS" } else { "FAIL" }, c.suite, c.name, c.value, c.threshold);
    }
    let failing: Vec<_> = rep.checks.iter().filter(|c| !c.passed).collect();
    if !failing.is_empty() {
        out.failed = Some(serde_json::to_string_pretty(&failing).unwrap_or_default());
    }
    out.json = Some(serde_json::json!({ "suite": suite.name(), "passed": rep.passed(), "checks": rep.checks }));
    Ok(out)
}

fn converge(a: &ConvergeArgs) -> Result<Output, Failure> {
    if a.model != "sixvertex" {
        return Err(input(format!("converge supports --model sixvertex, got '{}'", a.model)));
    }
    if a.sizes.is_empty() {
        return Err(input("--sizes must not be empty"));
    }
    let mut out = Output::csv("convergence", &["n", "target", "centre", "scale", "points", "sup_distance"]);
    let rows = sixvertex_convergence(a.q, a.t, a.nu, a.zeta, a.a, &a.sizes)?;
    for r in &rows {
        out.rows.push(vec![r.n.to_string(), r.target.clone(), fmt(r.centre), fmt(r.scale), r.points.to_string(), fmt(r.sup_distance)]);
    }
    let decreasing = rows.windows(2).all(|w| w[1].sup_distance < w[0].sup_distance);
    out.notes.push(format!("sup-distance decreasing in n: {decreasing}"));
    Ok(out)
}

fn dispatch(cmd: &Command) -> Result<Output, Failure> {
    match cmd {
        Command::Simulate(a) => simulate(a),
        Command::PfaffianCdf(a) => pfaffian_cdf(a),
        Command::Limit(a) => limit(a),
        Command::Verify(a) => verify(a),
        Command::Converge(a) => converge(a),
    }
}

fn write_body(out: &Output, w: &mut dyn Write) -> Result<(), Failure> {
    if let Some(j) = &out.json {
        serde_json::to_writer_pretty(&mut *w, j).map_err(|e| Failure::Check(e.to_string()))?;
        writeln!(w)?;
        return Ok(());
    }
    let mut c = csv::Writer::from_writer(w);
    c.write_record(&out.header)?;
    for r in &out.rows {
        c.write_record(r)?;
    }
    c.flush()?;
    Ok(())
}

fn manifest_path(cli: &Cli) -> Option<PathBuf> {
    cli.manifest.clone().or_else(|| {
        cli.out.as_ref().map(|p| {
            let mut s = p.as_os_str().to_owned();
            s.push(".manifest.json");
            PathBuf::from(s)
        })
    })
}

fn load_config(path: &Path) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
    let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| input(format!("bad config {}: {e}", path.display())))?;
    if cfg.schema_version != SCHEMA_VERSION {
        return Err(input(format!("config schema_version {} != {SCHEMA_VERSION}", cfg.schema_version)));
    }
    Ok(cfg)
}

fn set_workers(cli: &Cli) -> Result<Option<usize>, Failure> {
    let n = match cli.workers {
        Some(n) => Some(n),
        None => match std::env::var(WORKERS_ENV) {
            Ok(v) => Some(v.trim().parse().map_err(|_| input(format!("{WORKERS_ENV}='{v}' is not a count")))?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(input("worker count must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Check(e.to_string()))?;
    }
    Ok(n)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = match (&cli.config, &cli.command) {
        (Some(p), None) => load_config(p)?,
        (None, Some(c)) => RunConfig { schema_version: SCHEMA_VERSION, command: c.clone() },
        (Some(_), Some(_)) => return Err(input("give either --config or a subcommand, not both")),
        (None, None) => return Err(input("a subcommand or --config is required (see --help)")),
    };
    let workers = set_workers(cli)?;
    let out = dispatch(&cfg.command)?;
    for n in &out.notes {
        eprintln!("note: {n}");
    }
    match &cli.out {
        Some(p) => {
            let mut f = File::create(p)?;
            write_body(&out, &mut f)?;
        }
        None => write_body(&out, &mut io::stdout().lock())?,
    }
    let manifest = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "library_version": halfspace::VERSION,
        "output_kind": out.kind,
        "config": cfg,
        "workers": workers,
        "notes": out.notes,
    });
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Failure::Check(e.to_string()))?;
    match manifest_path(cli) {
        Some(p) => std::fs::write(p, text + "\n")?,
        None => eprintln!("{text}"),
    }
    if let Some(f) = out.failed {
        return Err(Failure::Check(format!("failed checks:\n{f}")));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Check(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
