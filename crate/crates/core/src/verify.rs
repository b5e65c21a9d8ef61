//! Verification suites: each suite evaluates the invariants of one module and reports
//! every check with its measured value and threshold.

use std::fmt;
use std::str::FromStr;

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lattice::{enumerate_sixvertex, verify_boundary_exchange, verify_yb_exchange, SixVertexWeights};
use crate::limits::{f_limit, limit_table, LimitCdf, LimitFamily, LimitKernelSpec};
use crate::measures::{fbs_first_part_pmf, hl_length_pmf, hl_pathstring_law, rs_inverse_pmf, rs_pmf, Caps, FbsCaps};
use crate::params::ModelParams;
use crate::pfaffian::{qmoment_contour, KernelParams, SkewBlockKernel};
use crate::scalar::rat;
use crate::special::{qpoch_finite, qpoch_inf_certified, theta3};
use crate::study::{asep_vs_mc, sixvertex_vs_oracle};
use crate::symfunc::{h_lambda_weight, hl_table, pi_normalization, verify_general_identity};
use crate::{BigRational, Complex64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Symfunc,
    Measures,
    Lattice,
    Yangbaxter,
    Asep,
    Special,
    Pfaffian,
    Limits,
    All,
}

impl Suite {
    pub const EACH: [Suite; 8] = [
        Suite::Special,
        Suite::Symfunc,
        Suite::Measures,
        Suite::Lattice,
        Suite::Yangbaxter,
        Suite::Asep,
        Suite::Pfaffian,
        Suite::Limits,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Symfunc => "symfunc",
            Suite::Measures => "measures",
            Suite::Lattice => "lattice",
            Suite::Yangbaxter => "yangbaxter",
            Suite::Asep => "asep",
            Suite::Special => "special",
            Suite::Pfaffian => "pfaffian",
            Suite::Limits => "limits",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .iter()
            .chain(std::iter::once(&Suite::All))
            .find(|x| x.name() == s)
            .copied()
            .ok_or_else(|| invalid(format!("unknown suite '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Monte Carlo sample count for the ASEP comparison.
    pub mc_samples: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { seed: 1, mc_samples: 1_000_000 }
    }
}

/// One verified property.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub passed: bool,
    /// Measured discrepancy.
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

struct Recorder {
    suite: &'static str,
    checks: Vec<Check>,
}

impl Recorder {
    fn le(&mut self, name: impl Into<String>, value: f64, threshold: f64, detail: impl Into<String>) {
        self.checks.push(Check {
            suite: self.suite.into(),
            name: name.into(),
            passed: value <= threshold,
            value,
            threshold,
            detail: detail.into(),
        });
    }

    fn flag(&mut self, name: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.le(name, if ok { 0.0 } else { 1.0 }, 0.0, detail);
    }

    /// Records an error from a computation as a failed check.
    fn attempt(&mut self, name: &str, f: impl FnOnce(&mut Recorder) -> Result<()>) {
        if let Err(e) = f(self) {
            self.le(name, f64::INFINITY, 0.0, format!("error: {e}"));
        }
    }
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<SuiteReport> {
    if suite == Suite::All {
        let mut checks = Vec::new();
        for s in Suite::EACH {
            checks.extend(run_suite(s, opts)?.checks);
        }
        return Ok(SuiteReport { checks });
    }
    let mut r = Recorder { suite: suite.name(), checks: Vec::new() };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    match suite {
        Suite::Special => special(&mut r),
        Suite::Symfunc => symfunc(&mut r),
        Suite::Measures => measures(&mut r),
        Suite::Lattice => lattice(&mut r, &mut rng),
        Suite::Yangbaxter => yangbaxter(&mut r, &mut rng),
        Suite::Asep => asep(&mut r, opts),
        Suite::Pfaffian => pfaffian(&mut r),
        Suite::Limits => limits(&mut r),
        Suite::All => unreachable!(),
    }
    Ok(SuiteReport { checks: r.checks })
}

/// A rational point with 0<q<1, 0≤t, νt<1 and 1<ν in the stochastic six-vertex regime.
pub fn random_rational_point(rng: &mut ChaCha8Rng, n: usize) -> (BigRational, BigRational, BigRational, Vec<BigRational>) {
    loop {
        let q = rat(rng.gen_range(1..=5), 10);
        let t = rat(rng.gen_range(0..=3), 10);
        let nu = rat(rng.gen_range(5..=16), 4);
        let a: Vec<BigRational> = (0..n).map(|_| rat(rng.gen_range(2..=6), 20)).collect();
        let p = ModelParams::new(f(&q), f(&t), f(&nu), 0.5, a.iter().map(f).collect());
        if p.check_probabilistic().is_ok() {
            return (q, t, nu, a);
        }
    }
}

fn f(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn special(r: &mut Recorder) {
    for (a, q) in [(Complex64::new(0.3, 0.4), 0.5), (Complex64::new(-0.9, 0.0), 0.7), (Complex64::new(2.0, -1.0), 0.2)] {
        r.attempt("qpoch_inf certificate", |r| {
            let c = qpoch_inf_certified(a, q, 1e-16)?;
            let long = qpoch_finite(a, q, 400);
            r.le(format!("qpoch_inf({a},{q}) vs 400-term product"), (c.value - long).norm(), c.error_bound + 1e-14, "");
            Ok(())
        });
    }
    for (z, q) in [(Complex64::new(0.7, 0.2), 0.3), (Complex64::new(1.5, 0.0), 0.6)] {
        r.attempt("theta3", |r| {
            let prod = theta3(z, q)?;
            let sum: Complex64 = (-60i32..=60).map(|k| q.powf((k * k) as f64 / 2.0) * z.powi(k)).sum();
            r.le(format!("theta3({z},{q}) product vs sum"), (prod - sum).norm(), 1e-13 * sum.norm().max(1.0), "");
            Ok(())
        });
    }
}

fn symfunc(r: &mut Recorder) {
    for (k, nv, d) in [(1, 1, 4), (2, 1, 5), (3, 1, 6), (1, 2, 5), (2, 2, 6), (3, 2, 6)] {
        r.attempt("general identity", |r| {
            let rep = verify_general_identity(k, nv, d)?;
            r.flag(
                format!("general identity k={k} nvars={nv} degree<={d}"),
                rep.holds(),
                rep.mismatches.first().map(|m| format!("{m:?}")).unwrap_or_default(),
            );
            Ok(())
        });
    }
    let points: [(&[f64], f64, f64, f64); 3] =
        [(&[0.5, 0.4], 0.5, 0.4, 2.0), (&[0.5, 0.4, 0.3], 0.5, 0.4, 2.0), (&[0.3, 0.2], 0.2, 0.1, 3.0)];
    for (a, q, t, nu) in points {
        r.attempt("littlewood", |r| {
            let target = pi_normalization(a, &q, &t, &nu)?;
            let mut sum = 0.0;
            for (lam, v) in hl_table(a, &q, 30, usize::MAX) {
                sum += h_lambda_weight(&lam, &q, &t, &nu)? * v;
            }
            r.le(format!("Littlewood sum a={a:?} q={q} t={t} nu={nu}, lambda_1<=30"), (sum - target).abs(), 1e-8, "");
            Ok(())
        });
    }
}

/// (a, q, t, ν) points for the shift identity.
pub const SHIFT_POINTS: [(&[f64], f64, f64, f64); 3] =
    [(&[0.2], 0.1, 0.05, 3.0), (&[0.15, 0.1], 0.1, 0.1, 4.0), (&[0.1, 0.1, 0.1], 0.1, 0.2, 4.0)];

fn measures(r: &mut Recorder) {
    for (a, q, t, nu) in SHIFT_POINTS {
        r.attempt("shift identity", |r| {
            let fbs = fbs_first_part_pmf(a, q, t, nu, FbsCaps { max_size: 28 })?;
            let shifted = hl_length_pmf(a, q, t, nu, Caps::default())?.convolve(&rs_pmf(q, t, 60)?);
            let tails = fbs.tail_bound() + shifted.tail_bound();
            let name = format!("l(lambda)+chi vs FBS mu_1, a={a:?} q={q} t={t} nu={nu}");
            r.le(name.clone(), fbs.sup_cdf_distance(&shifted), tails, format!("combined tail {tails:e}"));
            r.le(format!("{name}: combined tail"), tails, 1e-8, "");
            Ok(())
        });
    }
    for (q, t) in [(0.3, 0.2), (0.5, 0.7)] {
        r.attempt("rs inverse", |r| {
            let d = rs_pmf(q, t, 80)?.convolve(&rs_inverse_pmf(q, t, 80)?);
            let err = (d.support().0..=d.support().1)
                .filter(|&k| k.abs() <= 20)
                .map(|k| (d.mass(k) - if k == 0 { 1.0 } else { 0.0 }).abs())
                .fold(0.0, f64::max);
            r.le(format!("RS(q={q},t={t}) convolved with its inverse is delta_0"), err, 1e-10 + d.tail_bound(), "");
            Ok(())
        });
    }
}

fn lattice(r: &mut Recorder, rng: &mut ChaCha8Rng) {
    for n in 1..=3 {
        for _ in 0..3 {
            let (q, t, nu, a) = random_rational_point(rng, n);
            let label = format!("n={n} q={q} t={t} nu={nu} a=[{}]", a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
            r.attempt(&label.clone(), |r| {
                let w = SixVertexWeights { q: q.clone(), t: t.clone(), nu: nu.clone(), a: a.clone() };
                let exact = enumerate_sixvertex(&w)?;
                let af: Vec<f64> = a.iter().map(f).collect();
                let hl = hl_pathstring_law(&af, f(&q), f(&t), f(&nu), Caps { max_part: 30, max_len: n })?;
                let mut worst: f64 = 0.0;
                for (s, p) in &exact {
                    worst = worst.max((f(p) - hl.probs.get(s).copied().unwrap_or(0.0)).abs());
                }
                for (s, h) in &hl.probs {
                    if !exact.contains_key(s) {
                        worst = worst.max(h.abs());
                    }
                }
                r.le(format!("path-string law, enumeration vs HL process, {label}"), worst, hl.tail_bound + 1e-12, "");
                r.le(format!("HL truncation tail, {label}"), hl.tail_bound, 1e-10, "");
                Ok(())
            });
        }
    }
}

fn yangbaxter(r: &mut Recorder, rng: &mut ChaCha8Rng) {
    for _ in 0..3 {
        let a = rat(rng.gen_range(1..=9), 10);
        let q = rat(rng.gen_range(1..=9), 10);
        let t = rat(rng.gen_range(1..=9), 10);
        let nu = rat(rng.gen_range(2..=12), 3);
        let label = format!("a={a} q={q} t={t} nu={nu}");
        r.attempt("boundary exchange", |r| {
            let rep = verify_boundary_exchange(3, &a, &q, &t, &nu, &rat(0, 1))?;
            r.flag(
                format!("boundary exchange, all i,j in {{0,1}}, n1,n2<=3, {label}"),
                rep.holds() && rep.checked > 0,
                rep.failures.first().map(|x| format!("{x:?}")).unwrap_or_default(),
            );
            let bad = verify_boundary_exchange(3, &a, &q, &t, &nu, &rat(1, 1000))?;
            r.flag(format!("perturbed boundary weight is detected, {label}"), !bad.holds(), "");
            Ok(())
        });
        let b = rat(rng.gen_range(1..=9), 10);
        let rep = verify_yb_exchange(2, 2, &a, &b, &q);
        r.flag(
            format!("bulk Yang-Baxter exchange a={a} b={b} q={q}"),
            rep.holds() && rep.checked > 0,
            rep.failures.first().map(|x| format!("{x:?}")).unwrap_or_default(),
        );
    }
}

/// Parameter sets (q, t, ν, ζ) for the ASEP comparison at τ = 20.
pub const ASEP_POINTS: [(f64, f64, f64, f64); 2] = [(0.3, 0.2, 2.0, 0.5), (0.3, 0.2, 1.0, 0.5)];

fn asep(r: &mut Recorder, opts: &VerifyOptions) {
    for (q, t, nu, zeta) in ASEP_POINTS {
        r.attempt("asep vs mc", |r| {
            let p = ModelParams::new(q, t, nu, zeta, vec![]);
            let rows = asep_vs_mc(&p, 20.0, opts.mc_samples, opts.seed, &[-10, -8, -6, -4, -2])?;
            for row in rows {
                r.le(
                    format!("ASEP tau=20 nu={nu}: Pfaffian vs Monte Carlo at s={} (|z|)", row.s),
                    row.z.abs(),
                    3.0,
                    format!("pfaffian {} mc {} stderr {}", row.pfaffian, row.monte_carlo, row.stderr),
                );
            }
            Ok(())
        });
    }
}

fn pfaffian(r: &mut Recorder) {
    for nu in [2.0, 1.0, 0.5] {
        r.attempt("oracle", |r| {
            let p = ModelParams::homogeneous(0.3, 0.2, nu, 0.5, 0.4, 2);
            let rows = sixvertex_vs_oracle(&p, -4, 8)?;
            let worst = rows.iter().map(|x| (x.pfaffian - x.oracle).abs()).fold(0.0, f64::max);
            r.le(format!("six-vertex n=2 nu={nu}: Pfaffian cdf vs enumeration*chi*2S, s in [-4,8]"), worst, 1e-6, "");
            Ok(())
        });
    }
    r.attempt("residues", |r| {
        let p = ModelParams::homogeneous(0.3, 0.2, 0.5, 0.5, 0.4, 2);
        let k = SkewBlockKernel::new(KernelParams::sixvertex(&p)?)?;
        let mut worst: f64 = 0.0;
        for kk in k.a_indices() {
            let zk = 0.5 * 0.3f64.powi(-(kk as i32));
            for (x, y) in [(0i64, 1i64), (2, -1), (3, 3)] {
                let num = k.numerical_residue(zk, 0.02, x, y, 256);
                let ab = k.a_k(kk, x) * k.goe_boundary_b(y);
                worst = worst.max((num - ab).abs() / ab.abs().max(1.0));
            }
        }
        r.le("kernel residues at z=nu, nu/q vs A_k(x)B(y)", worst, 1e-7, "");
        let mut skew: f64 = 0.0;
        for m in k.s_indices() {
            for (x, y) in [(0i64, 2i64), (3, -1), (1, 1), (5, 0)] {
                skew = skew.max((k.s_term(m, x, y)? + k.s_term(m, y, x)?).abs());
            }
        }
        r.le("S_m(x,y) + S_m(y,x)", skew, 1e-9, "");
        Ok(())
    });
    let p = ModelParams::new(0.5, 0.3, 2.0, 0.5, vec![0.2, 0.25]);
    for k in [1usize, 2] {
        r.attempt("qmoment", |r| {
            let got = qmoment_contour(2, 2, k, &p)?.value;
            let want = qmoment_enumerated(2, 2, k as i32, &p)?;
            r.le(format!("E[q^(-{k} h(2,2))]: contour vs enumeration"), (got - want).abs(), 1e-7, "");
            Ok(())
        });
    }
}

/// E[q^{−k h(n,m)}] from the enumerated row-m path strings.
pub fn qmoment_enumerated(n: usize, m: usize, k: i32, p: &ModelParams) -> Result<f64> {
    let mut pm = p.clone();
    pm.a.truncate(m);
    let w = SixVertexWeights::<f64>::from_params(&pm)?;
    Ok(enumerate_sixvertex(&w)?
        .iter()
        .map(|(s, pr)| pr * p.q.powi(-k * s[..n].iter().map(|&b| b as i32).sum::<i32>()))
        .sum())
}

fn limits(r: &mut Recorder) {
    let grid: Vec<f64> = (0..=40).map(|i| -6.0 + 0.25 * i as f64).collect();
    for fam in [LimitFamily::Gse, LimitFamily::Goe, LimitFamily::Cross { xi: 1.0 }] {
        r.attempt("limit family", |r| {
            let spec = LimitKernelSpec::new(fam)?;
            let tab = limit_table(&grid, &spec)?;
            let drop = tab.windows(2).map(|w| w[0].value - w[1].value).fold(0.0, f64::max);
            r.le(format!("{fam:?}: monotone on [-6,4] (largest decrease)"), drop, 1e-12, "");
            let refine = tab.iter().map(|v| v.refinement).fold(0.0, f64::max);
            r.le(format!("{fam:?}: Nystrom refinement change"), refine, 1e-7, "");
            r.le(format!("{fam:?}: F(-8)"), f_limit(-8.0, &spec)?.value, 1e-6, "");
            r.le(format!("{fam:?}: 1-F(8)"), 1.0 - f_limit(8.0, &spec)?.value, 1e-7, "");
            Ok(())
        });
    }
    r.attempt("crossover endpoints", |r| {
        let goe = LimitCdf::new(LimitFamily::Goe)?;
        let gse = LimitCdf::new(LimitFamily::Gse)?;
        let mut worst: f64 = 0.0;
        for s in [-2.0, -1.0, 0.0, 1.0] {
            worst = worst.max((LimitCdf::new(LimitFamily::Cross { xi: 0.0025 })?.eval(s)? - goe.eval(s)?).abs());
        }
        r.le("F_cross(xi=0.0025) vs F_GOE on [-2,1]", worst, 1e-3, "");
        for s in [-2.0, 0.0, 2.0] {
            let g = gse.eval(s)?;
            let d: Vec<f64> = [10.0, 50.0, 200.0]
                .iter()
                .map(|&xi| Ok((LimitCdf::new(LimitFamily::Cross { xi })?.eval(s)? - g).abs()))
                .collect::<Result<_>>()?;
            r.flag(format!("|F_cross - F_GSE| decreasing over xi=10,50,200 at s={s}"), d[0] > d[1] && d[1] > d[2], format!("{d:?}"));
        }
        Ok(())
    });
}
