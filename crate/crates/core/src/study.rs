//! Cross-validation runs: Pfaffian cdfs against enumeration and Monte Carlo, and the
//! finite-size convergence study toward the limit laws.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::asep::{mc_cdf, rates_from_params};
use crate::error::{invalid, Result};
use crate::lattice::{enumerate_sixvertex, SixVertexWeights};
use crate::limits::{LimitCdf, LimitFamily};
use crate::measures::{rs_pmf, theta_pmf, SignedPmf};
use crate::params::ModelParams;
use crate::pfaffian::{cdf_sixvertex_pfaffian, Regime};
use crate::special::normal_cdf;

/// χ ⊛ 2S, the shift law attached to the Pfaffian cdfs.
pub fn shift_law(q: f64, t: f64, zeta: f64) -> Result<SignedPmf> {
    Ok(rs_pmf(q, t, 80)?.convolve(&theta_pmf(zeta, q, 20)?.dilate(2)))
}

/// Law of h(n,n) + χ + 2S from exact enumeration, n = params.a.len().
pub fn sixvertex_oracle(params: &ModelParams) -> Result<SignedPmf> {
    let w = SixVertexWeights::<f64>::from_params(params)?;
    let mut h = BTreeMap::new();
    for (s, pr) in enumerate_sixvertex(&w)? {
        *h.entry(s.iter().map(|&b| b as i64).sum::<i64>()).or_insert(0.0) += pr;
    }
    Ok(SignedPmf::from_map(&h, 0.0)?.convolve(&shift_law(params.q, params.t, params.zeta)?))
}

/// Pfaffian cdf against the enumeration oracle at one s.
#[derive(Clone, Debug, Serialize)]
pub struct OracleRow {
    pub s: i64,
    pub pfaffian: f64,
    pub oracle: f64,
    pub quadrature_estimate: f64,
}

pub fn sixvertex_vs_oracle(params: &ModelParams, s_min: i64, s_max: i64) -> Result<Vec<OracleRow>> {
    let orc = sixvertex_oracle(params)?;
    let tab = cdf_sixvertex_pfaffian(params.a.len(), s_min, s_max, params)?;
    Ok(tab
        .into_iter()
        .map(|c| OracleRow { s: c.s, pfaffian: c.value, oracle: orc.cdf(c.s), quadrature_estimate: c.quadrature_estimate })
        .collect())
}

/// Pfaffian cdf of −N(τ)+χ+2S against the Monte Carlo law of −N(τ) convolved with χ ⊛ 2S.
#[derive(Clone, Debug, Serialize)]
pub struct McRow {
    pub s: i64,
    pub pfaffian: f64,
    pub monte_carlo: f64,
    pub stderr: f64,
    /// (pfaffian − monte_carlo)/stderr
    pub z: f64,
}

/// τ is raw time; ν·t < 1.
pub fn asep_vs_mc(params: &ModelParams, tau: f64, nsamples: u64, seed: u64, grid: &[i64]) -> Result<Vec<McRow>> {
    let q = params.q;
    let rates = rates_from_params(q, params.t, params.nu)?;
    let emp = mc_cdf(q, rates.alpha, rates.beta, tau * (1.0 - q), nsamples, seed)?;
    let mut pmf = BTreeMap::new();
    for &v in &emp.values {
        *pmf.entry(v).or_insert(0.0) += 1.0 / emp.nsamples as f64;
    }
    let w = shift_law(q, params.t, params.zeta)?;
    let (lo, hi) = match (grid.iter().min(), grid.iter().max()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(invalid("empty s grid")),
    };
    let tab = crate::pfaffian::cdf_asep_pfaffian(tau, lo, hi, params)?;
    Ok(grid
        .iter()
        .map(|&s| {
            let pf = tab[(s - lo) as usize].value;
            let g = |x: i64| w.cdf(s - x);
            let mean: f64 = pmf.iter().map(|(&x, &p)| p * g(x)).sum();
            let sq: f64 = pmf.iter().map(|(&x, &p)| p * g(x) * g(x)).sum();
            let stderr = ((sq - mean * mean).max(0.0) / emp.nsamples as f64).sqrt();
            McRow { s, pfaffian: pf, monte_carlo: mean, stderr, z: (pf - mean) / stderr.max(1e-300) }
        })
        .collect())
}

/// Sup-distance of a rescaled six-vertex Pfaffian cdf to its limit law.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub target: String,
    pub centre: f64,
    pub scale: f64,
    pub points: usize,
    pub sup_distance: f64,
}

/// Homogeneous a_i = a: ν > 1 against F_GSE, ν = 1 against F_GOE (centre 2a/(1+a)·n, scale
/// (a(1−a))^{1/3}/(1+a)·n^{1/3}); ν < 1 against Φ (centre μn, scale σ√n). Integer s is compared at
/// (s + 1/2 − centre)/scale.
pub fn sixvertex_convergence(q: f64, t: f64, nu: f64, zeta: f64, a: f64, sizes: &[usize]) -> Result<Vec<ConvergenceRow>> {
    if !(a > 0.0 && a < 1.0) {
        return Err(invalid(format!("a={a} must lie in (0,1)")));
    }
    let regime = Regime::for_nu(nu);
    let limit = match regime {
        Regime::Base => Some((LimitCdf::new(LimitFamily::Gse)?, "GSE")),
        Regime::Goe => Some((LimitCdf::new(LimitFamily::Goe)?, "GOE")),
        Regime::Gauss => None,
    };
    let mut out = Vec::new();
    for &n in sizes {
        let nf = n as f64;
        let (centre, scale, lo, hi) = match regime {
            Regime::Gauss => {
                let mu = (2.0 * a * a + a * (nu + 1.0 / nu)) / ((1.0 + a * nu) * (1.0 + a / nu));
                let var = a * (1.0 - a * a) * (1.0 / nu - nu) / ((1.0 + a * nu).powi(2) * (1.0 + a / nu).powi(2));
                (mu * nf, (var * nf).sqrt(), -3.5, 3.5)
            }
            _ => (2.0 * a / (1.0 + a) * nf, (a * (1.0 - a)).powf(1.0 / 3.0) / (1.0 + a) * nf.powf(1.0 / 3.0), -5.0, 4.0),
        };
        let p = ModelParams::homogeneous(q, t, nu, zeta, a, n);
        let s_min = (centre + lo * scale).floor() as i64;
        let s_max = (centre + hi * scale).ceil() as i64;
        let tab = cdf_sixvertex_pfaffian(n, s_min, s_max, &p)?;
        let mut sup: f64 = 0.0;
        for c in &tab {
            let x = (c.s as f64 + 0.5 - centre) / scale;
            let f = match &limit {
                Some((l, _)) => l.eval(x)?,
                None => normal_cdf(x),
            };
            sup = sup.max((c.value - f).abs());
        }
        out.push(ConvergenceRow {
            n,
            target: limit.as_ref().map_or("Gaussian", |l| l.1).to_string(),
            centre,
            scale,
            points: tab.len(),
            sup_distance: sup,
        });
    }
    Ok(out)
}
