//! Nested contour integral for E[q^{−k h(n,m)}].

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::params::ModelParams;
use crate::special::{contour_nodes, QuadratureSpec};

/// Value, self-consistency estimate and the radii used.
#[derive(Clone, Debug, Serialize)]
pub struct QMoment {
    pub value: f64,
    pub estimate: f64,
    pub radii: Vec<f64>,
}

fn single(z: Complex64, n: usize, m: usize, p: &ModelParams) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let mut f = (one - p.q * z * z) / (z * (one - p.nu * p.t * z) * (one + z / p.nu));
    for &a in &p.a[..m] {
        f *= (one - a * z) / (one - p.q * a * z);
    }
    for &a in &p.a[..n] {
        f *= (z - a / p.q) / (z - a);
    }
    f
}

/// Radii r₁ < q r₂ < … < q^{k−1} r_k with max a_i < r₁ and r_k below 1, ν and 1/(νt).
fn nested_radii(k: usize, p: &ModelParams, m: usize) -> Result<Vec<f64>> {
    let lo = p.a[..m].iter().cloned().fold(0.0, f64::max);
    let mut hi: f64 = 1.0f64.min(p.nu);
    if p.t > 0.0 {
        hi = hi.min(1.0 / (p.nu * p.t));
    }
    let span = (hi / lo).ln() - (k as f64 - 1.0) * (1.0 / p.q).ln();
    if !(lo > 0.0) || !(span > 0.0) {
        return Err(invalid(format!(
            "no nested contours: need max a={lo} < q^{}·{hi}",
            k - 1
        )));
    }
    let delta = span / (k as f64 + 1.0);
    Ok((0..k)
        .map(|i| (lo.ln() + delta + i as f64 * ((1.0 / p.q).ln() + delta)).exp())
        .collect())
}

fn integrate(k: usize, n: usize, m: usize, p: &ModelParams, radii: &[f64], nodes: usize) -> Result<f64> {
    let grids: Vec<Vec<(Complex64, Complex64)>> = radii
        .iter()
        .map(|&r| contour_nodes(&QuadratureSpec::circle(r, nodes)))
        .collect::<Result<_>>()?;
    let vals: Vec<Vec<Complex64>> = grids
        .iter()
        .map(|g| g.iter().map(|(z, w)| single(*z, n, m, p) * w).collect())
        .collect();
    let mut idx = vec![0usize; k];
    let mut acc = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    loop {
        let mut term = one;
        for i in 0..k {
            term *= vals[i][idx[i]];
        }
        for i in 0..k {
            for j in i + 1..k {
                let (zi, zj) = (grids[i][idx[i]].0, grids[j][idx[j]].0);
                term *= (zi - zj) / (zi - p.q * zj) * (one - p.q * zi * zj) / (one - zi * zj);
            }
        }
        acc += term;
        let mut d = 0;
        loop {
            idx[d] += 1;
            if idx[d] < nodes {
                break;
            }
            idx[d] = 0;
            d += 1;
            if d == k {
                let pre = p.q.powi((k * (k - 1) / 2) as i32);
                return Ok((acc * pre).re);
            }
        }
    }
}

/// E[q^{−k h(n,m)}] for 1 ≤ n ≤ m, k ≤ 3, by nested circles.
pub fn qmoment_contour(n: usize, m: usize, k: usize, params: &ModelParams) -> Result<QMoment> {
    if !(1 <= n && n <= m && m <= params.a.len()) {
        return Err(invalid(format!("need 1 <= n <= m <= {}, got n={n}, m={m}", params.a.len())));
    }
    if k == 0 {
        return Ok(QMoment { value: 1.0, estimate: 0.0, radii: vec![] });
    }
    if k > 3 {
        return Err(Error::TooLarge(format!("k={k} > 3 nested contours")));
    }
    if !(params.q > 0.0 && params.q < 1.0) {
        return Err(invalid(format!("q={} outside (0,1)", params.q)));
    }
    let radii = nested_radii(k, params, m)?;
    let base = if k == 3 { 48 } else { 128 };
    let coarse = integrate(k, n, m, params, &radii, base)?;
    let fine = integrate(k, n, m, params, &radii, 2 * base)?;
    Ok(QMoment { value: fine, estimate: (fine - coarse).abs(), radii })
}
