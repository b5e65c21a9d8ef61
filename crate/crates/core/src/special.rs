//! q-Pochhammer symbols, the Jacobi theta function θ₃, and contour quadrature.

use std::f64::consts::PI;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

const QPOCH_TOL: f64 = 1e-18;

/// Value together with a bound on its truncation error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certified<T> {
    pub value: T,
    pub error_bound: f64,
}

/// (a;q)_n for finite n.
pub fn qpoch_finite(a: Complex64, q: f64, n: usize) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    let mut aq = a;
    for _ in 0..n {
        acc *= 1.0 - aq;
        aq *= q;
    }
    acc
}

/// (a;q)_n for real arguments.
pub fn qpoch_finite_real(a: f64, q: f64, n: usize) -> f64 {
    let mut acc = 1.0;
    let mut aq = a;
    for _ in 0..n {
        acc *= 1.0 - aq;
        aq *= q;
    }
    acc
}

/// (a;q)_∞, truncated once |a|q^m < 1e-18·(1−q).
///
/// Hot path for kernel integrands; see [`qpoch_inf_certified`] for the bound.
#[inline]
pub fn qpoch_inf(a: Complex64, q: f64) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    let mut aq = a;
    let stop = QPOCH_TOL * (1.0 - q);
    while aq.norm() >= stop {
        acc *= 1.0 - aq;
        aq *= q;
    }
    acc
}

/// (a;q)_∞ for real a.
#[inline]
pub fn qpoch_inf_real(a: f64, q: f64) -> f64 {
    let mut acc = 1.0;
    let mut aq = a;
    let stop = QPOCH_TOL * (1.0 - q);
    while aq.abs() >= stop {
        acc *= 1.0 - aq;
        aq *= q;
    }
    acc
}

/// (a;q)_∞ with a relative truncation certificate.
pub fn qpoch_inf_certified(a: Complex64, q: f64, tol: f64) -> Result<Certified<Complex64>> {
    if !(0.0..1.0).contains(&q.abs()) {
        return Err(invalid(format!("|q|={} must be < 1 for an infinite product", q.abs())));
    }
    let mut acc = Complex64::new(1.0, 0.0);
    let mut aq = a;
    let stop = tol * (1.0 - q.abs());
    while aq.norm() >= stop {
        acc *= 1.0 - aq;
        aq *= q;
    }
    // |log ∏_{k≥m}(1−aq^k)| ≤ Σ|a q^k|/(1−|a q^k|) ≤ r/((1−q)(1−r)), r = |a q^m|
    let r = aq.norm();
    let tail = r / ((1.0 - q.abs()) * (1.0 - r));
    Ok(Certified { value: acc, error_bound: acc.norm() * (tail.exp() - 1.0) })
}

/// θ₃(ζ;q) = (q;q)_∞(−√q ζ;q)_∞(−√q/ζ;q)_∞ = Σ_k q^{k²/2} ζ^k.
pub fn theta3(zeta: Complex64, q: f64) -> Result<Complex64> {
    if zeta.norm() == 0.0 {
        return Err(invalid("theta3 requires zeta != 0"));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(invalid(format!("theta3 requires 0<q<1, got {q}")));
    }
    Ok(theta3_unchecked(zeta, q))
}

#[inline]
pub(crate) fn theta3_unchecked(zeta: Complex64, q: f64) -> Complex64 {
    let sq = q.sqrt();
    qpoch_inf(Complex64::new(q, 0.0), q) * qpoch_inf(-sq * zeta, q) * qpoch_inf(-sq / zeta, q)
}

/// Contour shapes used by the kernels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Contour {
    /// Positively oriented circle |z| = r.
    Circle { r: f64 },
    /// Two rays from δ at angles ±π/3, traversed upward, truncated at length `len`.
    Rays { delta: f64, len: f64 },
    /// Circle of radius r with the part Re z > x0 replaced by the vertical segment Re z = x0.
    Flattened { r: f64, x0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub contour: Contour,
    pub nodes: usize,
    pub tol: f64,
}

impl QuadratureSpec {
    pub fn circle(r: f64, nodes: usize) -> Self {
        Self { contour: Contour::Circle { r }, nodes, tol: 1e-10 }
    }

    pub fn rays(delta: f64, len: f64, nodes: usize) -> Self {
        Self { contour: Contour::Rays { delta, len }, nodes, tol: 1e-10 }
    }

    pub fn doubled(&self) -> Self {
        Self { nodes: self.nodes * 2, ..*self }
    }
}

/// Nodes z_j and weights w_j with Σ_j w_j f(z_j) ≈ (2πi)⁻¹ ∮ f(z) dz.
pub fn contour_nodes(spec: &QuadratureSpec) -> Result<Vec<(Complex64, Complex64)>> {
    let n = spec.nodes;
    if n < 2 {
        return Err(invalid("quadrature needs at least 2 nodes"));
    }
    let i2pi = Complex64::new(0.0, 2.0 * PI);
    match spec.contour {
        Contour::Circle { r } => {
            if !(r > 0.0) {
                return Err(invalid(format!("circle radius {r} must be positive")));
            }
            Ok((0..n)
                .map(|j| {
                    let th = 2.0 * PI * (j as f64 + 0.5) / n as f64;
                    let z = Complex64::from_polar(r, th);
                    // dz = i z dθ, dθ = 2π/n
                    (z, z / n as f64)
                })
                .collect())
        }
        Contour::Rays { delta, len } => {
            let gl = gauss_legendre(n)?;
            let up = Complex64::from_polar(1.0, PI / 3.0);
            let dn = Complex64::from_polar(1.0, -PI / 3.0);
            let mut out = Vec::with_capacity(2 * n);
            for &(x, w) in &gl {
                let s = 0.5 * (x + 1.0) * len;
                let ws = 0.5 * w * len;
                // incoming ray δ + ∞·e^{−iπ/3} → δ has dz = −e^{−iπ/3} ds
                out.push((delta + s * dn, -dn * ws / i2pi));
                out.push((delta + s * up, up * ws / i2pi));
            }
            Ok(out)
        }
        Contour::Flattened { r, x0 } => {
            if !(x0.abs() < r) {
                return Err(invalid(format!("flattening line {x0} does not cut the circle r={r}")));
            }
            let gl = gauss_legendre(n)?;
            let h = (r * r - x0 * x0).sqrt();
            let th0 = (x0 / r).acos();
            let mut out = Vec::with_capacity(2 * n);
            for &(x, w) in &gl {
                // vertical segment from x0 − ih to x0 + ih
                let y = x * h;
                out.push((Complex64::new(x0, y), Complex64::new(0.0, w * h) / i2pi));
                // arc from angle th0 to 2π − th0
                let th = th0 + 0.5 * (x + 1.0) * (2.0 * PI - 2.0 * th0);
                let z = Complex64::from_polar(r, th);
                let dth = 0.5 * w * (2.0 * PI - 2.0 * th0);
                out.push((z, Complex64::new(0.0, 1.0) * z * dth / i2pi));
            }
            Ok(out)
        }
    }
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> Result<Vec<(f64, f64)>> {
    let rule = GaussLegendre::new(n).map_err(|e| invalid(format!("Gauss-Legendre rule: {e}")))?;
    Ok(rule.as_node_weight_pairs().to_vec())
}

/// Result of a contour integral with its node-doubling self-consistency estimate.
#[derive(Debug, Clone, Copy)]
pub struct ContourIntegral {
    pub value: Complex64,
    pub estimate: f64,
}

/// (2πi)⁻¹ ∮ f(z) dz, evaluated with N and 2N nodes.
pub fn contour_integrate<F>(f: F, spec: &QuadratureSpec) -> Result<ContourIntegral>
where
    F: Fn(Complex64) -> Complex64,
{
    let sum = |s: &QuadratureSpec| -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (z, w) in contour_nodes(s)? {
            let v = f(z);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite(format!("integrand at z={z}")));
            }
            acc += w * v;
        }
        Ok(acc)
    };
    let coarse = sum(spec)?;
    let fine = sum(&spec.doubled())?;
    Ok(ContourIntegral { value: fine, estimate: (fine - coarse).norm() })
}

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}
