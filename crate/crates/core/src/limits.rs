//! F_GSE, F_GOE and the crossover F_cross(s;ξ) as Fredholm Pfaffians on L²(s,∞), by ray-contour
//! quadrature for the kernels and Gauss–Legendre Nyström discretization on (s, s+L).

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::pfaffian::pfaffian_unchecked;
use crate::special::gauss_legendre;

type C = Complex64;

/// Limit law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LimitFamily {
    Gse,
    Goe,
    Cross { xi: f64 },
}

/// Contour and Nyström settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitKernelSpec {
    pub family: LimitFamily,
    /// Vertex of the rays δ + e^{±iπ/3}[0, len).
    pub delta: f64,
    pub ray_len: f64,
    /// Gauss–Legendre nodes per ray panel.
    pub panel_nodes: usize,
    /// Nyström nodes on (s, s+L).
    pub nystrom_nodes: usize,
    /// Truncation length L; `None` picks it from the decay certificate.
    pub length: Option<f64>,
}

impl LimitKernelSpec {
    pub fn new(family: LimitFamily) -> Result<Self> {
        let delta = match family {
            LimitFamily::Cross { xi } => {
                if !(xi > 0.0) {
                    return Err(invalid(format!("crossover parameter xi={xi} must be positive")));
                }
                1.0f64.min(xi / 2.0)
            }
            _ => 1.0,
        };
        let spec = LimitKernelSpec { family, delta, ray_len: 7.0, panel_nodes: 24, nystrom_nodes: 40, length: None };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        self.delta = delta;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) {
            return Err(invalid(format!("ray offset delta={} must be positive", self.delta)));
        }
        if let LimitFamily::Cross { xi } = self.family {
            if !(self.delta < xi) {
                return Err(invalid(format!("ray offset delta={} must be below xi={xi}", self.delta)));
            }
        }
        if self.panel_nodes < 4 || self.nystrom_nodes < 4 {
            return Err(invalid("too few quadrature nodes"));
        }
        Ok(())
    }
}

/// Ray nodes α_j and weights dα_j/(2πi) on C_δ, graded toward the vertex.
fn ray_nodes(spec: &LimitKernelSpec) -> Result<Vec<(C, C)>> {
    let gl = gauss_legendre(spec.panel_nodes)?;
    let mut edges = vec![0.0];
    let mut h = spec.delta.min(0.5);
    while *edges.last().unwrap() < spec.ray_len {
        let next = (edges.last().unwrap() + h).min(spec.ray_len);
        edges.push(next);
        h *= 2.0;
    }
    let up = C::from_polar(1.0, PI / 3.0);
    let dn = C::from_polar(1.0, -PI / 3.0);
    let i2pi = C::new(0.0, 2.0 * PI);
    let mut out = Vec::new();
    for e in edges.windows(2) {
        let (a, b) = (e[0], e[1]);
        for &(x, w) in &gl {
            let r = a + 0.5 * (x + 1.0) * (b - a);
            let wr = 0.5 * w * (b - a);
            out.push((spec.delta + r * dn, -dn * wr / i2pi));
            out.push((spec.delta + r * up, up * wr / i2pi));
        }
    }
    Ok(out)
}

/// Contour data: nodes α_j, the double-integral weights W_jl and the single-integral weights of b.
struct Contour {
    a: Vec<C>,
    w: DMatrix<C>,
    b: Vec<C>,
}

impl Contour {
    fn new(spec: &LimitKernelSpec) -> Result<Self> {
        let nodes = ray_nodes(spec)?;
        let n = nodes.len();
        let a: Vec<C> = nodes.iter().map(|p| p.0).collect();
        let e: Vec<C> = nodes.iter().map(|p| (p.0 * p.0 * p.0 / 3.0).exp() * p.1).collect();
        let w = DMatrix::from_fn(n, n, |j, l| {
            let (x, y) = (a[j], a[l]);
            let mut f = (x - y) / (x * y * (x + y));
            if let LimitFamily::Cross { xi } = spec.family {
                f *= (xi + x) * (xi + y) / ((xi - x) * (xi - y));
            }
            0.25 * f * e[j] * e[l]
        });
        let b = (0..n).map(|j| e[j] / (2.0 * a[j])).collect();
        Ok(Contour { a, w, b })
    }

    /// (k, −∂_v k, −∂_u k, ∂_u∂_v k) on the grid us × vs.
    fn blocks(&self, us: &[f64], vs: &[f64], goe: bool) -> ([DMatrix<C>; 4], f64) {
        let n = self.a.len();
        let eu = DMatrix::from_fn(us.len(), n, |i, j| (-us[i] * self.a[j]).exp());
        let ev = DMatrix::from_fn(vs.len(), n, |i, j| (-vs[i] * self.a[j]).exp());
        let ea = DMatrix::from_fn(us.len(), n, |i, j| eu[(i, j)] * self.a[j]);
        let eb = DMatrix::from_fn(vs.len(), n, |i, j| ev[(i, j)] * self.a[j]);
        let p = &eu * &self.w;
        let pa = &ea * &self.w;
        let mut k = &p * ev.transpose();
        let mut kv = &p * eb.transpose();
        let mut ku = &pa * ev.transpose();
        let kuv = &pa * eb.transpose();
        if goe {
            // b(u) − b(v) enters with the sign fixed by upward-oriented rays
            let bu: Vec<C> = (0..us.len()).map(|i| (0..n).map(|j| eu[(i, j)] * self.b[j]).sum()).collect();
            let bv: Vec<C> = (0..vs.len()).map(|i| (0..n).map(|j| ev[(i, j)] * self.b[j]).sum()).collect();
            let bpu: Vec<C> = (0..us.len()).map(|i| (0..n).map(|j| -ea[(i, j)] * self.b[j]).sum()).collect();
            let bpv: Vec<C> = (0..vs.len()).map(|i| (0..n).map(|j| -eb[(i, j)] * self.b[j]).sum()).collect();
            for i in 0..us.len() {
                for j in 0..vs.len() {
                    k[(i, j)] -= bu[i] - bv[j];
                    kv[(i, j)] -= bpv[j];
                    ku[(i, j)] += bpu[i];
                }
            }
        }
        let imag = [&k, &kv, &ku, &kuv].iter().flat_map(|m| m.iter().map(|z| z.im.abs())).fold(0.0, f64::max);
        ([k, kv, ku, kuv], imag)
    }
}

/// The 2×2 kernel block at (u, v).
pub fn k_limit(u: f64, v: f64, spec: &LimitKernelSpec) -> Result<[[f64; 2]; 2]> {
    spec.validate()?;
    let c = Contour::new(spec)?;
    let ([k, kv, ku, kuv], _) = c.blocks(&[u], &[v], spec.family == LimitFamily::Goe);
    Ok([[k[(0, 0)].re, kv[(0, 0)].re], [ku[(0, 0)].re, kuv[(0, 0)].re]])
}

/// b(u) = (2πi)⁻¹∫_{C₁} e^{α³/3−αu}/(2α) dα.
pub fn b_limit(u: f64) -> Result<f64> {
    let spec = LimitKernelSpec::new(LimitFamily::Goe)?;
    let c = Contour::new(&spec)?;
    Ok(c.a.iter().zip(&c.b).map(|(a, b)| (-u * a).exp() * b).sum::<C>().re)
}

/// A value of F with its diagnostics.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LimitValue {
    pub s: f64,
    pub value: f64,
    /// |F(m nodes) − F(2m nodes)|
    pub refinement: f64,
    pub nodes: usize,
    pub length: f64,
    pub imag_residual: f64,
    pub skew_deviation: f64,
}

struct Evaluator {
    spec: LimitKernelSpec,
    contour: Contour,
    /// C with |K(u,v)| ≤ C e^{−δ(u+v)} for the double-integral part
    decay_const: f64,
}

impl Evaluator {
    fn new(spec: &LimitKernelSpec) -> Result<Self> {
        spec.validate()?;
        let contour = Contour::new(spec)?;
        let n = contour.a.len();
        let mut c = 0.0;
        for j in 0..n {
            for l in 0..n {
                let m = contour.a[j].norm().max(1.0) * contour.a[l].norm().max(1.0);
                c += contour.w[(j, l)].norm() * m;
            }
        }
        Ok(Evaluator { spec: *spec, contour, decay_const: c })
    }

    /// Smallest L ≥ 12 with C e^{−2δ(s+L)}/(2δ) below 1e−14.
    fn length(&self, s: f64) -> f64 {
        if let Some(l) = self.spec.length {
            return l;
        }
        let d = self.spec.delta;
        let need = ((self.decay_const / (2.0 * d) / 1e-14).ln() / (2.0 * d) - s).max(0.0);
        need.max(12.0).min(40.0)
    }

    fn pf(&self, s: f64, len: f64, m: usize) -> Result<(f64, f64, f64)> {
        let gl = gauss_legendre(m)?;
        let us: Vec<f64> = gl.iter().map(|&(x, _)| s + 0.5 * (x + 1.0) * len).collect();
        let sw: Vec<f64> = gl.iter().map(|&(_, w)| (0.5 * w * len).sqrt()).collect();
        let ([k, kv, ku, kuv], imag) = self.contour.blocks(&us, &us, self.spec.family == LimitFamily::Goe);
        let mut a = DMatrix::<f64>::zeros(2 * m, 2 * m);
        for i in 0..m {
            for j in 0..m {
                let sc = sw[i] * sw[j];
                a[(2 * i, 2 * j)] = -k[(i, j)].re * sc;
                a[(2 * i, 2 * j + 1)] = -kv[(i, j)].re * sc;
                a[(2 * i + 1, 2 * j)] = -ku[(i, j)].re * sc;
                a[(2 * i + 1, 2 * j + 1)] = -kuv[(i, j)].re * sc;
            }
            a[(2 * i, 2 * i + 1)] += 1.0;
            a[(2 * i + 1, 2 * i)] -= 1.0;
        }
        let at = a.transpose();
        let skew = (&a + &at).amax();
        Ok((pfaffian_unchecked((&a - &at) * 0.5), imag, skew))
    }

    fn eval(&self, s: f64, tol: f64) -> Result<LimitValue> {
        let len = self.length(s);
        let mut m = self.spec.nystrom_nodes;
        let mut prev = self.pf(s, len, m)?;
        while m <= 640 {
            let next = self.pf(s, len, 2 * m)?;
            let refinement = (next.0 - prev.0).abs();
            if refinement < tol {
                return Ok(LimitValue {
                    s,
                    value: next.0,
                    refinement,
                    nodes: 2 * m,
                    length: len,
                    imag_residual: next.1,
                    skew_deviation: next.2,
                });
            }
            prev = next;
            m *= 2;
        }
        Err(Error::Convergence(format!(
            "Nystrom refinement did not settle at s={s} (L={len}, up to {m} nodes, last change above {tol:e})"
        )))
    }
}

/// F(s) with Nyström refinement tolerance 1e−10.
pub fn f_limit(s: f64, spec: &LimitKernelSpec) -> Result<LimitValue> {
    Evaluator::new(spec)?.eval(s, 1e-10)
}

/// F on a grid of s values.
pub fn limit_table(grid: &[f64], spec: &LimitKernelSpec) -> Result<Vec<LimitValue>> {
    let ev = Evaluator::new(spec)?;
    grid.par_iter().map(|&s| ev.eval(s, 1e-10)).collect()
}

/// Evaluator of F for repeated queries.
pub struct LimitCdf {
    ev: Evaluator,
}

impl LimitCdf {
    pub fn new(family: LimitFamily) -> Result<Self> {
        Ok(LimitCdf { ev: Evaluator::new(&LimitKernelSpec::new(family)?)? })
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        Ok(self.ev.eval(s, 1e-10)?.value)
    }
}
