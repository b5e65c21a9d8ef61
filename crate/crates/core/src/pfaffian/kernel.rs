//! The 2×2 block kernel K = (k, −2D_y k; −2D_x k, 4D_xD_y k + (D_x−D_y)Δ), its analytic
//! continuations for ν = 1 and ν < 1, and windowed Fredholm Pfaffians Pf(J−K) on l²(Z_{>s}).
//!
//! Lattice exponents are z^{−x−1} and w^{−y−2} (the half-integer shift of x and y), so the
//! integrands are single valued on circles.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pfaffian_unchecked;
use crate::error::{invalid, Error, Result};
use crate::params::ModelParams;
use crate::special::{qpoch_finite, qpoch_finite_real, qpoch_inf, qpoch_inf_real, theta3_unchecked};

type C = Complex64;

const POLE_MARGIN: f64 = 1e-3;
const IMAG_TOL: f64 = 1e-9;

/// Which F-factor enters the kernel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ModelTag {
    /// F(z) = ∏(1+a_i z)/(1+a_i/z).
    SixVertex { a: Vec<f64> },
    /// F(z) = exp((1−q)τ/2 · (1−z)/(1+z)).
    Asep { tau: f64 },
}

impl ModelTag {
    /// log F(z), any branch.
    pub fn log_f(&self, z: C, q: f64) -> C {
        match self {
            ModelTag::SixVertex { a } => a.iter().map(|&ai| (1.0 + ai * z).ln() - (1.0 + ai / z).ln()).sum(),
            ModelTag::Asep { tau } => (1.0 - q) * tau * 0.5 * (1.0 - z) / (1.0 + z),
        }
    }

    pub fn f(&self, z: C, q: f64) -> C {
        self.log_f(z, q).exp()
    }

    /// Largest modulus of a singularity of F (all lie inside the unit disc or on it).
    fn singular_radius(&self) -> f64 {
        match self {
            ModelTag::SixVertex { a } => a.iter().fold(0.0, |m, &x| m.max(x.abs())),
            ModelTag::Asep { .. } => 1.0,
        }
    }
}

/// Kernel regime: ν > 1 (plain kernel), ν = 1 (boundary-corrected kernel), ν < 1 (continued kernel).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Base,
    Goe,
    Gauss,
}

impl Regime {
    pub fn for_nu(nu: f64) -> Regime {
        if (nu - 1.0).abs() <= 1e-12 {
            Regime::Goe
        } else if nu > 1.0 {
            Regime::Base
        } else {
            Regime::Gauss
        }
    }
}

/// Contour radii: z on |z| = r, w on |w| = r′, and the boundary integral B on |w| = r_b.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Radii {
    pub r: f64,
    pub r_prime: f64,
    pub r_b: f64,
}

impl Radii {
    /// Default radii for a regime.
    pub fn default_for(regime: Regime, q: f64, t: f64, nu: f64) -> Radii {
        let g2 = (t * nu).abs();
        let inv_g2 = if g2 > 0.0 { 1.0 / g2 } else { f64::INFINITY };
        let (r, r_prime) = match regime {
            Regime::Base | Regime::Goe => {
                let mut u = (1.0 / q.sqrt()).min(inv_g2);
                if regime == Regime::Base {
                    u = u.min(nu);
                }
                (1.0 + 2.0 * (u - 1.0) / 3.0, 1.0 + (u - 1.0) / 3.0)
            }
            Regime::Gauss => {
                let hi = 1.15f64.min((inv_g2 * nu).sqrt());
                (hi / nu, (1.0 + (hi - 1.0) * 8.0 / 15.0) / nu)
            }
        };
        let lo_b = 1.0f64.max(1.0 / nu);
        let hi_b = (1.0 / (q * nu)).min(inv_g2);
        Radii { r, r_prime, r_b: (lo_b * hi_b).sqrt() }
    }
}

/// Parameters of a kernel instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub q: f64,
    pub t: f64,
    pub nu: f64,
    pub zeta: f64,
    pub model: ModelTag,
    pub regime: Regime,
    pub radii: Radii,
    /// Trapezoid nodes per circle.
    pub nodes: usize,
}

fn default_nodes(model: &ModelTag) -> usize {
    let scale = match model {
        ModelTag::SixVertex { a } => a.len() as f64,
        ModelTag::Asep { tau } => *tau,
    };
    ((2.0 * scale + 256.0) as usize).next_power_of_two().clamp(256, 4096)
}

impl KernelParams {
    /// Regime taken from ν, default radii and node count.
    pub fn new(q: f64, t: f64, nu: f64, zeta: f64, model: ModelTag) -> Result<Self> {
        let regime = Regime::for_nu(nu);
        let nodes = default_nodes(&model);
        let kp = KernelParams { q, t, nu, zeta, model, regime, radii: Radii::default_for(regime, q, t, nu), nodes };
        kp.validate()?;
        Ok(kp)
    }

    pub fn sixvertex(params: &ModelParams) -> Result<Self> {
        Self::new(params.q, params.t, params.nu, params.zeta, ModelTag::SixVertex { a: params.a.clone() })
    }

    pub fn asep(tau: f64, params: &ModelParams) -> Result<Self> {
        if !(tau >= 0.0) {
            return Err(invalid(format!("tau={tau} must be nonnegative")));
        }
        Self::new(params.q, params.t, params.nu, params.zeta, ModelTag::Asep { tau })
    }

    /// Requests a regime explicitly; errors when it does not match ν.
    pub fn with_regime(mut self, regime: Regime) -> Result<Self> {
        let actual = Regime::for_nu(self.nu);
        if regime != actual {
            return Err(Error::Regime(format!("regime {regime:?} requested but nu={} is {actual:?}", self.nu)));
        }
        self.regime = regime;
        Ok(self)
    }

    pub fn with_radii(mut self, radii: Radii) -> Result<Self> {
        self.radii = radii;
        self.validate()?;
        Ok(self)
    }

    pub fn with_nodes(mut self, nodes: usize) -> Self {
        self.nodes = nodes;
        self
    }

    pub fn gamma1(&self) -> f64 {
        1.0 / (self.nu * self.q.sqrt())
    }

    pub fn gamma2(&self) -> f64 {
        -self.t * self.nu
    }

    /// Indices k ≥ 0 with νq^{−k} inside the z-contour.
    pub fn residue_indices(&self) -> Vec<usize> {
        (0..).take_while(|&k| self.nu * self.q.powi(-(k as i32)) < self.radii.r).collect()
    }

    /// Indices m ≥ 1 with q^{−m} < r r′.
    pub fn s_indices(&self) -> Vec<usize> {
        (1..).take_while(|&m| self.q.powi(-(m as i32)) < self.radii.r * self.radii.r_prime).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let (q, t, nu) = (self.q, self.t, self.nu);
        if !(q > 0.0 && q < 1.0) {
            return Err(invalid(format!("q={q} outside (0,1)")));
        }
        if !(0.0..1.0).contains(&t) {
            return Err(invalid(format!("t={t} outside [0,1)")));
        }
        if !(nu > 0.0) {
            return Err(invalid(format!("nu={nu} must be positive")));
        }
        if !(self.zeta > 0.0) {
            return Err(invalid(format!("zeta={} must be positive", self.zeta)));
        }
        if self.nodes < 16 {
            return Err(invalid("at least 16 quadrature nodes required"));
        }
        if let ModelTag::SixVertex { a } = &self.model {
            if a.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
                return Err(invalid("rapidities a_i must lie in (0,1)"));
            }
        }
        if Regime::for_nu(nu) != self.regime {
            return Err(Error::Regime(format!("regime {:?} does not match nu={nu}", self.regime)));
        }
        let Radii { r, r_prime: rp, r_b } = self.radii;
        let near = |x: f64, y: f64| (x - y).abs() <= POLE_MARGIN * y.abs().max(1.0);
        let pole = |msg: String| Err(Error::Pole(msg));
        if !(rp < r) {
            return pole(format!("need r'={rp} < r={r}"));
        }
        if !(rp > 1.0) || near(rp, 1.0) {
            return pole(format!("contour r'={rp} must enclose the poles z=±1 of 1/(1/z^2;q)"));
        }
        if rp <= self.model.singular_radius() {
            return pole(format!("contour r'={rp} must enclose the singularities of F"));
        }
        let g2 = self.gamma2().abs();
        if g2 > 0.0 && !(r < 1.0 / g2 && !near(r, 1.0 / g2)) {
            return pole(format!("contour r={r} must stay inside the pole 1/|gamma2|={} of the D factor", 1.0 / g2));
        }
        if g2 > 0.0 && !(r_b < 1.0 / g2) {
            return pole(format!("contour r_b={r_b} must stay inside 1/|gamma2|={}", 1.0 / g2));
        }
        match self.regime {
            Regime::Base | Regime::Goe => {
                if !(r * r < 1.0 / q) {
                    return pole(format!("contour r={r} must satisfy r < q^(-1/2) (pole zw=q^-1)"));
                }
            }
            Regime::Gauss => {
                if !(rp > 1.0 / nu) {
                    return pole(format!("contour r'={rp} must enclose 1/nu={}", 1.0 / nu));
                }
            }
        }
        for k in 0..64 {
            let p = nu * q.powi(-k);
            if p > 4.0 * r {
                break;
            }
            if near(r, p) || near(rp, p) {
                return pole(format!("a contour passes through the pole nu*q^-{k}={p} of g"));
            }
            if (rp < p) != (r < p) {
                return pole(format!("the pole nu*q^-{k}={p} of g lies between r'={rp} and r={r}"));
            }
        }
        for m in 1..64 {
            let p = q.powi(-m);
            if p > 4.0 * r * rp {
                break;
            }
            if near(r * rp, p) {
                return pole(format!("r*r'={} meets the pole zw=q^-{m} of 1/(qzw;q)", r * rp));
            }
        }
        let b_hi = 1.0 / (q * nu);
        if !(r_b > 1.0 && r_b < b_hi) {
            return pole(format!("contour r_b={r_b} must lie in (1, q^-1/nu={b_hi}) for B"));
        }
        if self.regime == Regime::Gauss && !(r_b > 1.0 / nu) {
            return pole(format!("contour r_b={r_b} must exceed 1/nu"));
        }
        Ok(())
    }
}

/// Closed forms shared by all integrands.
struct Pieces {
    q: f64,
    nu: f64,
    g2: f64,
    zeta: f64,
    /// (1−γ₂)^{−2}
    c: f64,
    qq: f64,
    theta0: f64,
}

impl Pieces {
    fn new(p: &KernelParams) -> Self {
        let g2 = p.gamma2();
        let theta0 = theta3_unchecked(C::new(p.zeta * p.zeta, 0.0), p.q * p.q).re;
        Pieces { q: p.q, nu: p.nu, g2, zeta: p.zeta, c: (1.0 - g2).powi(-2), qq: qpoch_inf_real(p.q, p.q), theta0 }
    }

    fn g(&self, u: C) -> C {
        let q = self.q;
        qpoch_inf(1.0 / (self.nu * u), q) * qpoch_inf(self.g2 / u, q)
            / (qpoch_inf(u / self.nu, q) * qpoch_inf(self.g2 * q * u, q))
    }

    fn t3(&self, u: C) -> C {
        theta3_unchecked(self.zeta * self.zeta * u * u, self.q * self.q) / self.theta0
    }

    /// Multiplier realizing D^{(γ₂)} on u^{−x}.
    fn d(&self, u: C) -> C {
        let g = self.g2;
        (1.0 - g).powi(2) * (1.0 - u * u) / (2.0 * (u - g) * (1.0 - g * u))
    }

    /// Per-node factor g(u)/(1/u²;q)_∞.
    fn node(&self, u: C) -> C {
        self.g(u) / qpoch_inf(1.0 / (u * u), self.q)
    }

    /// Pair factor of the integrand with (qzw;q)_∞ missing its factor 1 − q^{skip+1}zw when skip is set.
    fn pair(&self, z: C, w: C, skip: Option<usize>) -> C {
        let q = self.q;
        let zw = z * w;
        let den = match skip {
            None => qpoch_inf(q * zw, q),
            Some(m) => qpoch_skip(q * zw, q, m),
        };
        self.c * self.qq * self.qq * qpoch_inf(w / z, q) * qpoch_inf(q * z / w, q) / (qpoch_inf(1.0 / zw, q) * den)
            * self.t3(zw)
    }

    /// Integrand of B without F.
    fn b_int(&self, w: C) -> C {
        let q = self.q;
        qpoch_inf(self.g2 / w, q) * qpoch_inf(q * self.nu / w, q)
            / (qpoch_inf(self.g2 * q * w, q) * qpoch_inf(1.0 / (w * w), q) * qpoch_inf(q * self.nu * w, q))
            * self.t3(self.nu * w)
    }

    /// Coefficient of z_k^{−x−1}F(z_k) in A_k(x), z_k = νq^{−k}.
    fn a_coef(&self, k: usize) -> f64 {
        let (q, nu) = (self.q, self.nu);
        let qk = q.powi(-(k as i32));
        let zk = nu * qk;
        self.c * (-nu * qk) / (qpoch_finite_real(qk, q, k) * self.qq)
            * qpoch_finite_real(1.0 / (qk * nu * nu), q, k)
            * qpoch_inf_real(self.g2 / zk, q)
            / qpoch_inf_real(self.g2 * q * zk, q)
            * self.qq
            * self.qq
            * q.powi(-((k * k) as i32))
            * self.zeta.powi(2 * k as i32)
            * nu.powi(2 * k as i32)
    }
}

/// (a;q)_∞ without its factor 1 − aq^skip.
fn qpoch_skip(a: C, q: f64, skip: usize) -> C {
    qpoch_finite(a, q, skip) * qpoch_inf(a * q.powi(skip as i32 + 1), q)
}

/// Circle nodes with ln u and the trapezoid weight u/N of (2πi)⁻¹∮ du.
fn circle(r: f64, n: usize) -> Vec<(C, C, C)> {
    (0..n)
        .map(|j| {
            let th = 2.0 * PI * (j as f64 + 0.5) / n as f64;
            let u = C::from_polar(r, th);
            (u, C::new(r.ln(), th), u / n as f64)
        })
        .collect()
}

/// Quadrature data for one S_m term on one w-circle.
struct STerm {
    /// ln z with z = q^{−m}/w
    lz: Vec<C>,
    lfz: Vec<C>,
    dz: Vec<C>,
    lw: Vec<C>,
    /// log F(w) plus ln(weight)
    lfw: Vec<C>,
    dw: Vec<C>,
    h: Vec<C>,
}

/// The 2×2 block kernel in one regime with its quadrature caches.
pub struct SkewBlockKernel {
    params: KernelParams,
    pieces: Pieces,
    /// z nodes: ln z, log F(z) + ln(z/N), d(z)
    lz: Vec<C>,
    fz: Vec<C>,
    dz: Vec<C>,
    lw: Vec<C>,
    fw: Vec<C>,
    dw: Vec<C>,
    /// G[j,k] without F.
    g: DMatrix<C>,
    /// (k, z_k, log F(z_k) + ln coef) for the A_k residues
    a_terms: Vec<(usize, f64, f64, f64)>,
    /// B nodes: ln w, log F(w) + ln(w/N), integrand without F, d(w)
    b_nodes: Vec<(C, C, C, C)>,
    /// per m: (contour for x ≤ y, contour for x > y)
    s_terms: Vec<(usize, STerm, STerm)>,
    cache: Mutex<HashMap<(i64, i64), [f64; 4]>>,
}

/// Row-wise evaluation of exp(f_j − e·ln u_j) for a set of lattice points.
fn exp_matrix(points: &[i64], shift: i64, l: &[C], f: &[C], scale: Option<&[C]>) -> DMatrix<C> {
    let n = l.len();
    DMatrix::from_fn(points.len(), n, |i, j| {
        let e = (points[i] + shift) as f64;
        let v = (f[j] - e * l[j]).exp();
        match scale {
            Some(s) => v * s[j],
            None => v,
        }
    })
}

impl SkewBlockKernel {
    pub fn new(params: KernelParams) -> Result<Self> {
        params.validate()?;
        let pc = Pieces::new(&params);
        let n = params.nodes;
        let q = params.q;
        let zn = circle(params.radii.r, n);
        let wn = circle(params.radii.r_prime, n);
        let lz = zn.iter().map(|x| x.1).collect::<Vec<_>>();
        let lw = wn.iter().map(|x| x.1).collect::<Vec<_>>();
        let fz = zn.iter().map(|x| params.model.log_f(x.0, q) + x.2.ln()).collect::<Vec<_>>();
        let fw = wn.iter().map(|x| params.model.log_f(x.0, q) + x.2.ln()).collect::<Vec<_>>();
        let dz = zn.iter().map(|x| pc.d(x.0)).collect::<Vec<_>>();
        let dw = wn.iter().map(|x| pc.d(x.0)).collect::<Vec<_>>();
        let nz: Vec<C> = zn.iter().map(|x| pc.node(x.0)).collect();
        let nw: Vec<C> = wn.iter().map(|x| pc.node(x.0)).collect();
        let rows: Vec<Vec<C>> = (0..n)
            .into_par_iter()
            .map(|j| (0..n).map(|k| pc.pair(zn[j].0, wn[k].0, None) * nz[j] * nw[k]).collect())
            .collect();
        let g = DMatrix::from_fn(n, n, |j, k| rows[j][k]);
        for v in g.iter() {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite("kernel integrand on the contours".into()));
            }
        }

        let a_terms = params
            .residue_indices()
            .into_iter()
            .map(|k| {
                let zk = params.nu * q.powi(-(k as i32));
                let coef = pc.a_coef(k);
                (k, zk, params.model.log_f(C::new(zk, 0.0), q).re, coef)
            })
            .collect();

        let b_nodes = circle(params.radii.r_b, n)
            .into_iter()
            .map(|(w, l, wt)| (l, params.model.log_f(w, q) + wt.ln(), pc.b_int(w), pc.d(w)))
            .collect();

        let nu = params.nu;
        let s_terms = params
            .s_indices()
            .into_iter()
            .map(|m| {
                let c = q.powi(-(m as i32));
                let lower = 1.0f64.max(nu * q.powi(1 - m as i32));
                let upper = c.min(1.0 / (q * nu));
                let r1 = (lower.max(1.0 / nu) * upper).sqrt();
                let top2 = upper.min(nu * c);
                let r2 = if top2 > lower { (lower * top2).sqrt() } else { (lower * upper).sqrt() };
                (m, Self::s_contour(&params, &pc, m, r1), Self::s_contour(&params, &pc, m, r2))
            })
            .collect();

        Ok(SkewBlockKernel {
            params,
            pieces: pc,
            lz,
            fz,
            dz,
            lw,
            fw,
            dw,
            g,
            a_terms,
            b_nodes,
            s_terms,
            cache: Mutex::new(HashMap::new()),
        })
    }

    fn s_contour(p: &KernelParams, pc: &Pieces, m: usize, rho: f64) -> STerm {
        let q = p.q;
        let c = q.powi(-(m as i32));
        let nodes = circle(rho, p.nodes);
        let mut st = STerm { lz: vec![], lfz: vec![], dz: vec![], lw: vec![], lfw: vec![], dw: vec![], h: vec![] };
        for (w, lw, wt) in nodes {
            let z = c / w;
            let rest = pc.pair(z, w, Some(m - 1)) * pc.node(z) * pc.node(w);
            // residue of 1/(1 − q^m zw) in z at z = q^{−m}/w
            let h = rest * (-1.0 / (q.powi(m as i32) * w));
            st.lz.push(C::new(c.ln(), 0.0) - lw);
            st.lfz.push(p.model.log_f(z, q));
            st.dz.push(pc.d(z));
            st.lw.push(lw);
            st.lfw.push(p.model.log_f(w, q) + wt.ln());
            st.dw.push(pc.d(w));
            st.h.push(h);
        }
        st
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    /// Contour part (with S_m subtractions) of (k, k12, k22) on rows xs and columns ys, and the largest imaginary part.
    fn contour_blocks(&self, xs: &[i64], ys: &[i64]) -> ([DMatrix<f64>; 3], f64) {
        let az = exp_matrix(xs, 1, &self.lz, &self.fz, None);
        let azd = exp_matrix(xs, 1, &self.lz, &self.fz, Some(&self.dz));
        let bw = exp_matrix(ys, 2, &self.lw, &self.fw, None);
        let bwd = exp_matrix(ys, 2, &self.lw, &self.fw, Some(&self.dw));
        let p = &az * &self.g;
        let pd = &azd * &self.g;
        let mut k11 = &p * bw.transpose();
        let mut k12 = (&p * bwd.transpose()) * C::new(-2.0, 0.0);
        let mut k22 = (&pd * bwd.transpose()) * C::new(4.0, 0.0);
        for (_, upper, lower) in &self.s_terms {
            let tu = Self::s_blocks(upper, xs, ys);
            let tl = Self::s_blocks(lower, xs, ys);
            for i in 0..xs.len() {
                for j in 0..ys.len() {
                    let t = if xs[i] <= ys[j] { &tu } else { &tl };
                    k11[(i, j)] -= t[0][(i, j)];
                    k12[(i, j)] -= t[1][(i, j)];
                    k22[(i, j)] -= t[2][(i, j)];
                }
            }
        }
        let imag = [&k11, &k12, &k22].iter().flat_map(|m| m.iter().map(|v| v.im.abs())).fold(0.0, f64::max);
        ([k11.map(|v| v.re), k12.map(|v| v.re), k22.map(|v| v.re)], imag)
    }

    fn s_blocks(st: &STerm, xs: &[i64], ys: &[i64]) -> [DMatrix<C>; 3] {
        let n = st.h.len();
        let ex = exp_matrix(xs, 1, &st.lz, &st.lfz, None);
        let exd = exp_matrix(xs, 1, &st.lz, &st.lfz, Some(&st.dz));
        let hw: Vec<C> = (0..n).map(|k| st.h[k]).collect();
        let hwd: Vec<C> = (0..n).map(|k| st.h[k] * st.dw[k]).collect();
        let ey = exp_matrix(ys, 2, &st.lw, &st.lfw, Some(&hw));
        let eyd = exp_matrix(ys, 2, &st.lw, &st.lfw, Some(&hwd));
        let t11 = &ex * ey.transpose();
        let t12 = (&ex * eyd.transpose()) * C::new(-2.0, 0.0);
        let t22 = (&exd * eyd.transpose()) * C::new(4.0, 0.0);
        [t11, t12, t22]
    }

    /// A(x) = Σ_k A_k(x) and its D-image.
    fn a_vec(&self, xs: &[i64]) -> (Vec<f64>, Vec<f64>) {
        let mut a = vec![0.0; xs.len()];
        let mut da = vec![0.0; xs.len()];
        for &(_, zk, lf, coef) in &self.a_terms {
            let dk = self.pieces.d(C::new(zk, 0.0)).re;
            for (i, &x) in xs.iter().enumerate() {
                let v = coef * (lf - (x + 1) as f64 * zk.ln()).exp();
                a[i] += v;
                da[i] += dk * v;
            }
        }
        (a, da)
    }

    /// B(y) and its D-image in the normalization of the residue expansion.
    fn b_vec(&self, ys: &[i64]) -> (Vec<f64>, Vec<f64>) {
        let mut b = vec![0.0; ys.len()];
        let mut db = vec![0.0; ys.len()];
        for (i, &y) in ys.iter().enumerate() {
            let mut acc = C::new(0.0, 0.0);
            let mut accd = C::new(0.0, 0.0);
            for &(l, f, bi, d) in &self.b_nodes {
                let v = (f - (y + 2) as f64 * l).exp() * bi;
                acc += v;
                accd += v * d;
            }
            b[i] = acc.re;
            db[i] = accd.re;
        }
        (b, db)
    }

    fn kappa(&self) -> f64 {
        -self.pieces.c * self.pieces.qq
    }

    /// A_k(x), the residue coefficient at z = νq^{−k}, in the normalization where A_0 = 1−γ₂ at ν = 1.
    pub fn a_k(&self, k: usize, x: i64) -> f64 {
        let q = self.params.q;
        let zk = self.params.nu * q.powi(-(k as i32));
        let lf = self.params.model.log_f(C::new(zk, 0.0), q).re;
        self.pieces.a_coef(k) * (lf - (x + 1) as f64 * zk.ln()).exp() / self.kappa()
    }

    /// B(x) in the normalization matching [`Self::a_k`].
    pub fn goe_boundary_b(&self, x: i64) -> f64 {
        self.b_vec(&[x]).0[0] * self.kappa()
    }

    /// Residue indices k included in the continued kernel.
    pub fn a_indices(&self) -> Vec<usize> {
        self.a_terms.iter().map(|t| t.0).collect()
    }

    /// Indices m of the S_m terms.
    pub fn s_indices(&self) -> Vec<usize> {
        self.s_terms.iter().map(|t| t.0).collect()
    }

    /// S_m(x,y) evaluated on the contour for the ordering of (x, y).
    pub fn s_term(&self, m: usize, x: i64, y: i64) -> Result<f64> {
        let (_, up, lo) = self
            .s_terms
            .iter()
            .find(|t| t.0 == m)
            .ok_or_else(|| invalid(format!("no S term with m={m} in this regime")))?;
        let st = if x <= y { up } else { lo };
        Ok(Self::s_blocks(st, &[x], &[y])[0][(0, 0)].re)
    }

    /// S_m(x,y) with an explicit w-radius.
    pub fn s_term_on(&self, m: usize, x: i64, y: i64, rho: f64) -> Result<f64> {
        if !self.s_indices().contains(&m) {
            return Err(invalid(format!("no S term with m={m} in this regime")));
        }
        let st = Self::s_contour(&self.params, &self.pieces, m, rho);
        Ok(Self::s_blocks(&st, &[x], &[y])[0][(0, 0)].re)
    }

    /// Integrand of k(x,y) with respect to (2πi)⁻² dz dw.
    pub fn integrand(&self, z: C, w: C, x: i64, y: i64) -> C {
        let q = self.params.q;
        let lf = self.params.model.log_f(z, q) + self.params.model.log_f(w, q);
        self.pieces.pair(z, w, None) * self.pieces.node(z) * self.pieces.node(w)
            * (lf - (x + 1) as f64 * z.ln() - (y + 2) as f64 * w.ln()).exp()
    }

    /// (2πi)⁻²∮∮ of the integrand with z on a small circle around z0 and w on |w| = r′.
    pub fn numerical_residue(&self, z0: f64, radius: f64, x: i64, y: i64, nodes: usize) -> f64 {
        let zs = circle(radius, nodes);
        let ws = circle(self.params.radii.r_prime, self.params.nodes);
        let total: C = zs
            .par_iter()
            .map(|&(dz, _, wz)| {
                let z = z0 + dz;
                ws.iter().map(|&(w, _, ww)| self.integrand(z, w, x, y) * ww).sum::<C>() * wz
            })
            .sum();
        total.re
    }

    /// Full scalar kernel k(x,y) of the regime.
    pub fn kernel_k(&self, x: i64, y: i64) -> Result<f64> {
        Ok(self.block(x, y)?[0][0])
    }

    /// The 2×2 block K(x,y) of the regime, including the Δ term.
    pub fn block(&self, x: i64, y: i64) -> Result<[[f64; 2]; 2]> {
        if let Some(v) = self.cache.lock().unwrap().get(&(x, y)) {
            return Ok([[v[0], v[1]], [v[2], v[3]]]);
        }
        let ([k11, k12, k22], imag) = self.contour_blocks(&[x], &[y]);
        check_imag(imag, k11[(0, 0)].abs().max(k22[(0, 0)].abs()))?;
        let (ax, dax) = self.a_vec(&[x]);
        let (ay, day) = self.a_vec(&[y]);
        let (bx, dbx) = self.b_vec(&[x]);
        let (by, dby) = self.b_vec(&[y]);
        let kk = k11[(0, 0)] - (ax[0] * by[0] - bx[0] * ay[0]);
        let k12v = k12[(0, 0)] + 2.0 * (ax[0] * dby[0] - bx[0] * day[0]);
        let ([_, k12t, _], _) = self.contour_blocks(&[y], &[x]);
        let k21 = -(k12t[(0, 0)] + 2.0 * (ay[0] * dbx[0] - by[0] * dax[0]));
        let k22v = k22[(0, 0)] - 4.0 * (dax[0] * dby[0] - dbx[0] * day[0]) + self.delta_term(x, y);
        let v = [kk, k12v, k21, k22v];
        self.cache.lock().unwrap().insert((x, y), v);
        Ok([[v[0], v[1]], [v[2], v[3]]])
    }

    /// (D_x − D_y)Δ(x,y) = (1−γ₂)²(γ₂^{y−x−1}1_{y>x} − γ₂^{x−y−1}1_{x>y}).
    pub fn delta_term(&self, x: i64, y: i64) -> f64 {
        let g = self.pieces.g2;
        let c = (1.0 - g).powi(2);
        if y > x {
            c * g.powi((y - x - 1) as i32)
        } else if x > y {
            -c * g.powi((x - y - 1) as i32)
        } else {
            0.0
        }
    }

    /// Assembles the window on the points lo..=hi.
    pub fn window(&self, lo: i64, hi: i64) -> Result<PfWindow> {
        let data = WindowData::build(self, lo, hi)?;
        Ok(data.sub(lo))
    }

    /// Pf(J−K) on l²(Z_{>s}) truncated to s+1..s+m.
    pub fn fredholm_window(&self, s: i64, m: usize) -> Result<f64> {
        if m == 0 {
            return Ok(1.0);
        }
        self.window(s + 1, s + m as i64)?.value()
    }

    /// Pf(J−K) with the window grown by doubling until two windows agree within tol.
    pub fn fredholm_pfaffian(&self, s: i64, tol: f64, m_max: usize) -> Result<(f64, usize, f64)> {
        let t = self.cdf_table(s, s, tol, m_max)?;
        Ok((t[0].value, t[0].window_m, t[0].window_estimate))
    }

    /// Pf(J−K) for every s in s_min..=s_max from one window, grown until windows ending at
    /// s_max+M and s_max+2M agree within tol at every s.
    pub fn cdf_table(&self, s_min: i64, s_max: i64, tol: f64, m_max: usize) -> Result<Vec<CdfPoint>> {
        if s_max < s_min {
            return Err(invalid("empty s range"));
        }
        let mut m = 16usize;
        let mut last_diag = String::new();
        while m <= m_max {
            let end = s_max + 2 * m as i64;
            let data = WindowData::build(self, s_min + 1, end)?;
            let mut out = Vec::new();
            let mut worst: f64 = 0.0;
            for s in s_min..=s_max {
                let v1 = data.sub_range(s + 1, s_max + m as i64).value()?;
                let v2 = data.sub_range(s + 1, end).value()?;
                worst = worst.max((v1 - v2).abs());
                out.push(CdfPoint {
                    s,
                    value: v2,
                    quadrature_estimate: f64::NAN,
                    window_m: (end - s) as usize,
                    window_estimate: (v1 - v2).abs(),
                    skew_deviation: data.skew_deviation,
                    imag_residual: data.imag_residual,
                });
            }
            if worst < tol {
                return Ok(out);
            }
            last_diag = format!("window M={m}: doubling changed the value by {worst:e}");
            m *= 2;
        }
        Err(Error::Convergence(format!("window did not converge up to M={m_max}; {last_diag}")))
    }
}

fn check_imag(imag: f64, scale: f64) -> Result<()> {
    if imag > IMAG_TOL * scale.max(1.0) {
        return Err(Error::Convergence(format!("imaginary residual {imag:e} of the kernel quadrature")));
    }
    Ok(())
}

/// Kernel data on a contiguous range of points.
struct WindowData {
    lo: i64,
    /// J − K₀ (without the rank-two part), exactly skew
    base: DMatrix<f64>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    skew_deviation: f64,
    imag_residual: f64,
}

impl WindowData {
    fn build(kern: &SkewBlockKernel, lo: i64, hi: i64) -> Result<Self> {
        let xs: Vec<i64> = (lo..=hi).collect();
        let m = xs.len();
        let ([k11, k12, k22], imag) = kern.contour_blocks(&xs, &xs);
        let scale = k11.amax().max(k22.amax()).max(k12.amax());
        if imag > 1e-6 * scale.max(1.0) {
            return Err(Error::Convergence(format!("imaginary residual {imag:e} of the window quadrature")));
        }
        let mut a = DMatrix::<f64>::zeros(2 * m, 2 * m);
        for i in 0..m {
            for j in 0..m {
                a[(2 * i, 2 * j)] = -k11[(i, j)];
                a[(2 * i, 2 * j + 1)] = -k12[(i, j)];
                a[(2 * i + 1, 2 * j)] = k12[(j, i)];
                a[(2 * i + 1, 2 * j + 1)] = -(k22[(i, j)] + kern.delta_term(xs[i], xs[j]));
            }
            a[(2 * i, 2 * i + 1)] += 1.0;
            a[(2 * i + 1, 2 * i)] -= 1.0;
        }
        let at = a.transpose();
        let skew = (&a + &at).amax();
        let base = (&a - &at) * 0.5;
        let (av, dav) = kern.a_vec(&xs);
        let (bv, dbv) = kern.b_vec(&xs);
        let mut alpha = vec![0.0; 2 * m];
        let mut beta = vec![0.0; 2 * m];
        for i in 0..m {
            alpha[2 * i] = av[i];
            alpha[2 * i + 1] = -2.0 * dav[i];
            beta[2 * i] = bv[i];
            beta[2 * i + 1] = -2.0 * dbv[i];
        }
        Ok(WindowData { lo, base, alpha, beta, skew_deviation: skew, imag_residual: imag })
    }

    fn sub(&self, s1: i64) -> PfWindow {
        self.sub_range(s1, self.lo + (self.base.nrows() / 2) as i64 - 1)
    }

    fn sub_range(&self, first: i64, last: i64) -> PfWindow {
        let off = 2 * (first - self.lo).max(0) as usize;
        let end = (2 * (last - self.lo + 1).max(0) as usize).min(self.base.nrows());
        let len = end.saturating_sub(off);
        PfWindow {
            s: first - 1,
            m: len / 2,
            matrix: self.base.view((off, off), (len, len)).into_owned(),
            alpha: self.alpha[off..off + len].to_vec(),
            beta: self.beta[off..off + len].to_vec(),
            skew_deviation: self.skew_deviation,
            imag_residual: self.imag_residual,
        }
    }
}

/// A window s+1..s+M of J − K, split as (J − K₀) + αβᵀ − βαᵀ.
#[derive(Clone, Debug)]
pub struct PfWindow {
    pub s: i64,
    pub m: usize,
    /// J − K₀, exactly skew after averaging with its negated transpose
    pub matrix: DMatrix<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// max |A + Aᵀ| before averaging
    pub skew_deviation: f64,
    pub imag_residual: f64,
}

impl PfWindow {
    /// The full matrix J − K.
    pub fn full_matrix(&self) -> DMatrix<f64> {
        let a = DVector::from_column_slice(&self.alpha);
        let b = DVector::from_column_slice(&self.beta);
        &self.matrix + &a * b.transpose() - &b * a.transpose()
    }

    /// Pf(J−K) = Pf(J−K₀)(1 + βᵀ(J−K₀)⁻¹α).
    pub fn value(&self) -> Result<f64> {
        if self.m == 0 {
            return Ok(1.0);
        }
        let pf = pfaffian_unchecked(self.matrix.clone());
        let na = self.alpha.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let nb = self.beta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if na == 0.0 || nb == 0.0 {
            return Ok(pf);
        }
        let a = DVector::from_iterator(self.alpha.len(), self.alpha.iter().map(|v| v / na));
        let b = DVector::from_iterator(self.beta.len(), self.beta.iter().map(|v| v / nb));
        let sol = self
            .matrix
            .clone()
            .lu()
            .solve(&a)
            .ok_or_else(|| Error::Convergence("singular window matrix in the rank-two update".into()))?;
        let v = pf * (1.0 + na * nb * b.dot(&sol));
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("window Pfaffian at s={}", self.s)));
        }
        Ok(v)
    }
}

/// One row of a Pfaffian cdf table.
#[derive(Clone, Debug, Serialize)]
pub struct CdfPoint {
    pub s: i64,
    pub value: f64,
    /// |value(N) − value(N/2)| for N trapezoid nodes
    pub quadrature_estimate: f64,
    pub window_m: usize,
    /// change of the value between window ends s_max+M and s_max+2M
    pub window_estimate: f64,
    pub skew_deviation: f64,
    pub imag_residual: f64,
}

/// Cdf table with quadrature estimates from a second kernel at half the nodes.
pub fn cdf_table_checked(params: &KernelParams, s_min: i64, s_max: i64, tol: f64) -> Result<Vec<CdfPoint>> {
    let fine = SkewBlockKernel::new(params.clone())?;
    let mut out = fine.cdf_table(s_min, s_max, tol, 2048)?;
    let coarse = SkewBlockKernel::new(params.clone().with_nodes(params.nodes / 2))?;
    let m = out.iter().map(|p| p.window_m).max().unwrap_or(0);
    let end = s_min + m as i64;
    let data = WindowData::build(&coarse, s_min + 1, end)?;
    for p in out.iter_mut() {
        let v = data.sub_range(p.s + 1, p.s + p.window_m as i64).value()?;
        p.quadrature_estimate = (v - p.value).abs();
    }
    Ok(out)
}

/// P(h(n,n) + χ + 2S ≤ s) for the six-vertex model, for s in s_min..=s_max.
pub fn cdf_sixvertex_pfaffian(n: usize, s_min: i64, s_max: i64, params: &ModelParams) -> Result<Vec<CdfPoint>> {
    if params.a.len() != n {
        return Err(invalid(format!("expected {n} rapidities, got {}", params.a.len())));
    }
    params.check_probabilistic()?;
    let kp = KernelParams::sixvertex(params)?;
    cdf_table_checked(&kp, s_min, s_max, 1e-10)
}

/// P(−N(τ) + χ + 2S ≤ s) for the half-space ASEP with bulk rates 1 and q, for s in s_min..=s_max.
pub fn cdf_asep_pfaffian(tau: f64, s_min: i64, s_max: i64, params: &ModelParams) -> Result<Vec<CdfPoint>> {
    if params.nu * params.t >= 1.0 {
        return Err(invalid(format!("nu*t={} must be < 1", params.nu * params.t)));
    }
    let kp = KernelParams::asep(tau, params)?;
    cdf_table_checked(&kp, s_min, s_max, 1e-10)
}
