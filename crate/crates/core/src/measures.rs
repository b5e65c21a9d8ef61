//! Signed integer laws: RS(q,t), theta shifts, half-space HL length and path
//! strings, the free-boundary Schur first part, and convolution.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;
use crate::special::{qpoch_inf_real, theta3};
use crate::symfunc::partition::{
    horizontal_strips_over, partitions_bounded, vertical_strips_over, Partition,
};
use crate::symfunc::{h_lambda_weight, hl_table, pi_normalization, q_binomial, qpoch_q, skew_hl_single};

/// Finitely supported signed mass function on Z with a bound on omitted mass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "PmfRepr", try_from = "PmfRepr")]
pub struct SignedPmf {
    offset: i64,
    masses: Vec<f64>,
    tail_bound: f64,
}

#[derive(Serialize, Deserialize)]
struct PmfRepr {
    support: [i64; 2],
    masses: Vec<f64>,
    tail_bound: f64,
}

impl From<SignedPmf> for PmfRepr {
    fn from(p: SignedPmf) -> Self {
        PmfRepr { support: [p.offset, p.offset + p.masses.len() as i64 - 1], masses: p.masses, tail_bound: p.tail_bound }
    }
}

impl TryFrom<PmfRepr> for SignedPmf {
    type Error = Error;
    fn try_from(r: PmfRepr) -> Result<Self> {
        if r.support[1] - r.support[0] + 1 != r.masses.len() as i64 {
            return Err(invalid("support length does not match masses"));
        }
        SignedPmf::new(r.support[0], r.masses, r.tail_bound)
    }
}

impl SignedPmf {
    pub fn new(offset: i64, masses: Vec<f64>, tail_bound: f64) -> Result<Self> {
        if masses.is_empty() {
            return Err(invalid("a pmf needs at least one mass"));
        }
        if !(tail_bound >= 0.0) {
            return Err(invalid(format!("tail bound must be nonnegative, got {tail_bound}")));
        }
        if masses.iter().any(|m| !m.is_finite()) {
            return Err(Error::NonFinite("pmf mass".into()));
        }
        Ok(Self { offset, masses, tail_bound })
    }

    pub fn delta(k: i64) -> Self {
        Self { offset: k, masses: vec![1.0], tail_bound: 0.0 }
    }

    /// Builds from sparse (k, mass) pairs.
    pub fn from_map(m: &BTreeMap<i64, f64>, tail_bound: f64) -> Result<Self> {
        let (&lo, _) = m.first_key_value().ok_or_else(|| invalid("empty pmf"))?;
        let (&hi, _) = m.last_key_value().unwrap();
        let mut masses = vec![0.0; (hi - lo + 1) as usize];
        for (&k, &v) in m {
            masses[(k - lo) as usize] = v;
        }
        Self::new(lo, masses, tail_bound)
    }

    pub fn support(&self) -> (i64, i64) {
        (self.offset, self.offset + self.masses.len() as i64 - 1)
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn mass(&self, k: i64) -> f64 {
        let i = k - self.offset;
        if i < 0 || i >= self.masses.len() as i64 {
            0.0
        } else {
            self.masses[i as usize]
        }
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn abs_total(&self) -> f64 {
        self.masses.iter().map(|m| m.abs()).sum()
    }

    /// Σ_{x≤s} mass(x); never clamped.
    pub fn cdf(&self, s: i64) -> f64 {
        let (lo, hi) = self.support();
        if s < lo {
            return 0.0;
        }
        let end = (s.min(hi) - lo) as usize;
        self.masses[..=end].iter().sum()
    }

    pub fn min_mass(&self) -> f64 {
        self.masses.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn mean(&self) -> f64 {
        self.masses.iter().enumerate().map(|(i, m)| (self.offset + i as i64) as f64 * m).sum()
    }

    /// Law of X + k.
    pub fn shift(&self, k: i64) -> Self {
        Self { offset: self.offset + k, ..self.clone() }
    }

    /// Law of −X.
    pub fn negate(&self) -> Self {
        let mut masses = self.masses.clone();
        masses.reverse();
        let (_, hi) = self.support();
        Self { offset: -hi, masses, tail_bound: self.tail_bound }
    }

    /// Law of c·X for an integer c ≥ 1.
    pub fn dilate(&self, c: usize) -> Self {
        assert!(c >= 1);
        let mut masses = vec![0.0; (self.masses.len() - 1) * c + 1];
        for (i, m) in self.masses.iter().enumerate() {
            masses[i * c] = *m;
        }
        Self { offset: self.offset * c as i64, masses, tail_bound: self.tail_bound }
    }

    /// Exact discrete convolution; tail bounds combine through absolute masses.
    pub fn convolve(&self, other: &Self) -> Self {
        let mut masses = vec![0.0; self.masses.len() + other.masses.len() - 1];
        for (i, a) in self.masses.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in other.masses.iter().enumerate() {
                masses[i + j] += a * b;
            }
        }
        let tail = self.tail_bound * other.abs_total()
            + other.tail_bound * self.abs_total()
            + self.tail_bound * other.tail_bound;
        Self { offset: self.offset + other.offset, masses, tail_bound: tail }
    }

    /// Largest |cdf difference| over the union of supports.
    pub fn sup_cdf_distance(&self, other: &Self) -> f64 {
        let lo = self.support().0.min(other.support().0);
        let hi = self.support().1.max(other.support().1);
        (lo..=hi).map(|s| (self.cdf(s) - other.cdf(s)).abs()).fold(0.0, f64::max)
    }

    /// (k, mass) rows for tabular output.
    pub fn rows(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.masses.iter().enumerate().map(move |(i, m)| (self.offset + i as i64, *m))
    }
}

/// Σ_{n>cap} (n+1) r^n.
fn poly_geometric_tail(r: f64, cap: usize) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let c = cap as f64;
    r.powi(cap as i32 + 1) * ((c + 2.0) - (c + 1.0) * r) / (1.0 - r).powi(2)
}

fn check_rs(q: f64, t: f64) -> Result<()> {
    if !(0.0..1.0).contains(&q) {
        return Err(invalid(format!("RS law needs 0 <= q < 1, got q={q}")));
    }
    if t >= 1.0 {
        return Err(invalid(format!("RS law needs t < 1 (the law no longer decays), got t={t}")));
    }
    if t <= -1.0 {
        return Err(invalid(format!("RS law needs |t| < 1 to decay, got t={t}")));
    }
    Ok(())
}

/// χ ∼ RS(q,t): mass(k) = (q;q)_∞(−t;q)_∞ q^k h_k(−t/q;q)/(q;q)_k on 0..=cap.
pub fn rs_pmf(q: f64, t: f64, cap: usize) -> Result<SignedPmf> {
    check_rs(q, t)?;
    let phi = qpoch_inf_real(q, q) * qpoch_inf_real(-t, q);
    let mut masses = Vec::with_capacity(cap + 1);
    for k in 0..=cap {
        // q^k h_k(−t/q;q) = Σ_j [k,j]_q (−t)^j q^{k−j}, finite at q = 0
        let mut v = 0.0;
        for j in 0..=k {
            v += q_binomial(k as i64, j as i64, &q).value * (-t).powi(j as i32) * q.powi((k - j) as i32);
        }
        masses.push(phi * v / qpoch_q(&q, k));
    }
    // mass(n) = Φ Σ_{k+l=n} q^k(−t)^l/((q;q)_k(q;q)_l), so |mass(n)| ≤ Φ(n+1)r^n/(q;q)_∞²
    let r = q.max(t.abs());
    let qq = qpoch_inf_real(q, q);
    let tail = phi.abs() / (qq * qq) * poly_geometric_tail(r, cap);
    SignedPmf::new(0, masses, tail)
}

/// Convolutional inverse of RS(q,t), generating function (qz;q)_∞(−tz;q)_∞/((q;q)_∞(−t;q)_∞).
pub fn rs_inverse_pmf(q: f64, t: f64, cap: usize) -> Result<SignedPmf> {
    check_rs(q, t)?;
    let phi = qpoch_inf_real(q, q) * qpoch_inf_real(-t, q);
    let c2 = |n: usize| (n * n.saturating_sub(1) / 2) as i32;
    let mut masses = Vec::with_capacity(cap + 1);
    for n in 0..=cap {
        let mut v = 0.0;
        for k in 0..=n {
            let l = n - k;
            let a = if k % 2 == 0 { 1.0 } else { -1.0 } * q.powi(c2(k) + k as i32) / qpoch_q(&q, k);
            let b = q.powi(c2(l)) * t.powi(l as i32) / qpoch_q(&q, l);
            v += a * b;
        }
        masses.push(v / phi);
    }
    let r = q.max(t.abs());
    let qq = qpoch_inf_real(q, q);
    let tail = poly_geometric_tail(r, cap) / (qq * qq * phi.abs());
    SignedPmf::new(0, masses, tail)
}

/// S ∼ Θ(ζ²,q²): mass(k) = q^{k²}ζ^{2k}/θ₃(ζ²;q²) on −cap..=cap.
pub fn theta_pmf(zeta: f64, q: f64, cap: usize) -> Result<SignedPmf> {
    if !(q > 0.0 && q < 1.0) {
        return Err(invalid(format!("theta law needs 0 < q < 1, got {q}")));
    }
    if !(zeta > 0.0) {
        return Err(invalid(format!("theta law needs zeta > 0, got {zeta}")));
    }
    let theta = theta3(Complex64::new(zeta * zeta, 0.0), q * q)?.re;
    let c = cap as i64;
    let mass = |k: i64| q.powi((k * k) as i32) * zeta.powi(2 * k as i32) / theta;
    let masses: Vec<f64> = (-c..=c).map(mass).collect();
    // beyond ±cap successive ratios are at most q^{2cap+3}ζ^{±2}
    let mut tail = 0.0;
    for sgn in [1.0f64, -1.0] {
        let z2 = zeta.powf(2.0 * sgn);
        let rho = q.powi(2 * cap as i32 + 3) * z2;
        if rho >= 1.0 {
            return Err(Error::Convergence(format!("theta tail not geometric at cap={cap}")));
        }
        let first = mass(sgn as i64 * (c + 1));
        tail += first / (1.0 - rho);
    }
    SignedPmf::new(-c, masses, tail)
}

/// Truncation caps for partition sums.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Caps {
    /// λ₁ ≤ max_part.
    pub max_part: usize,
    /// l(λ) ≤ max_len.
    pub max_len: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { max_part: 30, max_len: 30 }
    }
}

fn check_hl_regime(a: &[f64], q: f64, t: f64, nu: f64) -> Result<()> {
    if !(0.0..1.0).contains(&q) {
        return Err(invalid(format!("HL measure needs 0 <= q < 1, got q={q}")));
    }
    if !(0.0..1.0).contains(&t) {
        return Err(invalid(format!("HL measure needs 0 <= t < 1, got t={t}")));
    }
    if !(nu > 0.0) {
        return Err(invalid(format!("HL measure needs nu > 0, got nu={nu}")));
    }
    if nu * t >= 1.0 {
        return Err(invalid(format!("HL measure needs nu*t < 1, got {}", nu * t)));
    }
    if let Some(x) = a.iter().find(|x| !(0.0..1.0).contains(*x)) {
        return Err(invalid(format!("HL measure needs rapidities in [0,1), got {x}")));
    }
    Ok(())
}

/// Bound on |h_λ| for l(λ) ≤ n: each distinct part contributes ≤ (m+1)M^m/(q;q)_∞.
fn h_weight_bound(n: usize, q: f64, t: f64, nu: f64) -> f64 {
    let m = 1.0f64.max(t * nu).max(1.0 / nu);
    (2.0 * m / qpoch_inf_real(q, q)).powi(n as i32)
}

/// Σ over all λ of s_λ(a) = ∏1/(1−a_i) ∏_{i<j} 1/(1−a_i a_j).
fn schur_total(a: &[f64]) -> f64 {
    let mut acc = 1.0;
    for (i, x) in a.iter().enumerate() {
        acc /= 1.0 - x;
        for y in &a[i + 1..] {
            acc /= 1.0 - x * y;
        }
    }
    acc
}

/// Omitted-mass certificate for truncated HL sums: 0 ≤ P_λ ≤ s_λ and |h_λ| bounded.
fn hl_tail(a: &[f64], q: f64, t: f64, nu: f64, caps: Caps) -> Result<f64> {
    let schur = hl_table(a, &0.0, caps.max_part, usize::MAX);
    let kept: f64 = schur.iter().filter(|(l, _)| l.len() <= caps.max_len).map(|(_, v)| v).sum();
    let omitted = (schur_total(a) - kept).max(0.0) + 1e-15 * schur_total(a);
    let pi = pi_normalization(a, &q, &t, &nu)?;
    Ok(h_weight_bound(a.len(), q, t, nu) * omitted / pi.abs())
}

/// Law of l(λ) under the half-space HL measure.
pub fn hl_length_pmf(a: &[f64], q: f64, t: f64, nu: f64, caps: Caps) -> Result<SignedPmf> {
    check_hl_regime(a, q, t, nu)?;
    if a.is_empty() {
        return Ok(SignedPmf::delta(0));
    }
    let pi = pi_normalization(a, &q, &t, &nu)?;
    let table = hl_table(a, &q, caps.max_part, usize::MAX);
    let mut masses = vec![0.0; a.len() + 1];
    for (lam, p) in &table {
        if lam.len() > caps.max_len {
            continue;
        }
        masses[lam.len()] += h_lambda_weight(lam, &q, &t, &nu)? * p / pi;
    }
    let tail = hl_tail(a, q, t, nu, caps)?;
    SignedPmf::new(0, masses, tail)
}

/// Path-string law (exact arithmetic core): Σ h_{λ⁽ⁿ⁾} ∏ P_{λ⁽ⁱ⁾/λ⁽ⁱ⁻¹⁾}(a_i) / Π over chains with λ₁ ≤ max_part.
pub fn hl_pathstring_law_truncated<T: Scalar>(
    a: &[T],
    q: &T,
    t: &T,
    nu: &T,
    max_part: usize,
) -> Result<BTreeMap<Vec<u8>, T>> {
    let mut state: HashMap<(Partition, Vec<u8>), T> = HashMap::new();
    state.insert((Partition::empty(), Vec::new()), T::one());
    for ai in a {
        let mut next: HashMap<(Partition, Vec<u8>), T> = HashMap::new();
        for ((mu, s), w) in &state {
            for lam in horizontal_strips_over(mu, max_part, usize::MAX) {
                let f = skew_hl_single(&lam, mu, ai, q);
                if f.is_zero() {
                    continue;
                }
                let mut s2 = s.clone();
                s2.push((lam.len() - mu.len()) as u8);
                let e = next.entry((lam, s2)).or_insert_with(T::zero);
                *e = e.clone() + f * w.clone();
            }
        }
        state = next;
    }
    let pi = pi_normalization(a, q, t, nu)?;
    let mut out: BTreeMap<Vec<u8>, T> = BTreeMap::new();
    for ((lam, s), w) in state {
        let h = h_lambda_weight(&lam, q, t, nu)?;
        let e = out.entry(s).or_insert_with(T::zero);
        *e = e.clone() + h * w / pi.clone();
    }
    Ok(out)
}

/// Path-string law with a uniform bound on each string's truncation error.
#[derive(Clone, Debug, Serialize)]
pub struct PathStringLaw {
    pub probs: BTreeMap<Vec<u8>, f64>,
    pub tail_bound: f64,
}

pub fn hl_pathstring_law(a: &[f64], q: f64, t: f64, nu: f64, caps: Caps) -> Result<PathStringLaw> {
    check_hl_regime(a, q, t, nu)?;
    let probs = hl_pathstring_law_truncated(a, &q, &t, &nu, caps.max_part)?;
    let tail = hl_tail(a, q, t, nu, Caps { max_part: caps.max_part, max_len: a.len() })?;
    Ok(PathStringLaw { probs, tail_bound: tail })
}

/// HL-process probability of one path string.
pub fn hl_pathstring_prob(a: &[f64], q: f64, t: f64, nu: f64, s: &[u8], caps: Caps) -> Result<(f64, f64)> {
    if s.len() != a.len() {
        return Err(Error::Dimension(format!("string length {} != {} rapidities", s.len(), a.len())));
    }
    let law = hl_pathstring_law(a, q, t, nu, caps)?;
    Ok((law.probs.get(s).copied().unwrap_or(0.0), law.tail_bound))
}

/// Size cap for free-boundary Schur sums.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FbsCaps {
    /// |λ| ≤ max_size.
    pub max_size: usize,
}

impl Default for FbsCaps {
    fn default() -> Self {
        FbsCaps { max_size: 24 }
    }
}

/// Σ_ρ w(ρ) s_{λ/ρ}(E(a)H(c·a)) for all |λ| ≤ d, by strip transfer steps.
fn fbs_strip_dp(a: &[f64], c: f64, d: usize, start: &HashMap<Partition, f64>) -> HashMap<Partition, f64> {
    let mut cur = start.clone();
    for &ai in a {
        for vertical in [true, false] {
            let x = if vertical { ai } else { c * ai };
            let mut next: HashMap<Partition, f64> = HashMap::new();
            for (mu, w) in &cur {
                let lams = if vertical {
                    vertical_strips_over(mu, d, d, d)
                } else {
                    horizontal_strips_over(mu, d, d)
                };
                for lam in lams {
                    let k = lam.size() - mu.size();
                    *next.entry(lam).or_insert(0.0) += w * x.powi(k as i32);
                }
            }
            cur = next;
        }
    }
    cur
}

/// log Φ(X;q,t,ν) = −log((q;q)_∞(−t;q)_∞)
///   + Σ_k [p_k(X)((−tν)^k + ν^{−k})/k + (p_k(X)² − p_{2k}(X))/(2k)]/(1−q^k).
pub fn fbs_log_partition(pk: &dyn Fn(usize) -> f64, decay: f64, q: f64, t: f64, nu: f64) -> Result<f64> {
    let mut acc = -(qpoch_inf_real(q, q) * qpoch_inf_real(-t, q)).ln();
    let r = decay * (t.abs() * nu).max(1.0 / nu).max(decay);
    let mut k = 1usize;
    loop {
        let kf = k as f64;
        let p = pk(k);
        let p2 = pk(2 * k);
        let lin = (-t * nu).powi(k as i32) + nu.powi(-(k as i32));
        acc += (p * lin / kf + (p * p - p2) / (2.0 * kf)) / (1.0 - q.powi(k as i32));
        if r.powi(k as i32) < 1e-18 || k > 100_000 {
            break;
        }
        k += 1;
    }
    if !acc.is_finite() {
        return Err(Error::Convergence("FBS partition function diverges".into()));
    }
    Ok(acc)
}

/// Majorant specialization Y with H(Y;z) = ∏(1+a z)/(1−q a z) and |γ₂| (t ↦ −|t|).
fn fbs_majorant_log_phi(a: &[f64], q: f64, t: f64, nu: f64) -> Result<f64> {
    let pk = |k: usize| {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        (sign + q.powi(k as i32)) * a.iter().map(|x| x.powi(k as i32)).sum::<f64>()
    };
    let amax = a.iter().copied().fold(0.0, f64::max);
    fbs_log_partition(&pk, amax, q, -t.abs(), nu)
}

fn check_fbs_regime(a: &[f64], q: f64, t: f64, nu: f64) -> Result<()> {
    if !(q > 0.0 && q < 1.0) {
        return Err(invalid(format!("FBS needs 0 < q < 1, got q={q}")));
    }
    if !(t.abs() < 1.0) {
        return Err(invalid(format!("FBS needs |t| < 1, got t={t}")));
    }
    if !(nu > 1.0) {
        return Err(invalid(format!("FBS needs 1/nu < 1 for absolute convergence, got nu={nu}")));
    }
    if nu * t.abs() >= 1.0 {
        return Err(invalid(format!("FBS needs nu*|t| < 1, got {}", nu * t.abs())));
    }
    if let Some(x) = a.iter().find(|x| !(0.0..1.0).contains(*x)) {
        return Err(invalid(format!("FBS needs rapidities in [0,1), got {x}")));
    }
    Ok(())
}

/// Law of λ₁ under the free-boundary Schur measure with specialization â.
pub fn fbs_first_part_pmf(a: &[f64], q: f64, t: f64, nu: f64, caps: FbsCaps) -> Result<SignedPmf> {
    check_fbs_regime(a, q, t, nu)?;
    let d = caps.max_size;
    let g1 = 1.0 / (nu * q.sqrt());
    let g2 = -t * nu;
    let sq = q.sqrt();
    let rhos = partitions_bounded(d, d, d);
    let weight = |rho: &Partition, g: f64| g.powi(rho.conjugate().odd_parts() as i32) * sq.powi(rho.size() as i32);
    let signed_start: HashMap<Partition, f64> = rhos.iter().map(|r| (r.clone(), weight(r, g1))).collect();
    let signed = fbs_strip_dp(a, -q, d, &signed_start);
    let phi = pi_normalization(a, &q, &t, &nu)? / (qpoch_inf_real(q, q) * qpoch_inf_real(-t, q));
    let mut masses: BTreeMap<i64, f64> = BTreeMap::new();
    for (lam, v) in &signed {
        let m = g2.powi(lam.conjugate().odd_parts() as i32) * v / phi;
        *masses.entry(lam.first() as i64).or_insert(0.0) += m;
    }
    // Positive majorant: |γ₂| and E(a)H(qa) dominate every summand.
    let major = fbs_strip_dp(a, q, d, &signed_start);
    let kept: f64 = major
        .iter()
        .map(|(lam, v)| g2.abs().powi(lam.conjugate().odd_parts() as i32) * v)
        .sum();
    let total = fbs_majorant_log_phi(a, q, t, nu)?.exp();
    let tail = ((total - kept).max(0.0) + 1e-14 * total) / phi.abs();
    SignedPmf::from_map(&masses, tail)
}
