//! Exact coefficient check of the symmetric-function identity
//! Σ_l q^l h_l(z²/√q;q)/(q;q)_l Σ_{λ₁=k−l} h′_λ P_{λ′}(x;q)
//!   = Σ_{λ₁=k} Σ_{ρ⊆λ} z^{o(λ′)+o(ρ′)} w^{o(λ′)−o(ρ′)} q^{|ρ|/2} s_{λ/ρ}(x̂),
//! with q½ a formal variable s and total degree (x-degree + s-degree) capped.

use num_traits::{One, Zero};
use serde::Serialize;

use super::exact_poly::ExactPoly;
use super::partition::{partitions_bounded, subpartitions};
use super::{hall_littlewood, hat_complete_series, jacobi_trudi_ring, rogers_szego};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct CoefficientMismatch {
    /// Exponents of x₁..x_n, z, w, q½.
    pub exponents: Vec<i32>,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub k: usize,
    pub nvars: usize,
    pub degree_cap: usize,
    pub lhs_terms: usize,
    pub rhs_terms: usize,
    pub mismatches: Vec<CoefficientMismatch>,
}

impl IdentityReport {
    pub fn holds(&self) -> bool {
        self.mismatches.is_empty()
    }
}

struct Ctx {
    nx: usize,
    cap: i32,
}

impl Ctx {
    fn z(&self) -> usize {
        self.nx
    }
    fn w(&self) -> usize {
        self.nx + 1
    }
    fn s(&self) -> usize {
        self.nx + 2
    }

    fn degree(&self, e: &[i32]) -> i32 {
        let x: i32 = e.iter().take(self.nx).sum();
        x + e.get(self.s()).copied().unwrap_or(0)
    }

    fn mono(&self, z: i32, w: i32, s: i32) -> ExactPoly {
        let mut e = vec![0; self.nx + 3];
        e[self.z()] = z;
        e[self.w()] = w;
        e[self.s()] = s;
        ExactPoly::monomial(e, One::one())
    }

    fn min_degree(&self, p: &ExactPoly) -> i32 {
        p.terms().map(|(e, _)| self.degree(e)).min().unwrap_or(0)
    }

    fn cut(&self, p: ExactPoly) -> ExactPoly {
        p.retain(&|e| self.degree(e) <= self.cap)
    }

    /// Truncated product; dropping high-degree terms is sound only for nonnegative-degree factors.
    fn mul(&self, a: &ExactPoly, b: &ExactPoly) -> Result<ExactPoly> {
        if self.min_degree(a) < 0 || self.min_degree(b) < 0 {
            return Err(Error::InvalidParam(
                "truncation inconsistency: factor with negative total degree".into(),
            ));
        }
        Ok(a.mul_truncated(b, &|e| self.degree(e) <= self.cap))
    }

    /// 1/(q;q)_l as a series in s = q½.
    fn inv_qq(&self, l: usize) -> Result<ExactPoly> {
        let mut acc = ExactPoly::one();
        for i in 1..=l as i32 {
            let mut ser = ExactPoly::zero();
            let mut j = 0;
            while 2 * i * j <= self.cap {
                ser = ser + self.mono(0, 0, 2 * i * j);
                j += 1;
            }
            acc = self.mul(&acc, &ser)?;
        }
        Ok(acc)
    }
}

/// Expands both sides and compares every coefficient.
pub fn verify_general_identity(k: usize, nvars: usize, degree_cap: usize) -> Result<IdentityReport> {
    if nvars == 0 {
        return Err(Error::InvalidParam("nvars must be at least 1".into()));
    }
    let ctx = Ctx { nx: nvars, cap: degree_cap as i32 };
    let xs: Vec<ExactPoly> = (0..nvars).map(ExactPoly::var).collect();
    let s = ExactPoly::var(ctx.s());
    let q = s.clone() * s.clone();

    let mut lhs = ExactPoly::zero();
    for l in 0..=k {
        // s^{2l} h_l(z²/s;q) is a polynomial with nonnegative s-degree.
        let pre = ctx.mono(0, 0, 2 * l as i32) * rogers_szego(l, &ctx.mono(2, 0, -1), &q);
        let pre = ctx.mul(&ctx.cut(pre), &ctx.inv_qq(l)?)?;
        if pre.is_zero() {
            continue;
        }
        let top = k - l;
        for lam in partitions_bounded(top, degree_cap, degree_cap) {
            if lam.first() != top || lam.size() + l > degree_cap {
                continue;
            }
            let lc = lam.conjugate();
            let p = ctx.cut(hall_littlewood(&lc, &xs, &q));
            if p.is_zero() {
                continue;
            }
            let mut hp = ExactPoly::one();
            for i in 1..=lam.len() {
                let d = lam.part(i - 1) - lam.part(i);
                let f = if i % 2 == 0 {
                    rogers_szego(d, &ctx.mono(2, 0, 1), &q)
                } else {
                    ctx.mono(d as i32, d as i32, 0) * rogers_szego(d, &ctx.mono(0, -2, 1), &q)
                };
                hp = ctx.mul(&hp, &ctx.cut(f))?;
            }
            lhs = lhs + ctx.mul(&ctx.mul(&pre, &hp)?, &p)?;
        }
    }

    let hh = hat_complete_series(&xs, &q, k + degree_cap + 1);
    let mut rhs = ExactPoly::zero();
    for lam in partitions_bounded(k, degree_cap, degree_cap) {
        if lam.first() != k {
            continue;
        }
        let ol = lam.conjugate().odd_parts() as i32;
        for rho in subpartitions(&lam) {
            let sk = ctx.cut(jacobi_trudi_ring(&lam, &rho, &hh));
            if sk.is_zero() {
                continue;
            }
            let or = rho.conjugate().odd_parts() as i32;
            let m = ctx.mono(ol + or, ol - or, rho.size() as i32);
            rhs = rhs + ctx.mul(&m, &sk)?;
        }
    }

    let diff = lhs.clone() - rhs.clone();
    let mismatches = diff
        .terms()
        .map(|(e, _)| CoefficientMismatch {
            exponents: e.clone(),
            lhs: lhs.coeff(e).to_string(),
            rhs: rhs.coeff(e).to_string(),
        })
        .collect();
    Ok(IdentityReport {
        k,
        nvars,
        degree_cap,
        lhs_terms: lhs.num_terms(),
        rhs_terms: rhs.num_terms(),
        mismatches,
    })
}
