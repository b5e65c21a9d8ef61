//! Partitions, Rogers–Szegő polynomials, Hall–Littlewood and skew Schur
//! functions, specializations and exact coefficient identities.

pub mod exact_poly;
pub mod hl;
pub mod identity;
pub mod partition;
pub mod schur;

pub use hl::{hall_littlewood, hl_table, psi_coefficient, skew_hl_single};
pub use identity::{verify_general_identity, CoefficientMismatch, IdentityReport};
pub use schur::{
    det_field, det_ring, hat_complete_series, hat_specialize, jacobi_trudi_ring, skew_schur,
    Specialization,
};

use crate::error::{Error, Result};
use crate::scalar::{Ring, Scalar};
use partition::Partition;

/// q-binomial value with a flag recording whether (b, a) was in range.
#[derive(Clone, Debug, PartialEq)]
pub struct QBinomial<T> {
    pub value: T,
    pub in_range: bool,
}

/// Gaussian binomial [b choose a]_q by the q-Pascal rule (no division).
pub fn q_binomial<T: Ring>(b: i64, a: i64, q: &T) -> QBinomial<T> {
    if a < 0 || b < 0 || a > b {
        return QBinomial { value: T::zero(), in_range: false };
    }
    let (b, a) = (b as usize, a as usize);
    // row[k] = [n choose k]_q, updated in place from n-1 to n.
    let mut row = vec![T::zero(); a + 1];
    row[0] = T::one();
    for n in 1..=b {
        for k in (1..=a.min(n)).rev() {
            let qk = q.pow(k as u32);
            row[k] = row[k - 1].clone() + qk * row[k].clone();
        }
    }
    QBinomial { value: row[a].clone(), in_range: true }
}

/// Rogers–Szegő polynomial h_n(x;q) by the three-term recurrence.
pub fn rogers_szego<T: Ring>(n: usize, x: &T, q: &T) -> T {
    let mut prev = T::zero();
    let mut cur = T::one();
    let mut qn = T::one();
    for _ in 0..n {
        let next = (T::one() + x.clone()) * cur.clone() + x.clone() * (qn.clone() - T::one()) * prev;
        prev = cur;
        cur = next;
        qn = qn * q.clone();
    }
    cur
}

/// Rogers–Szegő polynomial by the direct sum Σ_k [n,k]_q x^k.
pub fn rogers_szego_direct<T: Ring>(n: usize, x: &T, q: &T) -> T {
    let mut acc = T::zero();
    for k in 0..=n {
        acc = acc + q_binomial(n as i64, k as i64, q).value * x.pow(k as u32);
    }
    acc
}

/// (−tν)^m h_m(−1/(ν²t);q) expanded as a polynomial in t.
fn odd_factor<T: Scalar>(m: usize, q: &T, t: &T, nu: &T) -> T {
    let mut acc = T::zero();
    for k in 0..=m {
        let sign = if (m + k) % 2 == 0 { T::one() } else { -T::one() };
        let term = q_binomial(m as i64, k as i64, q).value
            * t.pow((m - k) as u32)
            * nu.powi(m as i32 - 2 * k as i32);
        acc = acc + sign * term;
    }
    acc
}

/// Boundary weight h_λ(q,t,ν).
pub fn h_lambda_weight<T: Scalar>(lam: &Partition, q: &T, t: &T, nu: &T) -> Result<T> {
    if nu.is_zero() {
        return Err(Error::InvalidParam("nu must be nonzero".into()));
    }
    let mut acc = T::one();
    for (i, m) in lam.multiplicities() {
        let f = if i % 2 == 0 {
            rogers_szego(m, &(-t.clone()), q)
        } else {
            odd_factor(m, q, t, nu)
        };
        acc = acc * f;
    }
    Ok(acc)
}

/// Normalization Π(a;q,t,ν) of the half-space HL measure.
pub fn pi_normalization<T: Scalar>(a: &[T], q: &T, t: &T, nu: &T) -> Result<T> {
    if nu.is_zero() {
        return Err(Error::InvalidParam("nu must be nonzero".into()));
    }
    let one = T::one();
    let mut acc = T::one();
    for (i, ai) in a.iter().enumerate() {
        let den = one.clone() - ai.clone() * ai.clone();
        if den.is_zero() {
            return Err(Error::Pole(format!("1 - a_{}^2 = 0", i + 1)));
        }
        acc = acc
            * (one.clone() - ai.clone() * nu.clone() * t.clone())
            * (one.clone() + ai.clone() / nu.clone())
            / den;
    }
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let p = a[i].clone() * a[j].clone();
            let den = one.clone() - p.clone();
            if den.is_zero() {
                return Err(Error::Pole(format!("1 - a_{} a_{} = 0", i + 1, j + 1)));
            }
            acc = acc * (one.clone() - q.clone() * p) / den;
        }
    }
    Ok(acc)
}

/// (q;q)_n for a ring element q.
pub fn qpoch_q<T: Ring>(q: &T, n: usize) -> T {
    let mut acc = T::one();
    for i in 1..=n {
        acc = acc * (T::one() - q.pow(i as u32));
    }
    acc
}
