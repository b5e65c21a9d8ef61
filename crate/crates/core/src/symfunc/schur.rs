//! Specializations, the hat transform and skew Schur functions via Jacobi–Trudi.

use super::partition::Partition;
use crate::error::{Error, Result};
use crate::scalar::{Ring, Scalar};

/// A ring homomorphism out of Λ: a finite alphabet or truncated power sums.
#[derive(Clone, Debug, PartialEq)]
pub enum Specialization<T> {
    Alphabet(Vec<T>),
    /// `p[k-1]` is p_k; valid up to degree `p.len()`, omitted tail bounded by `tail_bound`.
    PowerSums { p: Vec<T>, tail_bound: f64 },
}

impl<T: Scalar> Specialization<T> {
    /// Truncation degree (None for an alphabet).
    pub fn degree(&self) -> Option<usize> {
        match self {
            Specialization::Alphabet(_) => None,
            Specialization::PowerSums { p, .. } => Some(p.len()),
        }
    }

    pub fn tail_bound(&self) -> f64 {
        match self {
            Specialization::Alphabet(_) => 0.0,
            Specialization::PowerSums { tail_bound, .. } => *tail_bound,
        }
    }

    pub fn power_sum(&self, k: usize) -> Result<T> {
        match self {
            Specialization::Alphabet(a) => {
                Ok(a.iter().fold(T::zero(), |acc, x| acc + x.pow(k as u32)))
            }
            Specialization::PowerSums { p, .. } => {
                if k == 0 {
                    return Err(Error::InvalidParam("p_0 is not defined".into()));
                }
                p.get(k - 1).cloned().ok_or_else(|| {
                    Error::TooLarge(format!("p_{k} exceeds truncation degree {}", p.len()))
                })
            }
        }
    }

    /// h_0..h_m.
    pub fn complete(&self, m: usize) -> Result<Vec<T>> {
        match self {
            Specialization::Alphabet(a) => {
                let mut h = vec![T::zero(); m + 1];
                h[0] = T::one();
                for x in a {
                    for k in 1..=m {
                        h[k] = h[k].clone() + x.clone() * h[k - 1].clone();
                    }
                }
                Ok(h)
            }
            Specialization::PowerSums { .. } => {
                let p: Vec<T> = (1..=m).map(|k| self.power_sum(k)).collect::<Result<_>>()?;
                let mut h = vec![T::zero(); m + 1];
                h[0] = T::one();
                for n in 1..=m {
                    let mut acc = T::zero();
                    for k in 1..=n {
                        acc = acc + p[k - 1].clone() * h[n - k].clone();
                    }
                    h[n] = acc / T::from_int(n as i64);
                }
                Ok(h)
            }
        }
    }
}

/// â: p_n(â) = (−1)^{n−1}(1−q^n)p_n(a) for n ≤ degree.
pub fn hat_specialize<T: Scalar>(a: &Specialization<T>, q: &T, degree: usize) -> Result<Specialization<T>> {
    let degree = a.degree().map_or(degree, |d| d.min(degree));
    let mut p = Vec::with_capacity(degree);
    for n in 1..=degree {
        let sign = if n % 2 == 1 { T::one() } else { -T::one() };
        p.push(sign * (T::one() - q.pow(n as u32)) * a.power_sum(n)?);
    }
    Ok(Specialization::PowerSums { p, tail_bound: a.tail_bound() })
}

/// Coefficients of ∏_i (1+a_i u)/(1+q a_i u) up to u^m, i.e. h_0..h_m(â).
pub fn hat_complete_series<T: Ring>(a: &[T], q: &T, m: usize) -> Vec<T> {
    let mut h = vec![T::zero(); m + 1];
    h[0] = T::one();
    for x in a {
        // factor coefficients: 1, then (−1)^{k−1}(1−q)q^{k−1}x^k
        let mut f = vec![T::one()];
        for k in 1..=m {
            let sign = if k % 2 == 1 { T::one() } else { -T::one() };
            f.push(sign * (T::one() - q.clone()) * q.pow((k - 1) as u32) * x.pow(k as u32));
        }
        let mut next = vec![T::zero(); m + 1];
        for i in 0..=m {
            if h[i].is_zero() {
                continue;
            }
            for j in 0..=m - i {
                next[i + j] = next[i + j].clone() + h[i].clone() * f[j].clone();
            }
        }
        h = next;
    }
    h
}

/// Determinant over a field by elimination with largest-modulus pivoting.
pub fn det_field<T: Scalar>(mut m: Vec<Vec<T>>) -> T {
    let n = m.len();
    let mut det = T::one();
    for c in 0..n {
        let piv = (c..n)
            .filter(|&r| !m[r][c].is_zero())
            .max_by(|&x, &y| m[x][c].abs_f64().total_cmp(&m[y][c].abs_f64()));
        let Some(p) = piv else { return T::zero() };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        let d = m[c][c].clone();
        det = det * d.clone();
        for r in c + 1..n {
            if m[r][c].is_zero() {
                continue;
            }
            let f = m[r][c].clone() / d.clone();
            for k in c..n {
                let v = m[c][k].clone();
                m[r][k] = m[r][k].clone() - f.clone() * v;
            }
        }
    }
    det
}

/// Determinant over a commutative ring by Laplace expansion along the first row.
pub fn det_ring<T: Ring>(m: &[Vec<T>]) -> T {
    fn rec<T: Ring>(m: &[Vec<T>], row: usize, cols: &mut Vec<usize>) -> T {
        if row == m.len() {
            return T::one();
        }
        let mut acc = T::zero();
        for idx in 0..cols.len() {
            let c = cols[idx];
            let e = &m[row][c];
            if e.is_zero() {
                continue;
            }
            cols.remove(idx);
            let minor = rec(m, row + 1, cols);
            cols.insert(idx, c);
            let term = e.clone() * minor;
            acc = if idx % 2 == 0 { acc + term } else { acc - term };
        }
        acc
    }
    let mut cols: Vec<usize> = (0..m.len()).collect();
    rec(m, 0, &mut cols)
}

fn jt_index(lam: &Partition, rho: &Partition, i: usize, j: usize) -> i64 {
    lam.part(i) as i64 - rho.part(j) as i64 - i as i64 + j as i64
}

/// s_{λ/ρ} = det h_{λ_i − ρ_j − i + j} over a ring, given h_0..h_M.
pub fn jacobi_trudi_ring<T: Ring>(lam: &Partition, rho: &Partition, h: &[T]) -> T {
    if !lam.contains(rho) {
        return T::zero();
    }
    let n = lam.len();
    let get = |k: i64| -> T {
        if k < 0 {
            T::zero()
        } else {
            h.get(k as usize).cloned().unwrap_or_else(T::zero)
        }
    };
    let m: Vec<Vec<T>> =
        (0..n).map(|i| (0..n).map(|j| get(jt_index(lam, rho, i, j))).collect()).collect();
    det_ring(&m)
}

/// s_{λ/ρ} under a specialization.
pub fn skew_schur<T: Scalar>(lam: &Partition, rho: &Partition, spec: &Specialization<T>) -> Result<T> {
    if !lam.contains(rho) {
        return Ok(T::zero());
    }
    let n = lam.len();
    let top = lam.first() + n;
    let h = spec.complete(top)?;
    let get = |k: i64| if k < 0 { T::zero() } else { h[k as usize].clone() };
    let m: Vec<Vec<T>> =
        (0..n).map(|i| (0..n).map(|j| get(jt_index(lam, rho, i, j))).collect()).collect();
    Ok(det_field(m))
}
