//! Integer partitions and the strip enumerations used by branching rules.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Weakly decreasing positive parts (trailing zeros are dropped).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition(Vec<usize>);

impl Partition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(invalid(format!("parts {parts:?} are not weakly decreasing")));
        }
        Ok(Self::from_sorted(parts))
    }

    pub(crate) fn from_sorted(mut parts: Vec<usize>) -> Self {
        while parts.last() == Some(&0) {
            parts.pop();
        }
        Partition(parts)
    }

    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    /// l(λ).
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// |λ|.
    pub fn size(&self) -> usize {
        self.0.iter().sum()
    }

    /// λ₁ (0 for the empty partition).
    pub fn first(&self) -> usize {
        self.0.first().copied().unwrap_or(0)
    }

    /// λ_{i+1} with zero padding (0-indexed).
    pub fn part(&self, i: usize) -> usize {
        self.0.get(i).copied().unwrap_or(0)
    }

    /// m_i(λ) for i ≥ 1.
    pub fn multiplicity(&self, i: usize) -> usize {
        self.0.iter().filter(|&&p| p == i).count()
    }

    /// (i, m_i) for the distinct parts.
    pub fn multiplicities(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for &p in &self.0 {
            match out.last_mut() {
                Some((v, m)) if *v == p => *m += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    pub fn conjugate(&self) -> Self {
        let l1 = self.first();
        Partition((0..l1).map(|i| self.0.iter().filter(|&&p| p > i).count()).collect())
    }

    /// o(λ): number of odd parts.
    pub fn odd_parts(&self) -> usize {
        self.0.iter().filter(|&&p| p % 2 == 1).count()
    }

    /// μ ⊆ λ.
    pub fn contains(&self, mu: &Partition) -> bool {
        mu.len() <= self.len() && mu.0.iter().zip(&self.0).all(|(m, l)| m <= l)
    }

    /// λ/μ is a horizontal strip: μ ⊆ λ and λ_{i+1} ≤ μ_i.
    pub fn is_horizontal_strip_over(&self, mu: &Partition) -> bool {
        self.contains(mu) && (0..self.len()).all(|i| self.part(i + 1) <= mu.part(i))
    }

    /// λ/μ is a vertical strip: μ ⊆ λ and λ_i − μ_i ≤ 1.
    pub fn is_vertical_strip_over(&self, mu: &Partition) -> bool {
        self.contains(mu) && (0..self.len()).all(|i| self.part(i) - mu.part(i) <= 1)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// All λ with λ₁ ≤ max_part and l(λ) ≤ max_len, in lexicographic order.
pub fn partitions_in_box(max_part: usize, max_len: usize) -> Vec<Partition> {
    partitions_bounded(max_part, max_len, usize::MAX)
}

/// All λ with λ₁ ≤ max_part, l(λ) ≤ max_len and |λ| ≤ max_size.
pub fn partitions_bounded(max_part: usize, max_len: usize, max_size: usize) -> Vec<Partition> {
    fn rec(prev: usize, left: usize, budget: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
        out.push(Partition(cur.clone()));
        if left == 0 {
            return;
        }
        for p in 1..=prev.min(budget) {
            cur.push(p);
            rec(p, left - 1, budget - p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(max_part, max_len, max_size, &mut Vec::new(), &mut out);
    out
}

/// All λ ⊇ μ with λ/μ a horizontal strip, λ₁ ≤ max_part, |λ| ≤ max_size.
pub fn horizontal_strips_over(mu: &Partition, max_part: usize, max_size: usize) -> Vec<Partition> {
    let l = mu.len() + 1;
    let mut out = Vec::new();
    let mut cur = vec![0usize; l];
    fn rec(
        i: usize,
        mu: &Partition,
        max_part: usize,
        budget: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Partition>,
    ) {
        if i == cur.len() {
            out.push(Partition::from_sorted(cur.clone()));
            return;
        }
        let lo = mu.part(i);
        let hi = if i == 0 { max_part } else { mu.part(i - 1) };
        if lo > hi {
            return;
        }
        for v in lo..=hi.min(lo + budget) {
            cur[i] = v;
            rec(i + 1, mu, max_part, budget - (v - lo), cur, out);
        }
    }
    if mu.size() <= max_size && mu.first() <= max_part {
        rec(0, mu, max_part, max_size - mu.size(), &mut cur, &mut out);
    }
    out
}

/// All λ ⊇ μ with λ/μ a vertical strip, l(λ) ≤ max_len, |λ| ≤ max_size, λ₁ ≤ max_part.
pub fn vertical_strips_over(
    mu: &Partition,
    max_len: usize,
    max_part: usize,
    max_size: usize,
) -> Vec<Partition> {
    horizontal_strips_over(&mu.conjugate(), max_len, max_size)
        .into_iter()
        .map(|l| l.conjugate())
        .filter(|l| l.first() <= max_part)
        .collect()
}

/// All ρ ⊆ λ.
pub fn subpartitions(lam: &Partition) -> Vec<Partition> {
    fn rec(i: usize, lam: &Partition, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if i == lam.len() {
            out.push(Partition::from_sorted(cur.clone()));
            return;
        }
        let hi = if i == 0 { lam.part(0) } else { lam.part(i).min(cur[i - 1]) };
        for v in 0..=hi {
            cur.push(v);
            rec(i + 1, lam, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, lam, &mut Vec::new(), &mut out);
    out
}
