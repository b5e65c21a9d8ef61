//! Hall–Littlewood P polynomials by single-variable branching.

use std::collections::HashMap;

use super::partition::{horizontal_strips_over, Partition};
use crate::scalar::Ring;

/// ψ_{λ/μ}(q): the coefficient of a^{|λ/μ|} in P_{λ/μ}(a;q); zero off horizontal strips.
pub fn psi_coefficient<T: Ring>(lam: &Partition, mu: &Partition, q: &T) -> T {
    if !lam.is_horizontal_strip_over(mu) {
        return T::zero();
    }
    let lc = lam.conjugate();
    let mc = mu.conjugate();
    let width = lam.first() + 2;
    let theta = |j: usize| lc.part(j) - mc.part(j);
    let mut acc = T::one();
    for j in 1..width {
        if theta(j - 1) == 0 && theta(j) == 1 {
            acc = acc * (T::one() - q.pow(mu.multiplicity(j) as u32));
        }
    }
    acc
}

/// P_{λ/μ}(a;q) for a single variable.
pub fn skew_hl_single<T: Ring>(lam: &Partition, mu: &Partition, a: &T, q: &T) -> T {
    let psi = psi_coefficient(lam, mu, q);
    if psi.is_zero() {
        return psi;
    }
    psi * a.pow((lam.size() - mu.size()) as u32)
}

/// P_λ(a₁..a_n;q), zero when l(λ) > n.
pub fn hall_littlewood<T: Ring>(lam: &Partition, a: &[T], q: &T) -> T {
    fn rec<T: Ring>(
        lam: &Partition,
        a: &[T],
        q: &T,
        memo: &mut HashMap<(Partition, usize), T>,
    ) -> T {
        if lam.len() > a.len() {
            return T::zero();
        }
        if lam.is_empty() {
            return T::one();
        }
        let key = (lam.clone(), a.len());
        if let Some(v) = memo.get(&key) {
            return v.clone();
        }
        // μ with λ/μ a horizontal strip: λ_{i+1} ≤ μ_i ≤ λ_i.
        let mut mus = vec![Vec::new()];
        for i in 0..lam.len() {
            let lo = lam.part(i + 1);
            let mut next = Vec::new();
            for pre in &mus {
                for v in lo..=lam.part(i) {
                    let mut p: Vec<usize> = pre.clone();
                    p.push(v);
                    next.push(p);
                }
            }
            mus = next;
        }
        let mut acc = T::zero();
        for m in mus {
            let mu = Partition::from_sorted(m);
            let f = skew_hl_single(lam, &mu, &a[0], q);
            if f.is_zero() {
                continue;
            }
            acc = acc + f * rec(&mu, &a[1..], q, memo);
        }
        memo.insert(key, acc.clone());
        acc
    }
    rec(lam, a, q, &mut HashMap::new())
}

/// All P_λ(a;q) with λ₁ ≤ max_part and |λ| ≤ max_size, by adding one variable at a time.
pub fn hl_table<T: Ring>(
    a: &[T],
    q: &T,
    max_part: usize,
    max_size: usize,
) -> HashMap<Partition, T> {
    let mut table: HashMap<Partition, T> = HashMap::new();
    table.insert(Partition::empty(), T::one());
    for ai in a {
        let mut next: HashMap<Partition, T> = HashMap::new();
        for (mu, v) in &table {
            for lam in horizontal_strips_over(mu, max_part, max_size) {
                let f = skew_hl_single(&lam, mu, ai, q);
                if f.is_zero() {
                    continue;
                }
                let e = next.entry(lam).or_insert_with(T::zero);
                *e = e.clone() + f * v.clone();
            }
        }
        table = next;
    }
    table
}
