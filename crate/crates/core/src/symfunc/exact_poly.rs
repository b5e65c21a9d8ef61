//! Sparse multivariate Laurent polynomials with exact rational coefficients.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::scalar::{Ring, Scalar};

/// Exponent vector; trailing zeros are trimmed so constants need no arity.
pub type Monomial = Vec<i32>;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExactPoly {
    terms: BTreeMap<Monomial, BigRational>,
}

fn trim(mut e: Monomial) -> Monomial {
    while e.last() == Some(&0) {
        e.pop();
    }
    e
}

fn add_exps(a: &[i32], b: &[i32]) -> Monomial {
    let n = a.len().max(b.len());
    trim((0..n).map(|i| a.get(i).copied().unwrap_or(0) + b.get(i).copied().unwrap_or(0)).collect())
}

impl ExactPoly {
    pub fn constant(c: BigRational) -> Self {
        Self::monomial(Vec::new(), c)
    }

    pub fn monomial(exps: Monomial, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(trim(exps), c);
        }
        Self { terms }
    }

    /// The single variable with index `var`.
    pub fn var(var: usize) -> Self {
        let mut e = vec![0; var + 1];
        e[var] = 1;
        Self::monomial(e, BigRational::one())
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[i32]) -> BigRational {
        self.terms.get(&trim(exps.to_vec())).cloned().unwrap_or_else(BigRational::zero)
    }

    fn insert_add(&mut self, e: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect() }
    }

    /// Product keeping only monomials accepted by `keep`.
    pub fn mul_truncated(&self, other: &Self, keep: &dyn Fn(&[i32]) -> bool) -> Self {
        let mut out = Self::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e = add_exps(e1, e2);
                if keep(&e) {
                    out.insert_add(e, c1 * c2);
                }
            }
        }
        out
    }

    /// Drops monomials rejected by `keep`.
    pub fn retain(&self, keep: &dyn Fn(&[i32]) -> bool) -> Self {
        Self { terms: self.terms.iter().filter(|(k, _)| keep(k)).map(|(k, v)| (k.clone(), v.clone())).collect() }
    }

    /// Evaluates at rational values (missing variables are 0 only if never used).
    pub fn substitute(&self, values: &[BigRational]) -> BigRational {
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                if k != 0 {
                    t = t * values[i].powi(k);
                }
            }
            acc += t;
        }
        acc
    }
}

impl Add for ExactPoly {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (e, c) in rhs.terms {
            self.insert_add(e, c);
        }
        self
    }
}

impl Sub for ExactPoly {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for ExactPoly {
    type Output = Self;
    fn neg(self) -> Self {
        Self { terms: self.terms.into_iter().map(|(k, v)| (k, -v)).collect() }
    }
}

impl Mul for ExactPoly {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.mul_truncated(&rhs, &|_| true)
    }
}

impl Zero for ExactPoly {
    fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for ExactPoly {
    fn one() -> Self {
        Self::constant(BigRational::one())
    }
}

impl Ring for ExactPoly {
    fn from_int(v: i64) -> Self {
        Self::constant(BigRational::from_int(v))
    }
}
