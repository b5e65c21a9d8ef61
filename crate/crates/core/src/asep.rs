//! Half-space ASEP on {0,1,2,…} started empty: injection at rate α and ejection at
//! rate β at site 0, right jumps at rate 1 and left jumps at rate q.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// ν⁻¹ together with the derived density and t.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryDensity {
    pub nu_inv: f64,
    pub rho: f64,
    pub t: f64,
}

/// ν⁻¹ = (1−q+β−α+√((1−q+β−α)²+4αβ))/(2α), ρ = 1/(1+ν⁻¹), t = β/α.
pub fn nu_inverse_from_rates(q: f64, alpha: f64, beta: f64) -> Result<BoundaryDensity> {
    if !(alpha > 0.0) {
        return Err(invalid(format!("alpha={alpha} must be positive")));
    }
    if !(0.0..1.0).contains(&q) || !(beta >= 0.0) {
        return Err(invalid(format!("need 0<=q<1 and beta>=0, got q={q}, beta={beta}")));
    }
    let c = 1.0 - q + beta - alpha;
    let disc = (c * c + 4.0 * alpha * beta).sqrt();
    // cancellation-free form of the positive root when c < 0
    let nu_inv = if c >= 0.0 { (c + disc) / (2.0 * alpha) } else { 2.0 * beta / (disc - c) };
    Ok(BoundaryDensity { nu_inv, rho: 1.0 / (1.0 + nu_inv), t: beta / alpha })
}

/// Boundary rates matching six-vertex parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsepRates {
    pub alpha: f64,
    pub beta: f64,
    /// t = 0 and ν⁻¹ = 0: every α ≥ 1−q has density 1; α = 1−q is returned.
    pub degenerate: bool,
}

/// The (α,β) with β/α = t and ν⁻¹(q,α,β) = ν⁻¹: α = (1−q)ν⁻¹/((1+ν⁻¹)(ν⁻¹−t)).
pub fn rates_from_params(q: f64, t: f64, nu: f64) -> Result<AsepRates> {
    if !(0.0..1.0).contains(&q) || !(0.0..1.0).contains(&t) || !(nu > 0.0) {
        return Err(invalid(format!("need 0<=q,t<1 and nu>0, got q={q}, t={t}, nu={nu}")));
    }
    let x = 1.0 / nu;
    if x == 0.0 {
        return Ok(AsepRates { alpha: 1.0 - q, beta: 0.0, degenerate: true });
    }
    if !(x > t) {
        return Err(invalid(format!("nu*t={} must be < 1", nu * t)));
    }
    let alpha = (1.0 - q) * x / ((1.0 + x) * (x - t));
    Ok(AsepRates { alpha, beta: t * alpha, degenerate: false })
}

/// Unordered set of sites with O(1) insert, remove and uniform choice.
#[derive(Clone, Debug, Default)]
struct IndexSet {
    items: Vec<usize>,
    pos: Vec<usize>,
}

const ABSENT: usize = usize::MAX;

impl IndexSet {
    fn ensure(&mut self, i: usize) {
        if i >= self.pos.len() {
            self.pos.resize(2 * i + 16, ABSENT);
        }
    }

    fn insert(&mut self, i: usize) {
        self.ensure(i);
        if self.pos[i] == ABSENT {
            self.pos[i] = self.items.len();
            self.items.push(i);
        }
    }

    fn remove(&mut self, i: usize) {
        if i < self.pos.len() && self.pos[i] != ABSENT {
            let k = self.pos[i];
            let last = *self.items.last().expect("nonempty");
            self.items.swap_remove(k);
            if last != i {
                self.pos[last] = k;
            }
            self.pos[i] = ABSENT;
        }
    }

    fn len(&self) -> usize {
        self.items.len()
    }

    fn pick(&self, rng: &mut impl Rng) -> usize {
        self.items[rng.gen_range(0..self.items.len())]
    }
}

/// Configuration, clock and optional (time, N) log.
#[derive(Clone, Debug)]
pub struct AsepState {
    q: f64,
    alpha: f64,
    beta: f64,
    occ: Vec<bool>,
    /// Occupied sites i with i+1 empty.
    right: IndexSet,
    /// Occupied sites i ≥ 1 with i−1 empty.
    left: IndexSet,
    particles: usize,
    pub clock: f64,
    pub log: Option<Vec<(f64, usize)>>,
}

impl AsepState {
    pub fn new(q: f64, alpha: f64, beta: f64, record: bool) -> Result<Self> {
        if !(0.0..1.0).contains(&q) || !(alpha >= 0.0) || !(beta >= 0.0) {
            return Err(invalid(format!("need 0<=q<1, alpha,beta>=0; got q={q}, alpha={alpha}, beta={beta}")));
        }
        Ok(Self {
            q,
            alpha,
            beta,
            occ: vec![false; 64],
            right: IndexSet::default(),
            left: IndexSet::default(),
            particles: 0,
            clock: 0.0,
            log: record.then(|| vec![(0.0, 0)]),
        })
    }

    pub fn current(&self) -> usize {
        self.particles
    }

    pub fn occupied(&self, i: usize) -> bool {
        self.occ.get(i).copied().unwrap_or(false)
    }

    pub fn occupied_sites(&self) -> Vec<usize> {
        (0..self.occ.len()).filter(|&i| self.occ[i]).collect()
    }

    /// Incrementally maintained total rate.
    pub fn total_rate(&self) -> f64 {
        let b = if self.occ[0] { self.beta } else { self.alpha };
        b + self.right.len() as f64 + self.q * self.left.len() as f64
    }

    /// Total rate recomputed from the occupancy vector.
    pub fn recomputed_rate(&self) -> f64 {
        let mut r = if self.occ[0] { self.beta } else { self.alpha };
        for i in 0..self.occ.len() {
            if self.occ[i] {
                if !self.occupied(i + 1) {
                    r += 1.0;
                }
                if i > 0 && !self.occ[i - 1] {
                    r += self.q;
                }
            }
        }
        r
    }

    fn refresh(&mut self, i: usize) {
        if i + 1 >= self.occ.len() {
            self.occ.resize(2 * (i + 1), false);
        }
        if self.occ[i] && !self.occ[i + 1] {
            self.right.insert(i);
        } else {
            self.right.remove(i);
        }
        if i > 0 && self.occ[i] && !self.occ[i - 1] {
            self.left.insert(i);
        } else {
            self.left.remove(i);
        }
    }

    fn set(&mut self, i: usize, v: bool) {
        if i + 1 >= self.occ.len() {
            self.occ.resize(2 * (i + 1), false);
        }
        self.occ[i] = v;
        for j in i.saturating_sub(1)..=i + 1 {
            self.refresh(j);
        }
    }

    /// Advances to time `until`; returns false if the chain is absorbed (zero total rate).
    pub fn run_until(&mut self, until: f64, rng: &mut impl Rng) -> bool {
        loop {
            let total = self.total_rate();
            if total <= 0.0 {
                self.clock = until;
                return false;
            }
            let dt = -(1.0 - rng.gen::<f64>()).ln() / total;
            if self.clock + dt > until {
                self.clock = until;
                return true;
            }
            self.clock += dt;
            let mut u = rng.gen::<f64>() * total;
            let boundary = if self.occ[0] { self.beta } else { self.alpha };
            if u < boundary {
                let filled = self.occ[0];
                self.set(0, !filled);
                if filled {
                    self.particles -= 1;
                } else {
                    self.particles += 1;
                }
                let (c, n) = (self.clock, self.particles);
                if let Some(log) = self.log.as_mut() {
                    log.push((c, n));
                }
                continue;
            }
            u -= boundary;
            let nr = self.right.len() as f64;
            if u < nr && self.right.len() > 0 {
                let i = self.right.pick(rng);
                self.set(i, false);
                self.set(i + 1, true);
            } else if self.left.len() > 0 {
                let i = self.left.pick(rng);
                self.set(i, false);
                self.set(i - 1, true);
            } else {
                let i = self.right.pick(rng);
                self.set(i, false);
                self.set(i + 1, true);
            }
            debug_assert!((self.total_rate() - self.recomputed_rate()).abs() < 1e-9);
        }
    }
}

fn stream(seed: u64, sample: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample);
    rng
}

/// One run to raw time `time_end`; returns the final state (with log if requested).
pub fn simulate_asep(q: f64, alpha: f64, beta: f64, time_end: f64, seed: u64, record: bool) -> Result<AsepState> {
    let mut st = AsepState::new(q, alpha, beta, record)?;
    let mut rng = stream(seed, 0);
    st.run_until(time_end, &mut rng);
    Ok(st)
}

/// N(time_end) for `count` independent runs; run k uses RNG stream k.
pub fn sample_currents(q: f64, alpha: f64, beta: f64, time_end: f64, count: u64, seed: u64) -> Result<Vec<usize>> {
    AsepState::new(q, alpha, beta, false)?;
    Ok((0..count)
        .into_par_iter()
        .map(|k| {
            let mut st = AsepState::new(q, alpha, beta, false).expect("validated");
            let mut rng = stream(seed, k);
            st.run_until(time_end, &mut rng);
            st.current()
        })
        .collect())
}

/// Empirical distribution function with binomial standard errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCdf {
    pub nsamples: usize,
    /// Sorted sample values.
    pub values: Vec<i64>,
}

impl EmpiricalCdf {
    pub fn new(mut values: Vec<i64>) -> Self {
        values.sort_unstable();
        Self { nsamples: values.len(), values }
    }

    /// Fraction of samples ≤ s.
    pub fn eval(&self, s: f64) -> f64 {
        if self.nsamples == 0 {
            return 0.0;
        }
        let k = self.values.partition_point(|&v| (v as f64) <= s);
        k as f64 / self.nsamples as f64
    }

    /// √(F(1−F)/n).
    pub fn stderr(&self, s: f64) -> f64 {
        let f = self.eval(s);
        (f * (1.0 - f) / self.nsamples.max(1) as f64).sqrt()
    }

    /// (s, F(s), stderr) on a grid.
    pub fn table(&self, grid: &[f64]) -> Vec<(f64, f64, f64)> {
        grid.iter().map(|&s| (s, self.eval(s), self.stderr(s))).collect()
    }
}

/// Empirical law of −N(τ/(1−q)).
pub fn mc_cdf(q: f64, alpha: f64, beta: f64, tau: f64, nsamples: u64, seed: u64) -> Result<EmpiricalCdf> {
    if nsamples == 0 {
        return Err(invalid("nsamples must be >= 1"));
    }
    let n = sample_currents(q, alpha, beta, tau / (1.0 - q), nsamples, seed)?;
    Ok(EmpiricalCdf::new(n.into_iter().map(|x| -(x as i64)).collect()))
}
