//! Six-vertex weights on the triangle {(i,j): i ≤ j}, sampling and exact enumeration.
//!
//! Vertex (i,j) sits in column i and row j; every row receives an arrow from the
//! left. Off the diagonal a left arrow continues right with probability p_{i,j}
//! and a bottom arrow continues up with probability q·p_{i,j}. On the diagonal the
//! bottom edge mirrors the left edge and the same rule applies with q₀ = t.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::params::ModelParams;
use crate::scalar::Scalar;

/// Largest box size accepted by [`enumerate_sixvertex`].
pub const MAX_ENUMERATE_N: usize = 6;

/// Vertex probabilities for rapidities a₁..a_n.
#[derive(Clone, Debug, PartialEq)]
pub struct SixVertexWeights<T> {
    pub q: T,
    pub t: T,
    pub nu: T,
    pub a: Vec<T>,
}

impl SixVertexWeights<f64> {
    pub fn from_params(p: &ModelParams) -> Result<Self> {
        p.check_probabilistic()?;
        Ok(Self { q: p.q, t: p.t, nu: p.nu, a: p.a.clone() })
    }
}

impl<T: Scalar> SixVertexWeights<T> {
    fn rapidity(&self, i: usize) -> Result<&T> {
        self.a
            .get(i.wrapping_sub(1))
            .ok_or_else(|| Error::Dimension(format!("index {i} outside 1..={}", self.a.len())))
    }

    /// p_{i,j}: bulk (1−a_ia_j)/(1−q a_ia_j), diagonal (1−a_i²)/((1−νta_i)(1+a_i/ν)).
    pub fn p(&self, i: usize, j: usize) -> Result<T> {
        let one = T::one();
        let ai = self.rapidity(i)?.clone();
        let aj = self.rapidity(j)?.clone();
        if i == j {
            let den = (one.clone() - self.nu.clone() * self.t.clone() * ai.clone())
                * (one.clone() + ai.clone() / self.nu.clone());
            Ok((one - ai.clone() * ai) / den)
        } else {
            let u = ai * aj;
            Ok((one.clone() - u.clone()) / (one - self.q.clone() * u))
        }
    }

    /// q_{|i−j|}: t on the diagonal, q elsewhere.
    pub fn q_index(&self, i: usize, j: usize) -> T {
        if i == j {
            self.t.clone()
        } else {
            self.q.clone()
        }
    }
}

/// Probability of (top, right) given (left, bottom) at vertex (i,j).
pub fn bulk_weight<T: Scalar>(
    i: usize,
    j: usize,
    input: (u8, u8),
    output: (u8, u8),
    w: &SixVertexWeights<T>,
) -> Result<T> {
    if i == 0 || j == 0 {
        return Err(invalid("vertex indices start at 1"));
    }
    let (l, b) = input;
    let (top, right) = output;
    if l + b != top + right || l > 1 || b > 1 || top > 1 || right > 1 {
        return Ok(T::zero());
    }
    if l == b {
        return Ok(T::one());
    }
    let p = w.p(i, j)?;
    let one = T::one();
    Ok(if l == 1 {
        if right == 1 { p } else { one - p }
    } else {
        let qp = w.q_index(i, j) * p;
        if top == 1 { qp } else { one - qp }
    })
}

/// One sampled configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SixVertexConfig {
    pub n: usize,
    pub params: ModelParams,
    /// Row j (1-based) as a '0'/'1' string of the top edges of vertices (1..=j, j).
    pub top_edges: Vec<String>,
    /// Row j as a '0'/'1' string of the right edges of vertices (1..=j, j).
    pub right_edges: Vec<String>,
    /// h(i,n) for i = 1..=n.
    pub heights: Vec<usize>,
    pub path_string: String,
}

/// Height h(n,n) together with the path string.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeightSample {
    pub sample_id: u64,
    pub height: usize,
    pub path_string: String,
}

fn bits(v: &[u8]) -> String {
    v.iter().map(|b| if *b == 1 { '1' } else { '0' }).collect()
}

/// Per-sample RNG stream: ChaCha8 keyed by the seed, stream = sample index.
fn stream(seed: u64, sample: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample);
    rng
}

struct Tables {
    p: Vec<Vec<f64>>,
    qp: Vec<Vec<f64>>,
}

fn tables(w: &SixVertexWeights<f64>) -> Result<Tables> {
    let n = w.a.len();
    let mut p = vec![vec![0.0; n + 1]; n + 1];
    let mut qp = vec![vec![0.0; n + 1]; n + 1];
    for j in 1..=n {
        for i in 1..=j {
            p[j][i] = w.p(i, j)?;
            qp[j][i] = w.q_index(i, j) * p[j][i];
        }
    }
    Ok(Tables { p, qp })
}

/// Sweeps rows j = 1..n, columns i = 1..j; returns the top-edge rows and right-edge rows.
fn sweep(n: usize, tb: &Tables, rng: &mut ChaCha8Rng, keep: bool) -> (Vec<u8>, Vec<Vec<u8>>, Vec<Vec<u8>>) {
    let mut tops: Vec<u8> = Vec::with_capacity(n);
    let mut all_tops = Vec::new();
    let mut all_rights = Vec::new();
    for j in 1..=n {
        let mut l = 1u8;
        let mut row_rights = Vec::new();
        for i in 1..=j {
            let b = if i < j { tops[i - 1] } else { 1 - l };
            let (top, right) = match (l, b) {
                (0, 0) => (0, 0),
                (1, 1) => (1, 1),
                (1, 0) => {
                    if rng.gen::<f64>() < tb.p[j][i] { (0, 1) } else { (1, 0) }
                }
                _ => {
                    if rng.gen::<f64>() < tb.qp[j][i] { (1, 0) } else { (0, 1) }
                }
            };
            if i < j {
                tops[i - 1] = top;
            } else {
                tops.push(top);
            }
            if keep {
                row_rights.push(right);
            }
            l = right;
        }
        if keep {
            all_tops.push(tops.clone());
            all_rights.push(row_rights);
        }
    }
    (tops, all_tops, all_rights)
}

/// Samples one configuration on the n-box.
pub fn sample_sixvertex(n: usize, params: &ModelParams, seed: u64) -> Result<SixVertexConfig> {
    if params.a.len() < n {
        return Err(Error::Dimension(format!("need {n} rapidities, got {}", params.a.len())));
    }
    let mut p = params.clone();
    p.a.truncate(n);
    let w = SixVertexWeights::from_params(&p)?;
    let tb = tables(&w)?;
    let mut rng = stream(seed, 0);
    let (path, tops, rights) = sweep(n, &tb, &mut rng, true);
    let mut heights = Vec::with_capacity(n);
    let mut acc = 0;
    for b in &path {
        acc += *b as usize;
        heights.push(acc);
    }
    Ok(SixVertexConfig {
        n,
        params: p,
        top_edges: tops.iter().map(|r| bits(r)).collect(),
        right_edges: rights.iter().map(|r| bits(r)).collect(),
        heights,
        path_string: bits(&path),
    })
}

/// Samples `count` independent heights h(n,n) in parallel; sample k uses stream k.
pub fn sample_heights(n: usize, params: &ModelParams, seed: u64, count: u64) -> Result<Vec<HeightSample>> {
    if params.a.len() < n {
        return Err(Error::Dimension(format!("need {n} rapidities, got {}", params.a.len())));
    }
    let mut p = params.clone();
    p.a.truncate(n);
    let w = SixVertexWeights::from_params(&p)?;
    let tb = tables(&w)?;
    Ok((0..count)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, k);
            let (path, _, _) = sweep(n, &tb, &mut rng, false);
            HeightSample {
                sample_id: k,
                height: path.iter().map(|b| *b as usize).sum(),
                path_string: bits(&path),
            }
        })
        .collect())
}

/// Exact law of the path string by dynamic programming over rows.
pub fn enumerate_sixvertex<T: Scalar>(w: &SixVertexWeights<T>) -> Result<BTreeMap<Vec<u8>, T>> {
    let n = w.a.len();
    if n > MAX_ENUMERATE_N {
        return Err(Error::TooLarge(format!("enumeration supports n <= {MAX_ENUMERATE_N}, got {n}")));
    }
    let mut states: BTreeMap<Vec<u8>, T> = BTreeMap::new();
    states.insert(Vec::new(), T::one());
    for j in 1..=n {
        let mut next: BTreeMap<Vec<u8>, T> = BTreeMap::new();
        for (tops, pr) in &states {
            // partial row states: (tops so far, left edge, probability)
            let mut partial: Vec<(Vec<u8>, u8, T)> = vec![(Vec::new(), 1, pr.clone())];
            for i in 1..=j {
                let mut np = Vec::new();
                for (row, l, pp) in partial {
                    let b = if i < j { tops[i - 1] } else { 1 - l };
                    for (top, right) in [(0u8, 0u8), (0, 1), (1, 0), (1, 1)] {
                        let wt = bulk_weight(i, j, (l, b), (top, right), w)?;
                        if wt.is_zero() {
                            continue;
                        }
                        let mut r = row.clone();
                        r.push(top);
                        np.push((r, right, pp.clone() * wt));
                    }
                }
                partial = np;
            }
            for (row, _, pp) in partial {
                let e = next.entry(row).or_insert_with(T::zero);
                *e = e.clone() + pp;
            }
        }
        states = next;
    }
    Ok(states)
}
