use std::collections::BTreeMap;

use halfspace::lattice::*;
use halfspace::measures::{hl_pathstring_law, Caps};
use halfspace::params::ModelParams;
use halfspace::scalar::rat;
use halfspace::symfunc::partition::{horizontal_strips_over, partitions_bounded, Partition};
use halfspace::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;

fn weights_f64(q: f64, t: f64, nu: f64, a: Vec<f64>) -> SixVertexWeights<f64> {
    SixVertexWeights { q, t, nu, a }
}

fn weights_rat(q: BigRational, t: BigRational, nu: BigRational, a: Vec<BigRational>) -> SixVertexWeights<BigRational> {
    SixVertexWeights { q, t, nu, a }
}

#[test]
fn bulk_weight_examples() {
    let w = weights_f64(0.3, 0.2, 2.0, vec![0.4, 0.5]);
    assert_eq!(bulk_weight(1, 2, (0, 0), (0, 0), &w).unwrap(), 1.0);
    assert_eq!(bulk_weight(1, 2, (1, 1), (1, 1), &w).unwrap(), 1.0);
    assert_eq!(bulk_weight(1, 2, (1, 0), (1, 1), &w).unwrap(), 0.0);
    let a = 0.4;
    let pii = (1.0 - a * a) / ((1.0 - 2.0 * 0.2 * a) * (1.0 + a / 2.0));
    assert!((bulk_weight(1, 1, (1, 0), (0, 1), &w).unwrap() - pii).abs() < 1e-15);
    assert!((bulk_weight(1, 1, (0, 1), (1, 0), &w).unwrap() - 0.2 * pii).abs() < 1e-15);
    let u = 0.4 * 0.5;
    let p = (1.0 - u) / (1.0 - 0.3 * u);
    assert!((bulk_weight(1, 2, (1, 0), (0, 1), &w).unwrap() - p).abs() < 1e-15);
    assert!((bulk_weight(1, 2, (0, 1), (1, 0), &w).unwrap() - 0.3 * p).abs() < 1e-15);
}

#[test]
fn enumeration_n1_matches_closed_form() {
    let (a, t, nu) = (rat(1, 5), rat(1, 4), rat(2, 1));
    let w = weights_rat(rat(1, 3), t.clone(), nu.clone(), vec![a.clone()]);
    let law = enumerate_sixvertex(&w).unwrap();
    let one = BigRational::one();
    let p0 = (one.clone() - a.clone() * a.clone()) / ((one.clone() - a.clone() * nu.clone() * t) * (one + a / nu));
    assert_eq!(law[&vec![0u8]], p0);
}

#[test]
fn enumeration_sums_to_one_exactly() {
    for n in 1..=4 {
        let a: Vec<BigRational> = (0..n).map(|i| rat(1, 3 + i as i64)).collect();
        let w = weights_rat(rat(1, 3), rat(1, 4), rat(2, 1), a);
        let law = enumerate_sixvertex(&w).unwrap();
        let total = law.values().fold(BigRational::zero(), |acc, v| acc + v);
        assert_eq!(total, BigRational::one());
        assert!(law.values().all(|v| *v >= BigRational::zero()));
    }
}

#[test]
fn enumeration_rejects_large_n() {
    let w = weights_f64(0.3, 0.2, 2.0, vec![0.3; MAX_ENUMERATE_N + 1]);
    assert!(enumerate_sixvertex(&w).is_err());
}

fn compare_with_hl(q: f64, t: f64, nu: f64, a: Vec<f64>) {
    let exact = enumerate_sixvertex(&weights_f64(q, t, nu, a.clone())).unwrap();
    let hl = hl_pathstring_law(&a, q, t, nu, Caps { max_part: 30, max_len: a.len() }).unwrap();
    let tol = hl.tail_bound + 1e-10;
    assert!(hl.tail_bound < 1e-10, "tail {}", hl.tail_bound);
    for (s, p) in &exact {
        let h = hl.probs.get(s).copied().unwrap_or(0.0);
        assert!((p - h).abs() <= tol, "string {s:?}: lattice {p} vs hl {h}");
    }
    for (s, h) in &hl.probs {
        if !exact.contains_key(s) {
            assert!(h.abs() <= tol, "string {s:?} missing from lattice, hl {h}");
        }
    }
}

#[test]
fn pathstring_law_matches_hl_process() {
    compare_with_hl(1.0 / 3.0, 0.25, 2.0, vec![0.2; 3]);
    compare_with_hl(0.5, 0.1, 1.5, vec![0.3, 0.25, 0.2]);
    compare_with_hl(0.2, 0.4, 0.8, vec![0.25, 0.15]);
    compare_with_hl(0.1, 0.0, 3.0, vec![0.3, 0.2, 0.1]);
}

#[test]
fn sampler_matches_enumeration() {
    let params = ModelParams::new(0.3, 0.2, 2.0, 0.5, vec![0.4, 0.5]);
    let n_samples = 1_000_000u64;
    let samples = sample_heights(2, &params, 7, n_samples).unwrap();
    let mut freq: BTreeMap<String, u64> = BTreeMap::new();
    for s in &samples {
        assert_eq!(s.height, s.path_string.chars().filter(|c| *c == '1').count());
        *freq.entry(s.path_string.clone()).or_default() += 1;
    }
    let exact = enumerate_sixvertex(&SixVertexWeights::from_params(&params).unwrap()).unwrap();
    for (s, p) in exact {
        let key: String = s.iter().map(|b| if *b == 1 { '1' } else { '0' }).collect();
        let f = *freq.get(&key).unwrap_or(&0) as f64 / n_samples as f64;
        let se = (p * (1.0 - p) / n_samples as f64).sqrt();
        assert!((f - p).abs() <= 4.0 * se + 1e-12, "{key}: {f} vs {p}");
    }
}

#[test]
fn sampler_is_reproducible_and_thread_independent() {
    let params = ModelParams::homogeneous(0.4, 0.3, 1.5, 0.5, 0.5, 12);
    let a = sample_heights(12, &params, 99, 200).unwrap();
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| sample_heights(12, &params, 99, 200).unwrap());
    assert_eq!(a, b);
}

#[test]
fn sampled_configuration_invariants() {
    let params = ModelParams::homogeneous(0.4, 0.3, 1.5, 0.5, 0.6, 10);
    for seed in 0..20 {
        let c = sample_sixvertex(10, &params, seed).unwrap();
        let bits = |s: &str| s.bytes().map(|b| b - b'0').collect::<Vec<u8>>();
        for j in 1..=10 {
            let tops = bits(&c.top_edges[j - 1]);
            let rights = bits(&c.right_edges[j - 1]);
            let below = if j > 1 { bits(&c.top_edges[j - 2]) } else { vec![] };
            let mut left = 1u8;
            for i in 1..=j {
                // diagonal bottom edge mirrors the left edge
                let bottom = if i < j { below[i - 1] } else { 1 - left };
                assert_eq!(left + bottom, tops[i - 1] + rights[i - 1]);
                left = rights[i - 1];
            }
        }
        assert_eq!(c.heights[9], c.path_string.chars().filter(|ch| *ch == '1').count());
        let json = serde_json::to_string(&c).unwrap();
        let back: SixVertexConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
    }
}

#[test]
fn sampler_rejects_bad_params() {
    let params = ModelParams::homogeneous(0.4, 0.8, 2.0, 0.5, 0.5, 3);
    assert!(sample_sixvertex(3, &params, 0).is_err());
}

#[test]
fn declared_region_alone_is_not_stochastic() {
    // nu*t < 1 yet the boundary probability exceeds 1
    let w = weights_f64(0.3, 0.3, 3.0, vec![0.1]);
    assert!(w.p(1, 1).unwrap() > 1.0);
    let params = ModelParams::homogeneous(0.3, 0.3, 3.0, 0.5, 0.1, 1);
    assert!(sample_sixvertex(1, &params, 0).is_err());
}

#[test]
fn boson_row_examples() {
    let q = rat(1, 3);
    let a = rat(1, 4);
    let empty = BosonRowState { left: 0, bottom: vec![0, 0, 0], rapidity: a.clone(), palette: Palette::First };
    assert_eq!(boson_row_weight(&empty, &[0, 0, 0], 0, &q), BigRational::one());
    let turn = BosonRowState { left: 1, bottom: vec![0], rapidity: a.clone(), palette: Palette::First };
    assert_eq!(boson_row_weight(&turn, &[1], 0, &q), BigRational::one() - q.clone());
    let (t, nu) = (rat(1, 5), rat(3, 1));
    let one = BigRational::one();
    let expect = (a.clone() / nu.clone() * (one.clone() - t.clone() * nu.clone() * nu.clone())
        + a.clone() * a.clone() * (one.clone() - t.clone()))
        / ((one.clone() - a.clone() * nu.clone() * t.clone()) * (one + a.clone() / nu.clone()));
    assert_eq!(boundary_vertex_weight(1, 1, &a, &t, &nu), expect);
}

#[test]
fn boundary_vertex_is_stochastic() {
    for (a, t, nu) in [(rat(1, 7), rat(1, 5), rat(3, 1)), (rat(9, 10), rat(0, 1), rat(1, 2)), (rat(1, 2), rat(3, 4), rat(1, 1))] {
        for i in 0..=1 {
            let s = boundary_vertex_weight(i, 0, &a, &t, &nu) + boundary_vertex_weight(i, 1, &a, &t, &nu);
            assert_eq!(s, BigRational::one());
        }
    }
}

#[test]
fn row_is_skew_hl_small_cases() {
    let q = rat(2, 7);
    let a = rat(1, 3);
    for mu in partitions_bounded(4, 4, 6) {
        for lam in horizontal_strips_over(&mu, 5, 6) {
            for pal in [Palette::First, Palette::Second] {
                let r = verify_row_is_skew_hl(&lam, &mu, &a, &q, pal);
                assert!(r.matches, "{lam} / {mu} {pal:?}: {:?}", r.cases);
            }
        }
    }
    let one = Partition::new(vec![1]).unwrap();
    let r = verify_row_is_skew_hl(&one, &Partition::empty(), &a, &q, Palette::First);
    assert_eq!(r.cases[1].1, a.to_string());
    let r = verify_row_is_skew_hl(&Partition::empty(), &Partition::empty(), &a, &q, Palette::First);
    assert_eq!(r.cases[0].1, "1");
}

#[test]
fn boundary_exchange_holds_exactly() {
    let (a, q, t, nu) = (rat(1, 7), rat(1, 3), rat(1, 5), rat(3, 1));
    let r = verify_boundary_exchange(3, &a, &q, &t, &nu, &BigRational::zero()).unwrap();
    assert_eq!(r.checked, 64);
    assert!(r.holds(), "{:?}", r.failures.first());
    let r = verify_boundary_exchange(5, &rat(2, 5), &rat(3, 4), &rat(1, 2), &rat(1, 3), &BigRational::zero()).unwrap();
    assert!(r.holds());
}

#[test]
fn boundary_exchange_detects_tampering() {
    let (a, q, t, nu) = (rat(1, 7), rat(1, 3), rat(1, 5), rat(3, 1));
    let r = verify_boundary_exchange(3, &a, &q, &t, &nu, &rat(1, 1000)).unwrap();
    assert!(!r.holds());
}

#[test]
fn yang_baxter_exchange_holds_exactly() {
    let r = verify_yb_exchange(2, 2, &rat(1, 3), &rat(2, 5), &rat(1, 4));
    assert_eq!(r.checked, 81 * 4);
    assert!(r.holds(), "{:?}", r.failures.first());
    let r = verify_yb_exchange(3, 2, &rat(3, 4), &rat(1, 7), &rat(2, 3));
    assert!(r.holds());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn vertex_probabilities_are_stochastic(
        q in 0.0f64..0.99, nu in 0.05f64..5.0, tf in 0.0f64..0.99,
        ai in 0.01f64..0.99, aj in 0.01f64..0.99,
    ) {
        let t = tf * (1.0f64).min(1.0 / nu);
        let pii = |a: f64| (1.0 - a * a) / ((1.0 - nu * t * a) * (1.0 + a / nu));
        prop_assume!(pii(ai) <= 1.0 && pii(aj) <= 1.0);
        let w = weights_f64(q, t, nu, vec![ai, aj]);
        for (i, j) in [(1, 1), (1, 2), (2, 2)] {
            for input in [(0u8, 0u8), (0, 1), (1, 0), (1, 1)] {
                let mut s = 0.0;
                for out in [(0u8, 0u8), (0, 1), (1, 0), (1, 1)] {
                    let x = bulk_weight(i, j, input, out, &w).unwrap();
                    prop_assert!(x >= -1e-15);
                    s += x;
                }
                prop_assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn enumeration_is_exactly_normalized(a in proptest::collection::vec(1i64..9, 1..4), qn in 0i64..9, tn in 0i64..4) {
        let a: Vec<BigRational> = a.into_iter().map(|x| rat(x, 10)).collect();
        let w = weights_rat(rat(qn, 10), rat(tn, 10), rat(2, 1), a);
        let law = enumerate_sixvertex(&w).unwrap();
        let total = law.values().fold(BigRational::zero(), |acc, v| acc + v);
        prop_assert_eq!(total.to_f64().unwrap(), 1.0);
        prop_assert!(total == BigRational::one());
    }
}
