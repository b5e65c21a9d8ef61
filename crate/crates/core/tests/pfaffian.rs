use std::collections::BTreeMap;

use halfspace::lattice::{enumerate_sixvertex, SixVertexWeights};
use halfspace::measures::{rs_pmf, theta_pmf, SignedPmf};
use halfspace::pfaffian::kernel::{cdf_table_checked, KernelParams, PfWindow, Radii, Regime};
use halfspace::pfaffian::*;
use halfspace::{Error, ModelParams};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_skew(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v: f64 = rng.gen_range(-1.0..1.0);
            m[(i, j)] = v;
            m[(j, i)] = -v;
        }
    }
    m
}

fn params(nu: f64, n: usize) -> ModelParams {
    ModelParams::homogeneous(0.3, 0.2, nu, 0.5, 0.4, n)
}

fn kernel(nu: f64) -> SkewBlockKernel {
    SkewBlockKernel::new(KernelParams::sixvertex(&params(nu, 2)).unwrap()).unwrap()
}

/// Law of h(n,n) + χ + 2S from exact enumeration.
fn oracle(p: &ModelParams) -> SignedPmf {
    let w = SixVertexWeights::<f64>::from_params(p).unwrap();
    let mut h = BTreeMap::new();
    for (s, pr) in enumerate_sixvertex(&w).unwrap() {
        *h.entry(s.iter().map(|&b| b as i64).sum::<i64>()).or_insert(0.0) += pr;
    }
    SignedPmf::from_map(&h, 0.0)
        .unwrap()
        .convolve(&rs_pmf(p.q, p.t, 80).unwrap())
        .convolve(&theta_pmf(p.zeta, p.q, 20).unwrap().dilate(2))
}

/// E[q^{−k h(n,m)}] from the enumerated row-m path strings.
fn qmoment_enum(n: usize, m: usize, k: i32, p: &ModelParams) -> f64 {
    let mut pm = p.clone();
    pm.a.truncate(m);
    let w = SixVertexWeights::<f64>::from_params(&pm).unwrap();
    enumerate_sixvertex(&w)
        .unwrap()
        .iter()
        .map(|(s, pr)| pr * p.q.powi(-k * s[..n].iter().map(|&b| b as i32).sum::<i32>()))
        .sum()
}

#[test]
fn pfaffian_of_two_by_two() {
    let m = DMatrix::from_row_slice(2, 2, &[0.0, 2.5, -2.5, 0.0]);
    assert_eq!(pfaffian(&m).unwrap(), 2.5);
}

#[test]
fn pfaffian_of_four_by_four_matches_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let m = random_skew(4, &mut rng);
    let f = m[(0, 1)] * m[(2, 3)] - m[(0, 2)] * m[(1, 3)] + m[(0, 3)] * m[(1, 2)];
    assert!((pfaffian(&m).unwrap() - f).abs() < 1e-14);
    assert!((pfaffian_matching(&m).unwrap() - f).abs() < 1e-14);
}

#[test]
fn pfaffian_rejects_odd_and_non_skew() {
    assert!(matches!(pfaffian(&DMatrix::zeros(3, 3)), Err(Error::Dimension(_))));
    let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    assert!(pfaffian(&m).is_err());
}

/// Σ_I (−1)^{Σ_{i∈I} i − |I|/2} Pf(A_I) Pf(B_{I^c}), indices counted from 1.
#[test]
fn pfaffian_sum_expansion_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..5 {
        let a = random_skew(6, &mut rng);
        let b = random_skew(6, &mut rng);
        let lhs = pfaffian(&(&a + &b)).unwrap();
        let mut rhs = 0.0;
        for mask in 0u32..64 {
            if mask.count_ones() % 2 == 1 {
                continue;
            }
            let inside: Vec<usize> = (0..6).filter(|i| mask >> i & 1 == 1).collect();
            let outside: Vec<usize> = (0..6).filter(|i| mask >> i & 1 == 0).collect();
            let exp: usize = inside.iter().map(|i| i + 1).sum::<usize>() - inside.len() / 2;
            let sign = if exp % 2 == 0 { 1.0 } else { -1.0 };
            let pa = pfaffian(&a.select_rows(&inside).select_columns(&inside)).unwrap();
            let pb = pfaffian(&b.select_rows(&outside).select_columns(&outside)).unwrap();
            rhs += sign * pa * pb;
        }
        assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
    }
}

proptest! {
    #[test]
    fn pfaffian_squared_is_determinant(half in 1usize..=6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_skew(2 * half, &mut rng);
        let pf = pfaffian(&m).unwrap();
        let det = m.clone().determinant();
        prop_assert!((pf * pf - det).abs() < 1e-10 * det.abs().max(1.0));
    }

    #[test]
    fn elimination_matches_matching_expansion(half in 1usize..=4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_skew(2 * half, &mut rng);
        prop_assert!((pfaffian(&m).unwrap() - pfaffian_matching(&m).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn difference_operator_examples() {
    let g = -0.4;
    let c = |_: i64| 3.0;
    assert_eq!(apply_d(g, &c, Some(GrowthBound { c: 3.0, rate: 1.0 }), 5).unwrap(), 0.0);

    let w: f64 = 1.3;
    let f = |y: i64| w.powi(-y as i32);
    let x = 2;
    let got = apply_d(g, &f, Some(GrowthBound { c: w.powi(-x as i32), rate: w }), x).unwrap();
    let want = (1.0 - g).powi(2) / g * (1.0 / (1.0 - g / w) - 1.0 / (1.0 - g * w)) * w.powi(-x as i32) / 2.0;
    assert!((got - want).abs() < 1e-12, "{got} vs {want}");

    assert!(apply_d(g, &f, None, 0).is_err());
    assert!(apply_d(g, &f, Some(GrowthBound { c: 1.0, rate: 3.0 }), 0).is_err());
}

#[test]
fn difference_operator_on_kronecker_delta() {
    let k = kernel(2.0);
    let g = k.params().gamma2();
    let cert = Some(GrowthBound { c: 1.0, rate: 1.0 });
    for x in -3i64..=3 {
        for y in -3i64..=3 {
            let dx = apply_d(g, &|u| (u == y) as i64 as f64, cert, x).unwrap();
            let dy = apply_d(g, &|v| (x == v) as i64 as f64, cert, y).unwrap();
            assert!((dx - dy - k.delta_term(x, y)).abs() < 1e-13);
        }
    }
}

#[test]
fn kernel_is_skew_in_every_regime() {
    for nu in [2.0, 1.0, 0.5] {
        let k = kernel(nu);
        for x in -1i64..=3 {
            assert!(k.kernel_k(x, x).unwrap().abs() < 1e-10);
            for y in -1i64..=3 {
                let b = k.block(x, y).unwrap();
                let bt = k.block(y, x).unwrap();
                for i in 0..2 {
                    for j in 0..2 {
                        assert!((b[i][j] + bt[j][i]).abs() < 1e-10, "nu={nu} ({x},{y}) [{i}{j}]");
                    }
                }
            }
        }
    }
}

#[test]
fn off_diagonal_block_equals_difference_operator_of_kernel() {
    let k = kernel(2.0);
    let g = k.params().gamma2();
    let rate = k.params().radii.r_prime * 1.05;
    for (x, y) in [(0i64, 1i64), (2, 0), (1, 3)] {
        let scale = (-3..=3).map(|d| k.kernel_k(x, y + d).unwrap().abs()).fold(0.0, f64::max);
        let f = |v: i64| k.kernel_k(x, v).unwrap();
        let d = apply_d(g, &f, Some(GrowthBound { c: 10.0 * scale, rate }), y).unwrap();
        let b = k.block(x, y).unwrap();
        assert!((b[0][1] + 2.0 * d).abs() < 1e-8, "{} vs {}", b[0][1], -2.0 * d);
    }
}

#[test]
fn kernel_quadrature_is_node_stable() {
    let kp = KernelParams::sixvertex(&params(2.0, 2)).unwrap();
    let a = SkewBlockKernel::new(kp.clone()).unwrap();
    let b = SkewBlockKernel::new(kp.clone().with_nodes(2 * kp.nodes)).unwrap();
    for (x, y) in [(0i64, 1i64), (1, 2), (0, 3)] {
        assert!((a.kernel_k(x, y).unwrap() - b.kernel_k(x, y).unwrap()).abs() < 1e-10);
    }
}

#[test]
fn kernel_imaginary_residual_is_small() {
    for nu in [2.0, 1.0, 0.5] {
        let w = kernel(nu).window(-2, 10).unwrap();
        assert!(w.imag_residual < 1e-9);
        assert!(w.skew_deviation < 1e-9);
    }
}

#[test]
fn radii_crossing_a_pole_are_rejected_with_its_name() {
    let kp = KernelParams::sixvertex(&params(1.2, 2)).unwrap();
    let bad = kp.clone().with_radii(Radii { r: 1.5, r_prime: 1.1, r_b: 1.3 });
    match bad {
        Err(Error::Pole(msg)) => assert!(msg.contains("nu*q^-0"), "{msg}"),
        other => panic!("expected a pole error, got {other:?}"),
    }
    let bad = kp.with_radii(Radii { r: 1.2, r_prime: 1.0, r_b: 1.3 });
    assert!(matches!(bad, Err(Error::Pole(m)) if m.contains("z=±1")));
}

#[test]
fn regime_mismatch_is_an_error() {
    let kp = KernelParams::sixvertex(&params(2.0, 2)).unwrap();
    assert!(matches!(kp.clone().with_regime(Regime::Gauss), Err(Error::Regime(_))));
    assert_eq!(kp.with_regime(Regime::Base).unwrap().regime, Regime::Base);
    assert_eq!(Regime::for_nu(1.0), Regime::Goe);
    assert_eq!(Regime::for_nu(0.7), Regime::Gauss);
}

#[test]
fn zero_kernel_gives_one() {
    let m = 5;
    let mut j = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        j[(2 * i, 2 * i + 1)] = 1.0;
        j[(2 * i + 1, 2 * i)] = -1.0;
    }
    let w = PfWindow {
        s: 0,
        m,
        matrix: j,
        alpha: vec![0.0; 2 * m],
        beta: vec![0.0; 2 * m],
        skew_deviation: 0.0,
        imag_residual: 0.0,
    };
    assert_eq!(w.value().unwrap(), 1.0);
}

#[test]
fn rank_two_kernel_truncates_after_first_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let m = 6;
    let alpha: Vec<f64> = (0..2 * m).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let beta: Vec<f64> = (0..2 * m).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let mut j = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        j[(2 * i, 2 * i + 1)] = 1.0;
        j[(2 * i + 1, 2 * i)] = -1.0;
    }
    // K = βαᵀ − αβᵀ, so J − K = J + αβᵀ − βαᵀ
    let first: f64 = (0..m).map(|x| beta[2 * x] * alpha[2 * x + 1] - alpha[2 * x] * beta[2 * x + 1]).sum();
    let w = PfWindow { s: 0, m, matrix: j, alpha, beta, skew_deviation: 0.0, imag_residual: 0.0 };
    let want = 1.0 - first;
    assert!((w.value().unwrap() - want).abs() < 1e-9);
    assert!((pfaffian(&w.full_matrix()).unwrap() - want).abs() < 1e-9);
}

/// Pf(J − K) = Σ_S (−1)^{|S|} Pf(K_S) over subsets S of the window points.
fn subset_series(k: &DMatrix<f64>, max_order: usize) -> f64 {
    let m = k.nrows() / 2;
    let mut acc = 0.0;
    for mask in 0u32..(1 << m) {
        let size = mask.count_ones() as usize;
        if size > max_order {
            continue;
        }
        let idx: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).flat_map(|i| [2 * i, 2 * i + 1]).collect();
        let pf = if idx.is_empty() { 1.0 } else { pfaffian(&k.select_rows(&idx).select_columns(&idx)).unwrap() };
        acc += if size % 2 == 0 { pf } else { -pf };
    }
    acc
}

#[test]
fn window_pfaffian_matches_series_expansion() {
    let k = kernel(2.0);
    let w = k.window(1, 6).unwrap();
    let mut jm = DMatrix::zeros(12, 12);
    for i in 0..6 {
        jm[(2 * i, 2 * i + 1)] = 1.0;
        jm[(2 * i + 1, 2 * i)] = -1.0;
    }
    let kk = &jm - w.full_matrix();
    assert!((subset_series(&kk, 6) - w.value().unwrap()).abs() < 1e-10);

    let small = &kk * 0.25;
    let direct = pfaffian(&(&jm - &small)).unwrap();
    let series = subset_series(&small, 3);
    let rest = (subset_series(&small, 6) - series).abs();
    assert!((direct - series).abs() <= 1.5 * rest + 1e-12);
    assert!((direct - series).abs() < 1e-3);
}

#[test]
fn window_pfaffian_squared_is_determinant() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for nu in [2.0, 1.0, 0.5] {
        let k = kernel(nu);
        for _ in 0..10 {
            let lo = rng.gen_range(-4i64..4);
            let hi = lo + rng.gen_range(1i64..8);
            let m = k.window(lo, hi).unwrap().full_matrix();
            let pf = pfaffian(&m).unwrap();
            let det = m.clone().determinant();
            assert!((pf * pf - det).abs() < 1e-10 * det.abs().max(1.0));
        }
    }
}

#[test]
fn window_doubling_is_stable() {
    let k = kernel(2.0);
    let a = k.fredholm_window(-2, 30).unwrap();
    let b = k.fredholm_window(-2, 60).unwrap();
    assert!((a - b).abs() < 1e-9);
}

#[test]
fn sixvertex_cdf_matches_enumeration_oracle() {
    for nu in [2.0, 1.0, 0.8, 0.5] {
        let p = params(nu, 2);
        let orc = oracle(&p);
        let tab = cdf_sixvertex_pfaffian(2, -4, 8, &p).unwrap();
        for c in &tab {
            assert!((c.value - orc.cdf(c.s)).abs() < 1e-6, "nu={nu} s={} {} vs {}", c.s, c.value, orc.cdf(c.s));
            assert!(c.quadrature_estimate < 1e-8);
        }
    }
}

#[test]
fn deconvolved_cdf_is_monotone() {
    let p = params(2.0, 2);
    let tab = cdf_sixvertex_pfaffian(2, -6, 12, &p).unwrap();
    let mut masses = BTreeMap::new();
    let mut prev = 0.0;
    for c in &tab {
        masses.insert(c.s, c.value - prev);
        prev = c.value;
    }
    let law = SignedPmf::from_map(&masses, 0.0).unwrap();
    // undo χ with its convolution inverse; 2S stays, and both remaining laws are nonnegative
    let h = law.convolve(&halfspace::measures::rs_inverse_pmf(p.q, p.t, 80).unwrap());
    let mut last = 0.0;
    for s in -4..10 {
        let v = h.cdf(s);
        assert!(v >= last - 1e-9, "s={s}");
        last = v;
    }
}

#[test]
fn residues_match_a_times_b() {
    let k = kernel(0.5);
    assert_eq!(k.a_indices(), vec![0, 1]);
    for kk in [0usize, 1] {
        let zk = 0.5 * 0.3f64.powi(-(kk as i32));
        for (x, y) in [(0i64, 1i64), (2, -1), (3, 3)] {
            let num = k.numerical_residue(zk, 0.02, x, y, 256);
            let ab = k.a_k(kk, x) * k.goe_boundary_b(y);
            assert!((num - ab).abs() < 1e-7 * ab.abs().max(1.0), "k={kk} ({x},{y}) {num} vs {ab}");
        }
    }
}

#[test]
fn s_terms_are_skew() {
    let k = kernel(0.5);
    assert_eq!(k.s_indices(), vec![1]);
    for (x, y) in [(0i64, 2i64), (3, -1), (1, 1), (5, 0)] {
        let a = k.s_term(1, x, y).unwrap();
        let b = k.s_term(1, y, x).unwrap();
        assert!((a + b).abs() < 1e-9, "({x},{y}) {a} {b}");
    }
}

#[test]
fn boundary_coefficient_at_nu_one() {
    let k = kernel(1.0);
    let g2 = k.params().gamma2();
    for x in [-2i64, 0, 5] {
        assert!((k.a_k(0, x) - (1.0 - g2)).abs() < 1e-12);
    }
}

#[test]
fn base_kernel_approaches_goe_kernel_as_nu_decreases() {
    let goe = kernel(1.0);
    let radii = goe.params().radii;
    let targets: Vec<f64> = (-1..=3).map(|s| goe.fredholm_window(s, 40).unwrap()).collect();
    let mut last = f64::INFINITY;
    for nu in [1.05, 1.02, 1.01] {
        let kp = KernelParams::sixvertex(&params(nu, 2)).unwrap();
        let r_b = Radii::default_for(Regime::Base, 0.3, 0.2, nu).r_b;
        let k = SkewBlockKernel::new(kp.with_radii(Radii { r_b, ..radii }).unwrap()).unwrap();
        let diff = (-1..=3)
            .map(|s| (k.fredholm_window(s, 40).unwrap() - targets[(s + 1) as usize]).abs())
            .fold(0.0, f64::max);
        assert!(diff < last, "nu={nu}: {diff} !< {last}");
        last = diff;
    }
    assert!(last < 0.05);
}

#[test]
fn gaussian_median_sits_near_the_lln_location() {
    let (a, nu, n) = (0.5, 0.5, 40usize);
    let p = ModelParams::homogeneous(0.3, 0.2, nu, 0.5, a, n);
    let mu = (2.0 * a * a + a * (nu + 1.0 / nu)) / ((1.0 + a * nu) * (1.0 + a / nu));
    let var = a * (1.0 - a * a) * (1.0 / nu - nu) / ((1.0 + a * nu).powi(2) * (1.0 + a / nu).powi(2));
    let centre = (mu * n as f64).round() as i64;
    let spread = (var * n as f64).sqrt();
    let kp = KernelParams::sixvertex(&p).unwrap();
    let tab = cdf_table_checked(&kp, centre - 20, centre + 20, 1e-9).unwrap();
    let median = tab.iter().find(|c| c.value >= 0.5).unwrap().s as f64;
    assert!((median - mu * n as f64).abs() <= 2.0 * spread, "median {median} vs {}", mu * n as f64);
}

#[test]
fn qmoments_match_enumeration() {
    let p = ModelParams::new(0.5, 0.3, 2.0, 0.5, vec![0.2, 0.25]);
    for (n, m, k) in [(1usize, 1usize, 1usize), (1, 2, 1), (2, 2, 1), (2, 2, 2)] {
        let got = qmoment_contour(n, m, k, &p).unwrap();
        let want = qmoment_enum(n, m, k as i32, &p);
        assert!((got.value - want).abs() < 1e-7, "n={n} m={m} k={k}: {} vs {want}", got.value);
    }
}

#[test]
fn qmoment_rejects_infeasible_nesting() {
    let p = ModelParams::new(0.1, 0.3, 2.0, 0.5, vec![0.6, 0.6]);
    assert!(qmoment_contour(2, 2, 2, &p).is_err());
}
