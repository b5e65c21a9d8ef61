//! Pfaffians, the difference operator D^{(γ)}, the model kernels and their Fredholm
//! Pfaffians, and the q-moment contour formula.

pub mod kernel;
pub mod qmoment;

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};

pub use kernel::{
    cdf_asep_pfaffian, cdf_sixvertex_pfaffian, CdfPoint, KernelParams, ModelTag, PfWindow, Radii, Regime,
    SkewBlockKernel,
};
pub use qmoment::qmoment_contour;

fn check_skew(m: &DMatrix<f64>, tol: f64) -> Result<()> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Dimension(format!("{}x{} matrix is not square", n, m.ncols())));
    }
    if n % 2 == 1 {
        return Err(Error::Dimension(format!("Pfaffian of odd dimension {n}")));
    }
    let scale = m.amax().max(1.0);
    for i in 0..n {
        for j in 0..=i {
            if (m[(i, j)] + m[(j, i)]).abs() > tol * scale {
                return Err(invalid(format!("matrix not skew at ({i},{j})")));
            }
        }
    }
    Ok(())
}

/// Pfaffian by skew-symmetric Gaussian elimination with pivoting (Parlett–Reid).
pub fn pfaffian(m: &DMatrix<f64>) -> Result<f64> {
    check_skew(m, 1e-12)?;
    Ok(pfaffian_unchecked(m.clone()))
}

pub(crate) fn pfaffian_unchecked(mut a: DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut res = 1.0;
    let mut k = 0;
    while k + 1 < n {
        // pivot the largest entry of row k into position (k, k+1)
        let mut kp = k + 1;
        let mut best = a[(k, k + 1)].abs();
        for j in k + 2..n {
            if a[(k, j)].abs() > best {
                best = a[(k, j)].abs();
                kp = j;
            }
        }
        if kp != k + 1 {
            a.swap_rows(k + 1, kp);
            a.swap_columns(k + 1, kp);
            res = -res;
        }
        let piv = a[(k, k + 1)];
        if piv == 0.0 {
            return 0.0;
        }
        res *= piv;
        if k + 2 < n {
            let tau: Vec<f64> = (k + 2..n).map(|j| a[(k, j)] / piv).collect();
            let row: Vec<f64> = (k + 2..n).map(|j| a[(k + 1, j)]).collect();
            let m = n - k - 2;
            for i in 0..m {
                for j in 0..m {
                    a[(k + 2 + i, k + 2 + j)] -= tau[i] * row[j] - row[i] * tau[j];
                }
            }
        }
        k += 2;
    }
    res
}

/// Pfaffian by expansion along the first row (perfect-matching sum), dimension ≤ 8.
pub fn pfaffian_matching(m: &DMatrix<f64>) -> Result<f64> {
    check_skew(m, 1e-12)?;
    let n = m.nrows();
    if n > 8 {
        return Err(Error::TooLarge(format!("matching expansion limited to dimension 8, got {n}")));
    }
    fn rec(m: &DMatrix<f64>, idx: &[usize]) -> f64 {
        if idx.is_empty() {
            return 1.0;
        }
        let i = idx[0];
        let mut acc = 0.0;
        for (p, &j) in idx.iter().enumerate().skip(1) {
            let rest: Vec<usize> = idx.iter().enumerate().filter(|(q, _)| *q != 0 && *q != p).map(|(_, v)| *v).collect();
            let sign = if p % 2 == 1 { 1.0 } else { -1.0 };
            acc += sign * m[(i, j)] * rec(m, &rest);
        }
        acc
    }
    let idx: Vec<usize> = (0..n).collect();
    Ok(rec(m, &idx))
}

/// Growth certificate |f(x ± i)| ≤ c·rate^i for i ≥ 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthBound {
    pub c: f64,
    pub rate: f64,
}

/// D^{(γ)}f(x) = (1−γ)²/2 Σ_{i≥1} γ^{i−1}(f(x+i) − f(x−i)), truncated once the certified tail is below 1e−13.
pub fn apply_d(gamma: f64, f: &dyn Fn(i64) -> f64, growth: Option<GrowthBound>, x: i64) -> Result<f64> {
    let g = growth.ok_or_else(|| invalid("apply_d requires a growth certificate"))?;
    let ratio = gamma.abs() * g.rate;
    if !(ratio < 1.0) || !(g.c >= 0.0) {
        return Err(invalid(format!("growth rate {} incompatible with gamma {gamma}", g.rate)));
    }
    let pref = (1.0 - gamma).powi(2) / 2.0;
    if gamma == 0.0 {
        return Ok(pref * (f(x + 1) - f(x - 1)));
    }
    let mut acc = 0.0;
    let mut gp = 1.0;
    let mut i = 1i64;
    loop {
        let v = f(x + i) - f(x - i);
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("f at x±{i}")));
        }
        acc += gp * v;
        // tail Σ_{j>i} |γ|^{j−1} 2c·rate^j
        let tail = 2.0 * g.c * g.rate * (gamma.abs() * g.rate).powi(i as i32) / (1.0 - ratio);
        if pref * tail < 1e-13 {
            break;
        }
        gp *= gamma;
        i += 1;
        if i > 100_000 {
            return Err(Error::Convergence("difference operator series".into()));
        }
    }
    Ok(pref * acc)
}
