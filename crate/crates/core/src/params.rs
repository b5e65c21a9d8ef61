//! Bulk and boundary parameters of the half-space models.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub q: f64,
    pub t: f64,
    pub nu: f64,
    /// Auxiliary theta-shift parameter ζ ∈ (0,1).
    pub zeta: f64,
    /// Row rapidities a_i.
    pub a: Vec<f64>,
}

impl ModelParams {
    pub fn new(q: f64, t: f64, nu: f64, zeta: f64, a: Vec<f64>) -> Self {
        Self { q, t, nu, zeta, a }
    }

    pub fn homogeneous(q: f64, t: f64, nu: f64, zeta: f64, a: f64, n: usize) -> Self {
        Self::new(q, t, nu, zeta, vec![a; n])
    }

    pub fn gamma1(&self) -> f64 {
        1.0 / (self.nu * self.q.sqrt())
    }

    pub fn gamma2(&self) -> f64 {
        -self.t * self.nu
    }

    /// ρ = 1/(1+ν⁻¹).
    pub fn density(&self) -> f64 {
        1.0 / (1.0 + 1.0 / self.nu)
    }

    /// Stochasticity of the six-vertex weights.
    pub fn check_probabilistic(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.q) {
            return Err(invalid(format!("q={} outside [0,1)", self.q)));
        }
        if !(0.0..1.0).contains(&self.t) {
            return Err(invalid(format!("t={} outside [0,1)", self.t)));
        }
        if self.nu <= 0.0 {
            return Err(invalid(format!("nu={} must be positive", self.nu)));
        }
        if self.nu * self.t >= 1.0 {
            return Err(invalid(format!("nu*t={} must be < 1", self.nu * self.t)));
        }
        for (i, &a) in self.a.iter().enumerate() {
            if !(a > 0.0 && a < 1.0) {
                return Err(invalid(format!("a[{i}]={a} outside (0,1)")));
            }
            let p = (1.0 - a * a) / ((1.0 - self.nu * self.t * a) * (1.0 + a / self.nu));
            if p > 1.0 {
                return Err(invalid(format!(
                    "boundary probability p[{i}]={p} exceeds 1 (needs (1-nu^2 t)/nu + a(1-t) >= 0)"
                )));
            }
        }
        Ok(())
    }

    /// ζ and q constraints for the theta shift.
    pub fn check_zeta(&self) -> Result<()> {
        if !(self.zeta > 0.0) {
            return Err(invalid(format!("zeta={} must be positive", self.zeta)));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(invalid(format!("q={} outside (0,1)", self.q)));
        }
        Ok(())
    }
}
