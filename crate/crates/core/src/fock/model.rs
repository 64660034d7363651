use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_MODES: usize = 8;

/// `d` modes with weights `λ_0 < λ_1 < …`, all at least 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceModel {
    lambda: Vec<f64>,
}

pub type Vector = Vec<Complex64>;

impl SpaceModel {
    /// `λ_j = 2(j+1)`.
    pub fn new(d: usize) -> Result<Self> {
        Self::with_weights((0..d).map(|j| 2.0 * (j + 1) as f64).collect())
    }

    pub fn with_weights(lambda: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() || lambda.len() > MAX_MODES {
            return Err(Error::InvalidArgument(format!(
                "mode count must be in 1..={MAX_MODES}, got {}",
                lambda.len()
            )));
        }
        if lambda[0] < 2.0 || lambda.windows(2).any(|w| !(w[1] > w[0])) || lambda.iter().any(|l| !l.is_finite()) {
            return Err(Error::InvalidArgument("weights must be finite, >= 2 and strictly increasing".into()));
        }
        Ok(SpaceModel { lambda })
    }

    pub fn d(&self) -> usize {
        self.lambda.len()
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// `ρ = 1/λ_0`.
    pub fn rho(&self) -> f64 {
        1.0 / self.lambda[0]
    }

    /// `|ξ|²_p = Σ λ_j^{2p} |ξ_j|²`; negative `p` gives the dual norms.
    pub fn norm_sq(&self, xi: &[Complex64], p: f64) -> f64 {
        xi.iter().zip(&self.lambda).map(|(z, l)| l.powf(2.0 * p) * z.norm_sqr()).sum()
    }

    pub fn norm(&self, xi: &[Complex64], p: f64) -> f64 {
        self.norm_sq(xi, p).sqrt()
    }

    /// `‖i_{q,p}‖²_HS = Σ λ_j^{-2(q-p)}`.
    pub fn hs_norm_sq(&self, q: f64, p: f64) -> Result<f64> {
        if !(q > p) {
            return Err(Error::InvalidArgument(format!("need q > p, got q = {q}, p = {p}")));
        }
        Ok(self.lambda.iter().map(|l| l.powf(-2.0 * (q - p))).sum())
    }

    pub fn hs_norm(&self, q: f64, p: f64) -> Result<f64> {
        Ok(self.hs_norm_sq(q, p)?.sqrt())
    }

    /// Smallest `q ≥ p` with `2ρ^{2(q-p)} ≤ 1`.
    pub fn half_step(&self, p: f64) -> f64 {
        p + std::f64::consts::LN_2 / (2.0 * (1.0 / self.rho()).ln())
    }

    /// Complex Gaussian coordinates, mode `j` scaled by `scale · λ_j^{grade}`.
    pub fn sample_vector<R: Rng + ?Sized>(&self, rng: &mut R, grade: f64, scale: f64) -> Vector {
        self.lambda
            .iter()
            .map(|l| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im) * (scale * l.powf(grade) / std::f64::consts::SQRT_2)
            })
            .collect()
    }

    pub fn sample_real_vector<R: Rng + ?Sized>(&self, rng: &mut R, grade: f64, scale: f64) -> Vector {
        self.lambda
            .iter()
            .map(|l| {
                let re: f64 = rng.sample(StandardNormal);
                Complex64::new(re * scale * l.powf(grade), 0.0)
            })
            .collect()
    }

    pub fn check_dim(&self, v: &[Complex64]) -> Result<()> {
        if v.len() != self.d() {
            return Err(Error::DimensionMismatch {
                expected: self.d(),
                found: v.len(),
            });
        }
        Ok(())
    }
}

/// `⟨x, y⟩ = Σ x_j y_j` without conjugation.
pub fn bilinear(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn real_vector(v: &[f64]) -> Vector {
    v.iter().map(|x| Complex64::new(*x, 0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_weights_and_contraction() {
        let m = SpaceModel::new(4).unwrap();
        assert_eq!(m.lambda(), &[2.0, 4.0, 6.0, 8.0]);
        assert_eq!(m.rho(), 0.5);
        assert!((m.half_step(1.0) - 1.5).abs() < 1e-15);
        assert!(SpaceModel::new(0).is_err());
        assert!(SpaceModel::new(9).is_err());
        assert!(SpaceModel::with_weights(vec![2.0, 2.0]).is_err());
    }

    #[test]
    fn norms_are_ordered() {
        let m = SpaceModel::new(3).unwrap();
        let xi = real_vector(&[1.0, -0.5, 2.0]);
        let rho = m.rho();
        for (p, q) in [(0.0, 1.0), (-1.0, 0.5), (0.3, 2.0)] {
            assert!(m.norm(&xi, p) <= rho.powf(q - p) * m.norm(&xi, q) * (1.0 + 1e-15));
        }
    }

    #[test]
    fn hilbert_schmidt() {
        let m = SpaceModel::new(1).unwrap();
        assert!((m.hs_norm_sq(2.0, 0.5).unwrap() - 2f64.powf(-3.0)).abs() < 1e-16);
        assert!(m.hs_norm_sq(1.0, 1.0).is_err());
    }
}
