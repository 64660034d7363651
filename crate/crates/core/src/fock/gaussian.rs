use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::model::SpaceModel;
use crate::error::{Error, Result};
use crate::growth::GrowthFunction;
use crate::numeric::CompensatedSum;
use crate::parallel::{map_indexed, Execution};

/// Centered Gaussian on the model with independent modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMeasureSpec {
    pub variances: Vec<f64>,
    /// Grade `p` of the support `E'_p`.
    pub support_grade: f64,
}

impl GaussianMeasureSpec {
    /// The standard measure `μ`.
    pub fn standard(d: usize) -> Self {
        GaussianMeasureSpec {
            variances: vec![1.0; d],
            support_grade: 0.0,
        }
    }

    pub fn new(variances: Vec<f64>, support_grade: f64) -> Result<Self> {
        if variances.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument("variances must be positive".into()));
        }
        Ok(GaussianMeasureSpec {
            variances,
            support_grade,
        })
    }
}

/// `∫ e^{2 c₂ |x|²_{-q}} dμ(x) = Π_j (1 - 4 c₂ λ_j^{-2q})^{-1/2}`.
pub fn gaussian_exp_integral(model: &SpaceModel, q: f64, c2: f64) -> Result<f64> {
    let mut log = 0.0;
    for (j, l) in model.lambda().iter().enumerate() {
        let f = 1.0 - 4.0 * c2 * l.powf(-2.0 * q);
        if !(f > 0.0) {
            return Err(Error::Divergent {
                mode: j,
                factor: f,
            });
        }
        log -= 0.5 * f.ln();
    }
    Ok(log.exp())
}

/// Sample size per work chunk; chunk `i` uses its own seeded stream so the
/// estimate does not depend on the execution mode.
const CHUNK: usize = 8192;

fn chunk_seed(seed: u64, chunk: usize) -> u64 {
    seed ^ (chunk as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Monte Carlo mean of `f(x)` for `x ~ N(0, diag(variances))`.
pub fn monte_carlo_mean(
    variances: &[f64],
    samples: usize,
    seed: u64,
    exec: Execution,
    f: impl Fn(&[f64]) -> f64 + Sync,
) -> f64 {
    let chunks = samples.div_ceil(CHUNK);
    let sds: Vec<f64> = variances.iter().map(|v| v.sqrt()).collect();
    let partial = map_indexed(exec, chunks, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(chunk_seed(seed, i));
        let n = CHUNK.min(samples - i * CHUNK);
        let mut x = vec![0.0; sds.len()];
        let mut acc = CompensatedSum::default();
        for _ in 0..n {
            for (xj, s) in x.iter_mut().zip(&sds) {
                let g: f64 = rng.sample(StandardNormal);
                *xj = g * s;
            }
            acc.add(f(&x));
        }
        acc.value()
    });
    let mut total = CompensatedSum::default();
    for p in partial {
        total.add(p);
    }
    total.value() / samples as f64
}

pub fn gaussian_exp_integral_mc(model: &SpaceModel, q: f64, c2: f64, samples: usize, seed: u64, exec: Execution) -> f64 {
    let w: Vec<f64> = model.lambda().iter().map(|l| l.powf(-2.0 * q)).collect();
    monte_carlo_mean(&vec![1.0; model.d()], samples, seed, exec, |x| {
        let r: f64 = x.iter().zip(&w).map(|(a, b)| a * a * b).sum();
        (2.0 * c2 * r).exp()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HidaCheck {
    pub integrable: bool,
    /// Upper bound for `∫ u(|x|²_{-p})^{1/2} dν`, when integrable.
    pub bound: Option<f64>,
    pub violating_mode: Option<usize>,
}

/// Bounds `∫ u(|x|²_{-p})^{1/2} dν` by `√c₁ Π_j (1 - c₂ σ_j² λ_j^{-2p})^{-1/2}`
/// using the envelope `u(r) ≤ c₁ e^{c₂ r}`.
pub fn hida_check(nu: &GaussianMeasureSpec, model: &SpaceModel, p: f64, u: &GrowthFunction) -> Result<HidaCheck> {
    let (c1, c2) = u.flags().u2_envelope.ok_or(Error::EnvelopeMissing)?;
    if nu.variances.len() != model.d() {
        return Err(Error::DimensionMismatch {
            expected: model.d(),
            found: nu.variances.len(),
        });
    }
    let mut log = 0.5 * c1.ln();
    for (j, (s2, l)) in nu.variances.iter().zip(model.lambda()).enumerate() {
        let f = 1.0 - c2 * s2 * l.powf(-2.0 * p);
        if !(f > 0.0) {
            return Ok(HidaCheck {
                integrable: false,
                bound: None,
                violating_mode: Some(j),
            });
        }
        log -= 0.5 * f.ln();
    }
    Ok(HidaCheck {
        integrable: true,
        bound: Some(log.exp()),
        violating_mode: None,
    })
}

/// `L_{p,q} = √c₁ (1 - 4e²‖i_{q,p}‖²_HS)^{-1/2} ∫ e^{2c₂|x|²_{-q}} dμ`.
pub fn l_pq(model: &SpaceModel, p: f64, q: f64, u: &GrowthFunction) -> Result<f64> {
    let (c1, c2) = u.flags().u2_envelope.ok_or(Error::EnvelopeMissing)?;
    let hs = model.hs_norm_sq(q, p)?;
    let e2 = std::f64::consts::E.powi(2);
    let f = 1.0 - 4.0 * e2 * hs;
    if !(f > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "4e²‖i_(q,p)‖² = {} is not below 1",
            4.0 * e2 * hs
        )));
    }
    Ok(c1.sqrt() / f.sqrt() * gaussian_exp_integral(model, q, c2)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        let m = SpaceModel::new(2).unwrap();
        assert_eq!(gaussian_exp_integral(&m, 1.0, 0.0).unwrap(), 1.0);
        let v = gaussian_exp_integral(&m, 1.0, 0.1).unwrap();
        assert!((v - (0.9f64 * 0.975).powf(-0.5)).abs() < 1e-14);
        assert!(matches!(gaussian_exp_integral(&m, 0.0, 1.0), Err(Error::Divergent { mode: 0, .. })));
    }

    #[test]
    fn monte_carlo_is_mode_independent() {
        let m = SpaceModel::new(2).unwrap();
        let a = gaussian_exp_integral_mc(&m, 1.0, 0.1, 20_000, 9, Execution::Sequential);
        let b = gaussian_exp_integral_mc(&m, 1.0, 0.1, 20_000, 9, Execution::default());
        assert_eq!(a, b);
        assert!((a / gaussian_exp_integral(&m, 1.0, 0.1).unwrap() - 1.0).abs() < 0.02);
    }

    #[test]
    fn standard_measure_is_hida_at_high_grade() {
        let m = SpaceModel::new(3).unwrap();
        let u = GrowthFunction::pure_exp();
        let nu = GaussianMeasureSpec::standard(3);
        let h = hida_check(&nu, &m, 1.0, &u).unwrap();
        assert!(h.integrable && h.bound.unwrap() > 1.0);
        let wide = GaussianMeasureSpec::new(vec![8.0, 1.0, 1.0], 0.0).unwrap();
        let h = hida_check(&wide, &m, 0.5, &u).unwrap();
        assert_eq!(h.violating_mode, Some(0));
        let custom = GrowthFunction::custom("no-envelope", Default::default(), |r| r);
        assert_eq!(hida_check(&nu, &m, 1.0, &custom).unwrap_err(), Error::EnvelopeMissing);
    }
}
