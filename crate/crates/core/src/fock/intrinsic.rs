use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::expansion::{ChaosExpansion, Evaluator};
use super::model::{bilinear, SpaceModel, Vector};
use crate::error::Result;
use crate::growth::{dual_legendre, GrowthFunction};
use crate::parallel::{map_indexed, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub starts: usize,
    pub steps: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { starts: 128, steps: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntrinsicEstimate {
    /// Best ratio found; a lower bound for the supremum.
    pub lower_bound: f64,
    pub log_lower_bound: f64,
    pub witness: Vector,
    pub evaluations: usize,
}

/// `log |φ(x)| - ½ log u(|x|²_{-p})`, with `-∞` where either side fails.
pub fn log_ratio(eval: &Evaluator, model: &SpaceModel, p: f64, u: &GrowthFunction, x: &[Complex64]) -> f64 {
    let v = eval.eval(x).norm();
    if !(v > 0.0) || !v.is_finite() {
        return f64::NEG_INFINITY;
    }
    match u.log_eval(model.norm_sq(x, -p)) {
        Ok(lu) if lu.is_finite() => v.ln() - 0.5 * lu,
        _ => f64::NEG_INFINITY,
    }
}

fn start_seed(seed: u64, start: usize) -> u64 {
    seed.wrapping_mul(0x2545_F491_4F6C_DD1D) ^ (start as u64).wrapping_add(0x51_7CC1_B727_220A)
}

/// Multi-start compass search for `sup_x |φ(x)| u(|x|²_{-p})^{-1/2}` over
/// complex `x`. Start 0 is the origin; the others are complex Gaussians with
/// mode `j` scaled by `s λ_j^p`, `s` log-uniform on `[0.05, 20]`, so that
/// `|x|_{-p}` is of order `s`.
pub fn intrinsic_norm_estimate(
    phi: &ChaosExpansion,
    model: &SpaceModel,
    p: f64,
    u: &GrowthFunction,
    budget: SearchBudget,
    seed: u64,
    exec: Execution,
) -> Result<IntrinsicEstimate> {
    model.check_dim(&vec![Complex64::new(0.0, 0.0); phi.d()])?;
    let eval = phi.evaluator();
    let d = model.d();
    let mode_scale: Vec<f64> = model.lambda().iter().map(|l| l.powf(p)).collect();
    let runs = map_indexed(exec, budget.starts.max(1), |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(start_seed(seed, i));
        let (mut x, mut h) = if i == 0 {
            (vec![Complex64::new(0.0, 0.0); d], 1.0)
        } else {
            let s = (rng.random_range((0.05f64).ln()..(20f64).ln())).exp();
            (model.sample_vector(&mut rng, p, s), s)
        };
        let mut best = log_ratio(&eval, model, p, u, &x);
        let mut evals = 1;
        for _ in 0..budget.steps {
            let mut cand: Option<(f64, Vector)> = None;
            for j in 0..d {
                for dir in [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)] {
                    let mut y = x.clone();
                    y[j] += dir * (h * mode_scale[j]);
                    let v = log_ratio(&eval, model, p, u, &y);
                    evals += 1;
                    if v > best && cand.as_ref().is_none_or(|(b, _)| v > *b) {
                        cand = Some((v, y));
                    }
                }
            }
            match cand {
                Some((v, y)) => {
                    best = v;
                    x = y;
                    h = (h * 2.0).min(1e6);
                }
                None => {
                    h *= 0.5;
                    if h < 1e-12 {
                        break;
                    }
                }
            }
        }
        (best, x, evals)
    });
    let evaluations = runs.iter().map(|r| r.2).sum();
    let (log_best, witness, _) = runs
        .into_iter()
        .fold(None::<(f64, Vector, usize)>, |acc, r| match acc {
            Some(a) if a.0 >= r.0 => Some(a),
            _ => Some(r),
        })
        .expect("at least one start");
    Ok(IntrinsicEstimate {
        lower_bound: log_best.exp(),
        log_lower_bound: log_best,
        witness,
        evaluations,
    })
}

/// Exact `sup_x |e^{⟨x,ξ⟩ - ⟨ξ,ξ⟩/2}| u(|x|²_{-p})^{-1/2}
/// = |e^{-⟨ξ,ξ⟩/2}| u*(|ξ|²_p)^{1/2}`, in logs.
pub fn log_exponential_sup(xi: &[Complex64], model: &SpaceModel, p: f64, u: &GrowthFunction) -> Result<f64> {
    let r = model.norm_sq(xi, p);
    let dual = dual_legendre(u, r)?.log_value;
    Ok(-0.5 * bilinear(xi, xi).re + 0.5 * dual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::model::real_vector;

    #[test]
    fn constant_function_peaks_at_origin() {
        let m = SpaceModel::new(2).unwrap();
        let one = ChaosExpansion::constant(2, Complex64::new(1.0, 0.0)).unwrap();
        let u = GrowthFunction::pure_exp();
        let est = intrinsic_norm_estimate(&one, &m, 1.0, &u, SearchBudget { starts: 8, steps: 20 }, 1, Execution::Sequential).unwrap();
        assert!((est.lower_bound - 1.0).abs() < 1e-15);
        assert!(est.witness.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn exponential_vector_reaches_closed_form() {
        let m = SpaceModel::new(2).unwrap();
        let xi = real_vector(&[0.3, -0.2]);
        let phi = ChaosExpansion::renorm_exp(&xi, 40).unwrap();
        let u = GrowthFunction::pure_exp();
        let est = intrinsic_norm_estimate(&phi, &m, 1.0, &u, SearchBudget { starts: 16, steps: 200 }, 7, Execution::Sequential).unwrap();
        let exact = log_exponential_sup(&xi, &m, 1.0, &u).unwrap();
        // For e^r the supremum is exp(|ξ|²_p/2 - ⟨ξ,ξ⟩/2).
        assert!((exact - 0.5 * (m.norm_sq(&xi, 1.0) - 0.13)).abs() < 1e-9);
        assert!(est.log_lower_bound <= exact + 1e-9);
        assert!(exact - est.log_lower_bound < 1e-4, "{} vs {exact}", est.log_lower_bound);
    }
}
