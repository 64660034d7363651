//! Sweeps for the S-transform growth bounds of generalized and test
//! functions, in both directions.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::expansion::ChaosExpansion;
use super::model::SpaceModel;
use super::norms::{norm, Weight};
use crate::error::{Error, Result};
use crate::growth::{equivalence_witness, Equivalence, GrowthFunction};
use crate::numeric::{ln_factorial, n_ln_n};
use crate::parallel::{map_indexed, trial_seed, Execution};
use crate::report::{CaseResult, VerificationReport};
use crate::scalar::{maximize, SearchOptions};
use crate::sequences::{Direction, WeightSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CharacterizationDirection {
    GenForward,
    GenConverse,
    TestForward,
    TestConverse,
}

impl CharacterizationDirection {
    pub const ALL: [CharacterizationDirection; 4] = [
        CharacterizationDirection::GenForward,
        CharacterizationDirection::GenConverse,
        CharacterizationDirection::TestForward,
        CharacterizationDirection::TestConverse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CharacterizationDirection::GenForward => "gen_forward",
            CharacterizationDirection::GenConverse => "gen_converse",
            CharacterizationDirection::TestForward => "test_forward",
            CharacterizationDirection::TestConverse => "test_converse",
        }
    }

    fn statement(self) -> &'static str {
        match self {
            CharacterizationDirection::GenForward => {
                "|SΦ(ξ)| ≤ ‖Φ‖_{-p,(u)} L#_u(|ξ|²_p)^{1/2} ≤ ‖Φ‖_{-p,(u)} √c u*(a|ξ|²_p)^{1/2}"
            }
            CharacterizationDirection::GenConverse => {
                "|SΦ(ξ)| ≤ K u*(a|ξ|²_p)^{1/2} ⇒ |f_n|²_{-q} ≤ K² aⁿ n^{2n} ℓ_{u*}(n) ‖i_{q,p}‖^{2n}/(n!)² and ‖Φ‖_{-q,(u)} ≤ K(1 - ae²‖i_{q,p}‖²)^{-1/2}"
            }
            CharacterizationDirection::TestForward => {
                "|Sφ(ξ)| ≤ ‖φ‖_{p,u} L_u(|ξ|²_{-p})^{1/2} ≤ ‖φ‖_{p,u} √(2e/log 2) u(2|ξ|²_{-p})^{1/2}"
            }
            CharacterizationDirection::TestConverse => {
                "|Sφ(ξ)| ≤ K u(a|ξ|²_{-p})^{1/2} ⇒ |f_n|²_q ≤ K² aⁿ n^{2n} ℓ_u(n) ‖i_{p,q}‖^{2n}/(n!)² and ‖φ‖_{q,u} ≤ K(1 - ae²‖i_{p,q}‖²)^{-1/2}"
            }
        }
    }
}

impl fmt::Display for CharacterizationDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CharacterizationDirection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown direction {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterizationParams {
    pub trials: usize,
    pub degree: usize,
    /// Grade of the growth bound: `p` for generalized functions, the norm
    /// grade `q` for test functions.
    pub grade: f64,
    /// Dilation used in the converse certificates.
    pub a: f64,
    /// Values of `ae²‖i‖²_HS` for the converse direction.
    pub taus: Vec<f64>,
    /// Largest `|ξ|²` sampled in the forward direction.
    pub r_sample_max: f64,
    pub seed: u64,
    pub tolerance: f64,
    pub exec: Execution,
}

impl Default for CharacterizationParams {
    fn default() -> Self {
        CharacterizationParams {
            trials: 1000,
            degree: 6,
            grade: 1.0,
            a: 1.0,
            taus: vec![0.25, 0.5, 0.9],
            r_sample_max: 50.0,
            seed: 0,
            tolerance: 1e-10,
            exec: Execution::default(),
        }
    }
}

/// Runs one direction; failures to compute a case count as violations.
pub fn verify_characterization(
    direction: CharacterizationDirection,
    u: &GrowthFunction,
    model: &SpaceModel,
    params: &CharacterizationParams,
) -> VerificationReport {
    let mut report = VerificationReport::new(direction.name(), direction.statement(), params.seed, params.tolerance)
        .param("u", u.name())
        .param("d", model.d())
        .param("degree", params.degree)
        .param("grade", params.grade);
    let outcome = match direction {
        CharacterizationDirection::GenForward => gen_forward(u, model, params, &mut report),
        CharacterizationDirection::TestForward => test_forward(u, model, params, &mut report),
        CharacterizationDirection::GenConverse | CharacterizationDirection::TestConverse => {
            converse(direction, u, model, params, &mut report)
        }
    };
    if let Err(e) = outcome {
        report.push_error("setup", &e);
    }
    report
}

/// Random ξ with `|ξ|²_grade` log-uniform on `[1e-3, r_max]`.
fn sample_xi(rng: &mut ChaCha8Rng, model: &SpaceModel, grade: f64, r_max: f64) -> Vec<Complex64> {
    let v = model.sample_vector(rng, -grade, 1.0);
    let r = (rng.random_range((1e-3f64).ln()..r_max.ln())).exp();
    let s = (r / model.norm_sq(&v, grade)).sqrt();
    v.into_iter().map(|z| z * s).collect()
}

fn ln_abs(z: Complex64) -> f64 {
    z.norm().ln()
}

fn push_all(report: &mut VerificationReport, cases: Vec<Result<CaseResult>>) {
    for (i, c) in cases.into_iter().enumerate() {
        match c {
            Ok(c) => report.push(c),
            Err(e) => report.push_error(format!("trial {i}"), &e),
        }
    }
}

fn gen_forward(u: &GrowthFunction, model: &SpaceModel, params: &CharacterizationParams, report: &mut VerificationReport) -> Result<()> {
    let p = params.grade;
    let u_star = GrowthFunction::dual_of(u);
    let seq = WeightSequence::from_growth(u);
    let l_sharp = GrowthFunction::generating(&seq, Direction::GAlpha);
    let (c, a) = match equivalence_witness(&u_star, &l_sharp, 2.0 * params.r_sample_max) {
        Equivalence::Certificate { c2, a2, .. } => (c2, a2),
        Equivalence::Counterexample { side, r } => {
            return Err(Error::InvalidArgument(format!(
                "no equivalence constants for L# and u* ({side:?} side fails at r = {r})"
            )))
        }
    };
    report.parameters.insert("c".into(), c.into());
    report.parameters.insert("a".into(), a.into());
    let weight = Weight::UParen(u.clone());
    let tol = params.tolerance;
    let cases = map_indexed(params.exec, params.trials, |i| -> Result<CaseResult> {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(params.seed, i));
        let scale = (rng.random_range((0.05f64).ln()..(2f64).ln())).exp();
        let phi = ChaosExpansion::random(model.d(), params.degree, scale, &mut rng)?;
        let xi = sample_xi(&mut rng, model, p, params.r_sample_max);
        let r = model.norm_sq(&xi, p);
        let lhs = ln_abs(phi.s_transform(&xi)?);
        let ln_norm = norm(&phi, model, p, &weight)?.ln();
        let mid = ln_norm + 0.5 * l_sharp.log_eval(r)?;
        let rhs = ln_norm + 0.5 * c.ln() + 0.5 * u_star.log_eval(a * r)?;
        Ok(min_case(format!("trial {i}"), [(lhs, mid), (mid, rhs)], tol).with("r", r))
    });
    push_all(report, cases);
    Ok(())
}

fn test_forward(u: &GrowthFunction, model: &SpaceModel, params: &CharacterizationParams, report: &mut VerificationReport) -> Result<()> {
    let p = params.grade;
    let seq = WeightSequence::from_growth(u);
    let l_u = GrowthFunction::generating(&seq, Direction::GInvAlpha);
    let ln_const = 0.5 * (2.0 * std::f64::consts::E / std::f64::consts::LN_2).ln();
    let weight = Weight::U(u.clone());
    let tol = params.tolerance;
    let cases = map_indexed(params.exec, params.trials, |i| -> Result<CaseResult> {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(params.seed, i));
        let scale = (rng.random_range((0.05f64).ln()..(2f64).ln())).exp();
        let phi = ChaosExpansion::random(model.d(), params.degree, scale, &mut rng)?;
        let xi = sample_xi(&mut rng, model, -p, params.r_sample_max);
        let r = model.norm_sq(&xi, -p);
        let lhs = ln_abs(phi.s_transform(&xi)?);
        let ln_norm = norm(&phi, model, p, &weight)?.ln();
        let mid = ln_norm + 0.5 * l_u.log_eval(r)?;
        let rhs = ln_norm + ln_const + 0.5 * u.log_eval(2.0 * r)?;
        Ok(min_case(format!("trial {i}"), [(lhs, mid), (mid, rhs)], tol).with("r", r))
    });
    push_all(report, cases);
    Ok(())
}

/// The case for the tightest of several `lhs ≤ rhs` pairs (in logs).
fn min_case<const N: usize>(label: String, pairs: [(f64, f64); N], tol: f64) -> CaseResult {
    pairs
        .into_iter()
        .map(|(l, r)| CaseResult::log_le(label.clone(), l, r, tol))
        .min_by(|a, b| a.margin.total_cmp(&b.margin))
        .expect("at least one pair")
}

/// `log K = sup_{ρ ≥ 0} (b ρ - ½ log w(a ρ²))`, the smallest `K` with
/// `e^{bρ} ≤ K w(aρ²)^{1/2}`.
pub fn exponential_certificate(b: f64, a: f64, w: &GrowthFunction) -> Result<f64> {
    let at_zero = -0.5 * w.log_eval(0.0)?;
    if b == 0.0 {
        // w is increasing, so ρ = 0 is optimal.
        return Ok(at_zero);
    }
    let obj = |x: f64| -> Result<f64> {
        let rho = x.exp();
        Ok(match w.log_eval(a * rho * rho) {
            Ok(v) if v.is_finite() => b * rho - 0.5 * v,
            _ => f64::NEG_INFINITY,
        })
    };
    let opts = SearchOptions {
        x0: 0.0,
        lower: -40.0,
        upper: 20.0,
        ..SearchOptions::default()
    };
    let m = maximize(obj, &opts)?;
    Ok(m.value.max(at_zero))
}

/// Smallest `δ > 0` with `Σ_j λ_j^{-2δ} ≤ target`, by bisection.
pub fn hs_gap_for(model: &SpaceModel, target: f64) -> Result<f64> {
    if !(target > 0.0) {
        return Err(Error::InvalidArgument(format!("HS target {target} must be positive")));
    }
    let f = |delta: f64| model.lambda().iter().map(|l| l.powf(-2.0 * delta)).sum::<f64>();
    let (mut lo, mut hi) = (0.0, 1.0);
    while f(hi) > target {
        hi *= 2.0;
        if hi > 1e4 {
            return Err(Error::InvalidArgument(format!("HS target {target} unreachable")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

fn converse(
    direction: CharacterizationDirection,
    u: &GrowthFunction,
    model: &SpaceModel,
    params: &CharacterizationParams,
    report: &mut VerificationReport,
) -> Result<()> {
    let generalized = direction == CharacterizationDirection::GenConverse;
    let a = params.a;
    let e2 = std::f64::consts::E.powi(2);
    // The growth bound is in terms of w; the kernel bound in terms of ℓ_w.
    let w = if generalized { GrowthFunction::dual_of(u) } else { u.clone() };
    let weight = if generalized { Weight::UParen(u.clone()) } else { Weight::U(u.clone()) };
    let log_ell: Vec<f64> = (0..=params.degree).map(|n| w.log_ell_n(n)).collect::<Result<_>>()?;
    let tol = params.tolerance;
    let n_tau = params.taus.len().max(1);
    let cases = map_indexed(params.exec, params.trials * params.taus.len(), |i| -> Result<CaseResult> {
        let tau = params.taus[i % n_tau];
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(params.seed, i));
        let hs2 = tau / (a * e2);
        let delta = hs_gap_for(model, hs2)?;
        // Generalized: bound at p, norm at q = p + δ. Test: norm at q, bound at p = q + δ.
        let (bound_grade, norm_grade) = if generalized {
            (params.grade, params.grade + delta)
        } else {
            (params.grade + delta, params.grade)
        };
        let eta_grade = if generalized { -bound_grade } else { bound_grade };
        let eta = model.sample_vector(&mut rng, -eta_grade, 1.0);
        let b_target = (rng.random_range((0.1f64).ln()..(2f64).ln())).exp();
        let s = b_target / model.norm(&eta, eta_grade);
        let eta: Vec<Complex64> = eta.into_iter().map(|z| z * s).collect();
        let b = model.norm(&eta, eta_grade);
        let log_k = exponential_certificate(b, a, &w)?;
        let phi = ChaosExpansion::renorm_exp(&eta, params.degree)?;
        let kernel_grade = if generalized { -norm_grade } else { norm_grade };
        let kn = phi.kernel_norms_sq(model, kernel_grade)?;
        let ln_hs2 = hs2.ln();
        let mut pairs = Vec::with_capacity(kn.len() + 1);
        for (n, k) in kn.iter().enumerate() {
            let nf = n as f64;
            let rhs = 2.0 * log_k + nf * a.ln() + 2.0 * n_ln_n(n) + log_ell[n] + nf * ln_hs2 - 2.0 * ln_factorial(n);
            pairs.push((k.ln(), rhs));
        }
        let ln_norm = norm(&phi, model, norm_grade, &weight)?.ln();
        pairs.push((ln_norm, log_k - 0.5 * (-tau).ln_1p()));
        let worst = pairs
            .iter()
            .map(|&(l, r)| CaseResult::log_le(format!("trial {i}, tau {tau}"), l, r, tol))
            .min_by(|x, y| x.margin.total_cmp(&y.margin))
            .expect("nonempty");
        Ok(worst.with("tau", tau).with("K", log_k.exp()).with("b", b).with("delta", delta))
    });
    push_all(report, cases);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(trials: usize) -> CharacterizationParams {
        CharacterizationParams {
            trials,
            exec: Execution::Sequential,
            ..Default::default()
        }
    }

    #[test]
    fn certificate_for_pure_exp() {
        // sup (bρ - ρ²/2) = b²/2.
        let k = exponential_certificate(1.5, 1.0, &GrowthFunction::pure_exp()).unwrap();
        assert!((k - 1.125).abs() < 1e-9);
    }

    #[test]
    fn hs_gap_hits_target() {
        let m = SpaceModel::new(4).unwrap();
        let d = hs_gap_for(&m, 0.05).unwrap();
        assert!((m.hs_norm_sq(1.0 + d, 1.0).unwrap() - 0.05).abs() < 1e-12);
    }

    #[test]
    fn directions_pass_on_small_sweeps() {
        let m = SpaceModel::new(3).unwrap();
        let u = GrowthFunction::beta_exp(0.5).unwrap();
        for dir in CharacterizationDirection::ALL {
            let r = verify_characterization(dir, &u, &m, &CharacterizationParams { degree: 8, ..params(20) });
            assert!(r.passed(), "{dir}: {:?}", r.cases.iter().find(|c| !c.passed));
        }
    }

    #[test]
    fn names_round_trip() {
        for d in CharacterizationDirection::ALL {
            assert_eq!(d.name().parse::<CharacterizationDirection>().unwrap(), d);
        }
    }
}
