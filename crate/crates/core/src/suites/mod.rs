//! Named verification suites. Each suite sweeps one statement about growth
//! functions, weight sequences or the Fock model and returns a
//! [`VerificationReport`].

mod fock;
mod growth;
mod sequences;

use std::collections::BTreeMap;
use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::fock::SpaceModel;
use crate::growth::GrowthFunction;
use crate::numeric::{log_rel_error, representability_floor};
use crate::parallel::{map_indexed, trial_seed, Execution};
use crate::report::{CaseResult, VerificationReport};
use crate::sequences::WeightSequence;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteDefaults {
    pub tolerance: f64,
    pub trials: usize,
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub degree: Option<usize>,
    #[serde(default)]
    pub r_max: Option<f64>,
}

pub fn defaults() -> &'static BTreeMap<String, SuiteDefaults> {
    static TABLE: OnceLock<BTreeMap<String, SuiteDefaults>> = OnceLock::new();
    TABLE.get_or_init(|| serde_json::from_str(include_str!("defaults.json")).expect("defaults.json is valid"))
}

/// Overrides for a suite run. `None` keeps the suite default.
#[derive(Debug, Clone, Default)]
pub struct SuiteConfig {
    pub seed: u64,
    pub trials: Option<usize>,
    pub tolerance: Option<f64>,
    pub d: Option<usize>,
    pub degree: Option<usize>,
    pub functions: Option<Vec<GrowthFunction>>,
    pub sequences: Option<Vec<WeightSequence>>,
    pub exec: Execution,
}

/// Resolved settings handed to a suite body.
pub struct Ctx {
    pub key: &'static str,
    pub statement: &'static str,
    pub seed: u64,
    pub trials: usize,
    pub tolerance: f64,
    pub d: usize,
    pub degree: usize,
    pub r_max: f64,
    pub functions: Option<Vec<GrowthFunction>>,
    pub sequences: Option<Vec<WeightSequence>>,
    pub exec: Execution,
}

impl Ctx {
    fn report(&self) -> VerificationReport {
        VerificationReport::new(self.key, self.statement, self.seed, self.tolerance).param("trials", self.trials)
    }

    fn functions_or(&self, default: impl FnOnce() -> Vec<GrowthFunction>) -> Vec<GrowthFunction> {
        self.functions.clone().unwrap_or_else(default)
    }

    fn sequences_or(&self, default: impl FnOnce() -> Vec<WeightSequence>) -> Vec<WeightSequence> {
        self.sequences.clone().unwrap_or_else(default)
    }

    fn model(&self) -> Result<SpaceModel> {
        SpaceModel::new(self.d)
    }

    fn rng(&self, i: usize) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(trial_seed(self.seed, i))
    }

    fn sweep<F>(&self, n: usize, f: F) -> Vec<Result<CaseResult>>
    where
        F: Fn(usize) -> Result<CaseResult> + Sync + Send,
    {
        map_indexed(self.exec, n, f)
    }
}

pub struct SuiteDescriptor {
    pub key: &'static str,
    pub statement: &'static str,
    run: fn(&Ctx) -> Result<VerificationReport>,
}

const fn suite(key: &'static str, statement: &'static str, run: fn(&Ctx) -> Result<VerificationReport>) -> SuiteDescriptor {
    SuiteDescriptor { key, statement, run }
}

static CATALOG: &[SuiteDescriptor] = &[
    suite("legendre-exp-closed-form", "for u = e^r, log l(t) = t(1 - log t) and the minimizer is r = t", growth::exp_closed_form),
    suite("dual-beta-pair", "the dual of exp[(1+b) r^{1/(1+b)}] is exp[(1-b) r^{1/(1-b)}]", growth::dual_beta_pair),
    suite("legendre-log-concave", "l_u(t) is log-concave in t", growth::log_concave),
    suite("legendre-recovers-u", "u(r) = sup_t l_u(t) r^t for (log, exp)-convex u; l_u and l_u^{1/t} eventually decrease", growth::recovers_u),
    suite("legendre-supermultiplicative", "(log, x^k)-convex u: l(t) t^{kt} is log-convex and l(n)l(m) <= l(0) 2^{k(n+m)} l(n+m)", growth::supermultiplicative),
    suite("l-function-envelope", "L_u(r) <= (e a / log a) u(a r), and u(r) <= C L_u(2^k r)", growth::l_envelope),
    suite("dual-regularity", "u* is increasing and (log, x^2)-convex and lies in C_{+,1/2}", growth::dual_regularity),
    suite("dual-legendre-identity", "l_{u*}(t) = e^{2t} / (l_u(t) t^{2t})", growth::dual_legendre_identity),
    suite("dual-involution", "(u*)* = u for increasing (log, x^2)-convex u", growth::dual_involution),
    suite("l-sharp-equivalence", "u*, L_{u*} and L#_u are equivalent", growth::l_sharp_equivalence),
    suite("l-function-square", "L_u(r)^2 <= l(0) L_u(2^{k+1} r), and u is equivalent to u^2", growth::l_square),
    suite("l-function-sqrt-envelope", "L_u(r) <= (l(0) 2e / log 2)^{1/2} u(2^{2k} r)^{1/2}", growth::l_sqrt_envelope),
    suite("monotone-envelope", "the monotone envelope of u has the same Legendre transform", growth::monotone_envelope_suite),
    suite("legendre-scale-covariance", "l_{cu}(t) = c l_u(t)", growth::scale_covariance),
    suite("theta-conversion", "theta(t) = (1/2) log u(t^2) turns u and u* into a convex-conjugate pair", growth::theta_conversion),
    suite("generating-beta-equivalence", "the generating functions of (n!)^b are equivalent to exp[(1-b) r^{1/(1-b)}] and exp[(1+b) r^{1/(1+b)}]", growth::generating_beta),
    suite("alpha-log-concave", "1/(n! alpha_u(n)) = l_u(n) is log-concave for u in C_{+,log}", sequences::alpha_log_concave),
    suite("alpha-near-b2", "alpha_u(n) (n!)^2 / n^{2n} divided by n! is log-concave", sequences::alpha_near_b2),
    suite("alpha-conditions", "alpha_u satisfies A1, A2, nearB2 and B2tilde", sequences::alpha_conditions),
    suite("alpha-sequence-identities", "alpha_u(n) = 1/(n! l_u(n)), G_alpha = L#_u, G_{1/alpha} = L_u, sequence equivalences", sequences::alpha_identities),
    suite("bell-numbers", "b_1 are the Bell numbers; Bell sequences of order 2 and 3 satisfy B2", sequences::bell_numbers),
    suite("binomial-submultiplicative", "beta(n+m) <= C(n+m, n) beta(n) beta(m) <= 2^{n+m} beta(n) beta(m) when beta(n)/n! is log-concave and beta(0) = 1", sequences::binomial_submultiplicative),
    suite("near-b2-implies-c2", "nearB2 with alpha(0) >= 1 implies C2", sequences::near_b2_implies_c2),
    suite("near-b2tilde-implies-c3", "nearB2tilde with alpha(0) <= 1 implies C3", sequences::near_b2tilde_implies_c3),
    suite("b1-matches-near-b2", "B1 agrees with nearB2 and B1tilde with nearB2tilde", sequences::b1_matches_near_b2),
    suite("stirling-sandwich", "-1 - (n/2) log 2 + log n! <= n log n - n <= log n!", sequences::stirling_sandwich),
    suite("exponential-vector-norm", "the norm of the renormalized exponential is G_alpha(|xi|_p^2)^{1/2}", fock::exponential_vector_norm),
    suite("norm-sandwich", "e^{-1} |.|_{-q,(u)} <= |.|_{-p,u*} <= |.|_{-p,(u)} and |.|_{p,u} <= |.|_{p,(u*)} <= e |.|_{q,u}", fock::norm_sandwich),
    suite("norm-monotonicity", "weighted norms increase with the grade, dual norms decrease", fock::norm_monotonicity),
    suite("wick-product", "the S-transform turns the Wick product into the pointwise product", fock::wick_product),
    suite("operator-identities", "translation, scaling, differentiation and Fourier-Gauss operators act as defined", fock::operator_identities),
    suite("generalized-growth-bound", "|S Phi(xi)| <= |Phi|_{-p,(u)} L#_u(|xi|_p^2)^{1/2} <= C u*(a |xi|_p^2)^{1/2}", fock::generalized_growth_bound),
    suite("test-growth-bound", "|S phi(xi)| <= |phi|_{p,u} L_u(|xi|_{-p}^2)^{1/2} <= C u(2 |xi|_{-p}^2)^{1/2}", fock::test_growth_bound),
    suite("generalized-converse-bound", "an S-transform bounded by K u*(a |xi|_p^2)^{1/2} has |Phi|_{-q,(u)} <= K (1 - a e^2 |i_{q,p}|_HS^2)^{-1/2}", fock::generalized_converse_bound),
    suite("test-converse-bound", "an S-transform bounded by K u(a |xi|_{-p}^2)^{1/2} has |phi|_{q,u} <= K (1 - a e^2 |i_{p,q}|_HS^2)^{-1/2}", fock::test_converse_bound),
    suite("gaussian-integral", "the integral of exp(2 c |x|_{-q}^2) under the standard Gaussian is prod_j (1 - 4 c lambda_j^{-2q})^{-1/2}", fock::gaussian_integral),
    suite("hida-measure", "Gaussian measures with summable variances integrate u(|x|_{-p}^2)^{1/2}", fock::hida_measure),
    suite("intrinsic-norm", "sup_x |phi(x)| u(|x|_{-p}^2)^{-1/2} is bounded by the Fock norms", fock::intrinsic_norm),
    suite("wick-continuity", "|Phi Wick Psi|_{-gamma,(u)} <= C |Phi|_{-p,(u)} |Psi|_{-p,(u)}", fock::wick_continuity),
];

pub fn catalog() -> &'static [SuiteDescriptor] {
    CATALOG
}

pub fn find(key: &str) -> Option<&'static SuiteDescriptor> {
    CATALOG.iter().find(|s| s.key == key)
}

fn resolve(desc: &'static SuiteDescriptor, cfg: &SuiteConfig) -> Ctx {
    let def = defaults().get(desc.key);
    Ctx {
        key: desc.key,
        statement: desc.statement,
        seed: cfg.seed,
        trials: cfg.trials.or(def.map(|d| d.trials)).unwrap_or(1),
        tolerance: cfg.tolerance.or(def.map(|d| d.tolerance)).unwrap_or(0.0),
        d: cfg.d.or(def.and_then(|d| d.d)).unwrap_or(3),
        degree: cfg.degree.or(def.and_then(|d| d.degree)).unwrap_or(4),
        r_max: def.and_then(|d| d.r_max).unwrap_or(50.0),
        functions: cfg.functions.clone(),
        sequences: cfg.sequences.clone(),
        exec: cfg.exec,
    }
}

impl SuiteDescriptor {
    /// Runs the suite. A setup failure becomes a report with one violation.
    pub fn run(&'static self, cfg: &SuiteConfig) -> VerificationReport {
        let ctx = resolve(self, cfg);
        match (self.run)(&ctx) {
            Ok(r) => r,
            Err(e) => {
                let mut r = ctx.report();
                r.push_error("setup", &e);
                r
            }
        }
    }
}

pub fn run_suite(key: &str, cfg: &SuiteConfig) -> Result<VerificationReport> {
    let desc = find(key).ok_or_else(|| Error::InvalidArgument(format!("unknown suite '{key}'")))?;
    Ok(desc.run(cfg))
}

/// Every suite in catalog order. Overrides of `trials`, `d` and `degree`
/// are not forwarded, since suite sizes are not comparable.
pub fn run_all(cfg: &SuiteConfig) -> Vec<VerificationReport> {
    let base = SuiteConfig {
        trials: None,
        d: None,
        degree: None,
        ..cfg.clone()
    };
    CATALOG.iter().map(|s| s.run(&base)).collect()
}

// Case builders shared by the suite bodies.

/// `|got/want - 1| ≤ tol`, margin `tol - error`.
fn rel_case(label: impl Into<String>, got: f64, want: f64, tol: f64) -> CaseResult {
    let err = if want == 0.0 { got.abs() } else { (got / want - 1.0).abs() };
    let margin = if err.is_nan() { f64::NEG_INFINITY } else { tol - err };
    CaseResult::new(label, margin).with("got", got).with("want", want)
}

/// Relative agreement of `exp(got_log)` and `exp(want_log)`.
/// The tolerance is floored at the resolution of `want_log` itself.
fn log_rel_case(label: impl Into<String>, got_log: f64, want_log: f64, tol: f64) -> CaseResult {
    let err = log_rel_error(got_log, want_log);
    let margin = if err.is_nan() {
        f64::NEG_INFINITY
    } else if (got_log - want_log).abs() <= representability_floor(want_log) {
        tol
    } else {
        tol - err
    };
    CaseResult::new(label, margin).with("log_got", got_log).with("log_want", want_log)
}

fn flag_case(label: impl Into<String>, ok: bool) -> CaseResult {
    CaseResult::new(label, if ok { 0.0 } else { -1.0 })
}

/// Keeps the case with the smallest margin.
#[derive(Default)]
struct Tightest {
    case: Option<CaseResult>,
}

impl Tightest {
    fn offer(&mut self, c: CaseResult) {
        let replace = match &self.case {
            None => true,
            Some(cur) => c.margin < cur.margin || (c.margin.is_nan() && !cur.margin.is_nan()) || (cur.passed && !c.passed),
        };
        if replace {
            self.case = Some(c);
        }
    }

    fn push_into(self, report: &mut VerificationReport) {
        if let Some(c) = self.case {
            report.push(c);
        }
    }
}

fn push_results(report: &mut VerificationReport, results: Vec<Result<CaseResult>>, label: &str) {
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(c) => report.push(c),
            Err(e) => report.push_error(format!("{label} {i}"), &e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_matches_defaults() {
        let keys: Vec<&str> = CATALOG.iter().map(|s| s.key).collect();
        let table: Vec<&str> = defaults().keys().map(|k| k.as_str()).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(sorted, table);
        sorted.dedup();
        assert_eq!(sorted.len(), keys.len());
    }

    #[test]
    fn unknown_suite_is_an_error() {
        assert!(run_suite("no-such-suite", &SuiteConfig::default()).is_err());
    }
}
