use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{sequence_equivalence, Direction, Origin, SequenceEquivalence, WeightSequence};
use crate::error::{Error, Result};
use crate::growth::GrowthFunction;
use crate::numeric::ln_factorial;
use crate::report::{CheckResult, Verdict};

/// Second differences above this count as convexity in the log domain.
const CONCAVITY_TOL: f64 = 1e-9;
/// Allowed rise of the normalized quotient between the middle and last part
/// of the range before the limsup is judged infinite.
const B1_SLACK: f64 = 0.35;
const A1_MAX_LOG2_SIGMA: i32 = 10;
/// Constants `c = 2^{j/4}` searched for C1-C3.
const C_GRID: std::ops::RangeInclusive<i32> = -40..=80;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SequenceCondition {
    A1,
    A2,
    B1,
    B1Tilde,
    B2,
    B2Tilde,
    NearB2,
    NearB2Tilde,
    C1,
    C2,
    C3,
}

impl SequenceCondition {
    pub const ALL: [SequenceCondition; 11] = [
        SequenceCondition::A1,
        SequenceCondition::A2,
        SequenceCondition::B1,
        SequenceCondition::B1Tilde,
        SequenceCondition::B2,
        SequenceCondition::B2Tilde,
        SequenceCondition::NearB2,
        SequenceCondition::NearB2Tilde,
        SequenceCondition::C1,
        SequenceCondition::C2,
        SequenceCondition::C3,
    ];
}

impl fmt::Display for SequenceCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SequenceCondition::A1 => "A1",
            SequenceCondition::A2 => "A2",
            SequenceCondition::B1 => "B1",
            SequenceCondition::B1Tilde => "B1tilde",
            SequenceCondition::B2 => "B2",
            SequenceCondition::B2Tilde => "B2tilde",
            SequenceCondition::NearB2 => "nearB2",
            SequenceCondition::NearB2Tilde => "nearB2tilde",
            SequenceCondition::C1 => "C1",
            SequenceCondition::C2 => "C2",
            SequenceCondition::C3 => "C3",
        };
        f.write_str(s)
    }
}

impl FromStr for SequenceCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SequenceCondition::ALL
            .into_iter()
            .find(|c| c.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown sequence condition '{s}'")))
    }
}

/// Decides `cond` for `seq` on `0..=n_max`. Evaluation errors become a failed
/// verdict carrying the error text.
pub fn check(seq: &WeightSequence, cond: SequenceCondition, n_max: usize) -> CheckResult {
    let name = cond.to_string();
    let res = match cond {
        SequenceCondition::A1 => check_a1(seq, n_max),
        SequenceCondition::A2 => check_a2(seq, n_max),
        SequenceCondition::B1 => check_b1(seq, n_max, Direction::GAlpha),
        SequenceCondition::B1Tilde => check_b1(seq, n_max, Direction::GInvAlpha),
        SequenceCondition::B2 => check_log_concave(seq, n_max, 1.0).map(|c| c.into_result(&name)),
        SequenceCondition::B2Tilde => check_log_concave(seq, n_max, -1.0).map(|c| c.into_result(&name)),
        SequenceCondition::NearB2 => check_near(seq, n_max, 1.0),
        SequenceCondition::NearB2Tilde => check_near(seq, n_max, -1.0),
        SequenceCondition::C1 => check_c(seq, n_max, CKind::Monotone),
        SequenceCondition::C2 => check_c(seq, n_max, CKind::Sub),
        SequenceCondition::C3 => check_c(seq, n_max, CKind::Super),
    };
    let mut out = match res {
        Ok(r) => r,
        Err(e) => CheckResult::fail(&name, n_max).with_note(e.to_string()),
    };
    out.condition = name;
    out.n_max = n_max;
    out
}

fn check_a1(seq: &WeightSequence, n_max: usize) -> Result<CheckResult> {
    let la = seq.prefix(n_max)?;
    if la[0].abs() > 1e-12 {
        return Ok(CheckResult::fail("A1", n_max)
            .with_counterexample("n", 0.0)
            .with_counterexample("log_alpha", la[0]));
    }
    let settle = n_max - n_max / 4;
    for j in 0..=A1_MAX_LOG2_SIGMA {
        let log_sigma = j as f64 * std::f64::consts::LN_2;
        let (arg, inf) = la
            .iter()
            .enumerate()
            .map(|(n, v)| (n, v + n as f64 * log_sigma))
            .fold((0, f64::INFINITY), |acc, (n, v)| if v < acc.1 { (n, v) } else { acc });
        if arg <= settle {
            return Ok(CheckResult::pass("A1", n_max)
                .with_witness("sigma", log_sigma.exp())
                .with_witness("inf_log", inf)
                .with_witness("argmin", arg as f64));
        }
    }
    Ok(CheckResult::fail("A1", n_max).with_note(format!(
        "infimum still moving at sigma = 2^{A1_MAX_LOG2_SIGMA}"
    )))
}

fn check_a2(seq: &WeightSequence, n_max: usize) -> Result<CheckResult> {
    if n_max < 8 {
        return Err(Error::InvalidArgument("A2 needs n_max >= 8".into()));
    }
    let la = seq.prefix(n_max)?;
    // log (alpha(n)/n!)^{1/n}; only its trend over the upper half matters.
    let q = |n: usize| (la[n] - ln_factorial(n)) / n as f64;
    let start = n_max / 2;
    for n in start..n_max {
        let (a, b) = (q(n), q(n + 1));
        if b > a + 1e-12 * a.abs().max(1.0) {
            return Ok(CheckResult::fail("A2", n_max)
                .with_counterexample("n", (n + 1) as f64)
                .with_counterexample("log_root", b));
        }
    }
    Ok(CheckResult::pass("A2", n_max)
        .with_witness("log_root_at_start", q(start))
        .with_witness("log_root_at_n_max", q(n_max)))
}

fn check_b1(seq: &WeightSequence, n_max: usize, direction: Direction) -> Result<CheckResult> {
    let name = match direction {
        Direction::GAlpha => "B1",
        Direction::GInvAlpha => "B1tilde",
    };
    if n_max < 8 {
        return Err(Error::InvalidArgument("B1 needs n_max >= 8".into()));
    }
    let sign = match direction {
        Direction::GAlpha => -1.0,
        Direction::GInvAlpha => 1.0,
    };
    let g = match (seq.origin(), direction) {
        (Origin::Ones, _) => GrowthFunction::pure_exp(),
        (Origin::Bell { k, .. }, Direction::GAlpha) => GrowthFunction::iterated_exp(k + 1)?,
        _ => {
            // Bracketing probes arguments where the series cannot be summed;
            // those count as uphill for the infimum.
            let inner = GrowthFunction::generating(seq, direction);
            let flags = inner.flags();
            GrowthFunction::custom(inner.name(), flags, move |r| inner.log_eval(r).unwrap_or(f64::INFINITY))
        }
    };
    let mut q = vec![f64::NAN; n_max + 1];
    for n in n_max / 4..=n_max {
        let log_ell = g.log_ell_n(n)?;
        if !log_ell.is_finite() {
            return Ok(CheckResult::fail(name, n_max)
                .with_counterexample("n", n as f64)
                .with_note("generating function diverges"));
        }
        q[n] = (ln_factorial(n) + sign * seq.log_alpha(n)? + log_ell) / n as f64;
    }
    let max_of = |a: usize, b: usize| q[a..b].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let middle = max_of(n_max / 4, n_max / 2);
    let tail = max_of(n_max / 2, n_max + 1);
    let verdict = Verdict::from_bool(tail <= middle + B1_SLACK);
    Ok(CheckResult::new(name, verdict, n_max)
        .with_witness("sup_middle", middle)
        .with_witness("sup_tail", tail)
        .with_witness("slack", B1_SLACK))
}

struct Concavity {
    worst: f64,
    at: usize,
}

impl Concavity {
    fn into_result(self, name: &str) -> CheckResult {
        let r = if self.worst <= CONCAVITY_TOL {
            CheckResult::pass(name, 0)
        } else {
            CheckResult::fail(name, 0).with_counterexample("n", self.at as f64)
        };
        r.with_witness("max_second_difference", self.worst)
    }
}

fn second_difference_max(v: &[f64]) -> Concavity {
    let mut worst = f64::NEG_INFINITY;
    let mut at = 0;
    for n in 1..v.len().saturating_sub(1) {
        let d = v[n + 1] - 2.0 * v[n] + v[n - 1];
        if d > worst {
            worst = d;
            at = n;
        }
    }
    Concavity { worst, at }
}

/// `sign = 1`: `α(n)/n!` log-concave. `sign = -1`: `1/(n! α(n))` log-concave.
fn check_log_concave(seq: &WeightSequence, n_max: usize, sign: f64) -> Result<Concavity> {
    let la = seq.prefix(n_max)?;
    let v: Vec<f64> = la.iter().enumerate().map(|(n, a)| sign * a - ln_factorial(n)).collect();
    Ok(second_difference_max(&v))
}

/// `n^{2n} / (n!)²` in logs, with `0⁰ = 1`.
fn log_stirling_ratio(n: usize) -> f64 {
    crate::numeric::n_ln_n(n) * 2.0 - 2.0 * ln_factorial(n)
}

fn check_near(seq: &WeightSequence, n_max: usize, sign: f64) -> Result<CheckResult> {
    let name = if sign > 0.0 { "nearB2" } else { "nearB2tilde" };
    let direct = check_log_concave(seq, n_max, sign)?;
    if direct.worst <= CONCAVITY_TOL {
        return Ok(CheckResult::pass(name, n_max)
            .with_witness("max_second_difference", direct.worst)
            .with_note("witness: alpha itself"));
    }
    // Canonical candidate λ(n) = α(n) (n!)²/n^{2n} (mirrored for the tilde form).
    let la = seq.prefix(n_max)?;
    let lambda: Vec<f64> = la
        .iter()
        .enumerate()
        .map(|(n, a)| a - sign * log_stirling_ratio(n))
        .collect();
    let cand = WeightSequence::explicit_logs(lambda.clone())?;
    let conc = check_log_concave(&cand, n_max, sign)?;
    let eq = sequence_equivalence(seq, &cand, n_max)?;
    let mut r = CheckResult::new(
        name,
        Verdict::from_bool(conc.worst <= CONCAVITY_TOL && eq.is_certificate()),
        n_max,
    )
    .with_witness("max_second_difference", conc.worst)
    .with_note(if sign > 0.0 {
        "witness: alpha(n) (n!)^2 / n^(2n)"
    } else {
        "witness: alpha(n) n^(2n) / (n!)^2"
    });
    match eq {
        SequenceEquivalence::Certificate { k1, c1, k2, c2 } => {
            r = r
                .with_witness("K1", k1)
                .with_witness("c1", c1)
                .with_witness("K2", k2)
                .with_witness("c2", c2);
        }
        SequenceEquivalence::Counterexample { n } => r = r.with_counterexample("n", n as f64),
    }
    if conc.worst > CONCAVITY_TOL {
        r = r.with_counterexample("n_concavity", conc.at as f64);
    }
    Ok(r)
}

#[derive(Clone, Copy)]
enum CKind {
    Monotone,
    Sub,
    Super,
}

fn check_c(seq: &WeightSequence, n_max: usize, kind: CKind) -> Result<CheckResult> {
    let la = seq.prefix(n_max)?;
    let name = match kind {
        CKind::Monotone => "C1",
        CKind::Sub => "C2",
        CKind::Super => "C3",
    };
    // Smallest admissible log c, with the pair realizing it.
    let mut need = f64::NEG_INFINITY;
    let mut at = (0usize, 0usize);
    let mut zero_violation = false;
    for m in 0..=n_max {
        for n in 0..=m {
            let (lhs, denom) = match kind {
                CKind::Monotone => (la[n] - la[m], m),
                CKind::Sub if n + m <= n_max => (la[n + m] - la[n] - la[m], n + m),
                CKind::Super if n + m <= n_max => (la[n] + la[m] - la[n + m], n + m),
                _ => continue,
            };
            if denom == 0 {
                zero_violation |= lhs > 1e-12;
                continue;
            }
            let q = lhs / denom as f64;
            if q > need {
                need = q;
                at = (n, m);
            }
        }
    }
    let step = std::f64::consts::LN_2 / 4.0;
    let j = (need / step - 1e-9).ceil().max(*C_GRID.start() as f64);
    if zero_violation || j > *C_GRID.end() as f64 {
        let mut r = CheckResult::fail(name, n_max)
            .with_counterexample("n", at.0 as f64)
            .with_counterexample("m", at.1 as f64);
        if zero_violation {
            r = r.with_note("fails at n = m = 0");
        }
        return Ok(r);
    }
    let c = (j * step).exp();
    Ok(CheckResult::pass(name, n_max)
        .with_witness("c", c)
        .with_witness("required_log_c", need))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for c in SequenceCondition::ALL {
            assert_eq!(c.to_string().parse::<SequenceCondition>().unwrap(), c);
        }
        assert!("B7".parse::<SequenceCondition>().is_err());
    }

    #[test]
    fn ones_satisfy_everything_cheap() {
        let s = WeightSequence::ones();
        for c in [
            SequenceCondition::A1,
            SequenceCondition::A2,
            SequenceCondition::B2,
            SequenceCondition::B2Tilde,
            SequenceCondition::C1,
            SequenceCondition::C2,
            SequenceCondition::C3,
        ] {
            assert!(check(&s, c, 40).passed(), "{c}");
        }
    }

    #[test]
    fn c1_constant_for_a_decreasing_sequence() {
        // α(n) = 2^{-n}: α(n) ≤ c^m α(m) needs c ≥ 2.
        let s = WeightSequence::explicit_logs((0..30).map(|n| -(n as f64) * 2f64.ln()).collect()).unwrap();
        let r = check(&s, SequenceCondition::C1, 29);
        assert!(r.passed());
        assert!((r.witness["c"] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_weight_fails_c2() {
        let s = WeightSequence::explicit_logs((0..=40).map(|n| (n * n) as f64).collect()).unwrap();
        let r = check(&s, SequenceCondition::C2, 40);
        assert!(!r.passed());
        assert!(check(&s, SequenceCondition::C3, 40).passed());
    }

    #[test]
    fn canonical_witness_repairs_stirling_factor() {
        // α(n) = n^{2n}/n! is not B2, but α(n) (n!)²/n^{2n} = n! is.
        let logs: Vec<f64> = (0..=40).map(|n| 2.0 * crate::numeric::n_ln_n(n) - ln_factorial(n)).collect();
        let s = WeightSequence::explicit_logs(logs).unwrap();
        assert!(!check(&s, SequenceCondition::B2, 40).passed());
        let r = check(&s, SequenceCondition::NearB2, 40);
        assert!(r.passed(), "{r:?}");
        assert!(r.note.as_deref().unwrap().contains("n^(2n)"));
    }

    #[test]
    fn exp_growth_sequence_is_near_b2() {
        let s = WeightSequence::from_growth(&GrowthFunction::pure_exp());
        let r = check(&s, SequenceCondition::NearB2, 40);
        assert!(r.passed(), "{r:?}");
        assert!(check(&s, SequenceCondition::B1, 40).passed());
    }
}
