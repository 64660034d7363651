use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::GrowthFunction;
use crate::error::Error;
use crate::numeric::{geomspace, linspace};
use crate::report::CheckResult;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GrowthCondition {
    CPlusLog,
    CPlusHalf,
    U0,
    U1,
    U2,
    U3,
    LogExpConvex,
    LogXkConvex(f64),
}

impl fmt::Display for GrowthCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GrowthCondition::CPlusLog => write!(f, "C_plus_log"),
            GrowthCondition::CPlusHalf => write!(f, "C_plus_half"),
            GrowthCondition::U0 => write!(f, "U0"),
            GrowthCondition::U1 => write!(f, "U1"),
            GrowthCondition::U2 => write!(f, "U2"),
            GrowthCondition::U3 => write!(f, "U3"),
            GrowthCondition::LogExpConvex => write!(f, "log_exp_convex"),
            GrowthCondition::LogXkConvex(k) => write!(f, "log_xk_convex({k})"),
        }
    }
}

impl FromStr for GrowthCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let lower = s.to_ascii_lowercase();
        Ok(match lower.as_str() {
            "c_plus_log" | "cpluslog" => GrowthCondition::CPlusLog,
            "c_plus_half" | "cplushalf" => GrowthCondition::CPlusHalf,
            "u0" => GrowthCondition::U0,
            "u1" => GrowthCondition::U1,
            "u2" => GrowthCondition::U2,
            "u3" => GrowthCondition::U3,
            "log_exp_convex" => GrowthCondition::LogExpConvex,
            _ => {
                if let Some(k) = lower
                    .strip_prefix("log_xk_convex")
                    .map(|rest| rest.trim_matches(|c| c == '(' || c == ')' || c == ':'))
                {
                    let k: f64 = k.parse().map_err(|_| Error::Parse(format!("bad exponent in {s:?}")))?;
                    if k <= 0.0 {
                        return Err(Error::Parse(format!("exponent must be positive in {s:?}")));
                    }
                    GrowthCondition::LogXkConvex(k)
                } else {
                    return Err(Error::Parse(format!("unknown growth condition {s:?}")));
                }
            }
        })
    }
}

const R_MAX: f64 = 1e8;
const PER_DECADE: usize = 8;
/// Decades at the top of the grid over which a limit quotient is inspected.
const TAIL_DECADES: usize = 3;
const CONVEX_TOL: f64 = 1e-9;

/// Decides a condition on finite grids. Limits are judged by the quotient's
/// trend over the top decades of `[1, 10⁸]`; convexity by second differences.
pub fn check_condition(u: &GrowthFunction, cond: GrowthCondition) -> CheckResult {
    let name = cond.to_string();
    match cond {
        GrowthCondition::CPlusLog => quotient_grows(u, &name, |r| r.ln()),
        GrowthCondition::CPlusHalf => quotient_grows(u, &name, |r| r.sqrt()),
        GrowthCondition::U0 => check_u0(u, &name),
        GrowthCondition::U1 => check_u1(u, &name),
        GrowthCondition::U2 => check_u2(u, &name),
        GrowthCondition::U3 => convex_in(u, &name, 2.0),
        GrowthCondition::LogXkConvex(k) => convex_in(u, &name, k),
        GrowthCondition::LogExpConvex => {
            let xs = linspace((1e-6f64).ln(), R_MAX.ln(), 4000);
            second_differences(&name, &xs, |x| u.log_eval(x.exp()))
        }
    }
}

fn decade_grid() -> Vec<f64> {
    geomspace(1.0, R_MAX, 8 * PER_DECADE + 1)
}

fn scan_grid() -> Vec<f64> {
    let mut g = vec![0.0];
    g.extend(geomspace(1e-6, R_MAX, 14 * PER_DECADE + 1));
    g
}

fn quotient_grows(u: &GrowthFunction, name: &str, denom: impl Fn(f64) -> f64) -> CheckResult {
    let grid = decade_grid();
    let start = grid.len() - 1 - TAIL_DECADES * PER_DECADE;
    let mut prev: Option<(f64, f64)> = None;
    for &r in &grid[start..] {
        let q = match u.log_eval(r) {
            Ok(v) => v / denom(r),
            Err(e) => {
                return CheckResult::fail(name, grid.len())
                    .with_counterexample("r", r)
                    .with_note(format!("evaluation failed: {e}"))
            }
        };
        if q == f64::INFINITY {
            // Overflowed u: the quotient has left every finite bound.
            return CheckResult::pass(name, grid.len()).with_witness("last_quotient", q).with_witness("r", r);
        }
        if let Some((_, pq)) = prev {
            if !(q > pq) {
                return CheckResult::fail(name, grid.len())
                    .with_counterexample("r", r)
                    .with_counterexample("quotient", q)
                    .with_counterexample("previous_quotient", pq);
            }
        }
        prev = Some((r, q));
    }
    let (r, q) = prev.expect("grid is nonempty");
    CheckResult::pass(name, grid.len())
        .with_witness("last_quotient", q)
        .with_witness("r", r)
}

fn check_u0(u: &GrowthFunction, name: &str) -> CheckResult {
    let grid = scan_grid();
    let mut min = (f64::INFINITY, 0.0);
    for &r in &grid {
        match u.log_eval(r) {
            Ok(v) if v < min.0 => min = (v, r),
            Ok(_) => {}
            Err(e) => {
                return CheckResult::fail(name, grid.len())
                    .with_counterexample("r", r)
                    .with_note(format!("evaluation failed: {e}"))
            }
        }
    }
    let (v, r) = min;
    let ok = v.abs() <= 1e-9;
    let res = if ok {
        CheckResult::pass(name, grid.len()).with_witness("r_min", r)
    } else {
        CheckResult::fail(name, grid.len())
            .with_counterexample("r", r)
            .with_counterexample("log_u", v)
    };
    res.with_witness("min_log_u", v)
}

fn check_u1(u: &GrowthFunction, name: &str) -> CheckResult {
    let grid = scan_grid();
    let mut prev = f64::NEG_INFINITY;
    for (i, &r) in grid.iter().enumerate() {
        let v = match u.log_eval(r) {
            Ok(v) => v,
            Err(e) => {
                return CheckResult::fail(name, grid.len())
                    .with_counterexample("r", r)
                    .with_note(format!("evaluation failed: {e}"))
            }
        };
        if i == 0 && v.abs() > 1e-12 {
            return CheckResult::fail(name, grid.len())
                .with_counterexample("r", 0.0)
                .with_counterexample("log_u", v);
        }
        if v < prev - 1e-12 * prev.abs() {
            return CheckResult::fail(name, grid.len())
                .with_counterexample("r", r)
                .with_counterexample("decrease", prev - v);
        }
        prev = v;
        if v == f64::INFINITY {
            break;
        }
    }
    CheckResult::pass(name, grid.len())
}

/// The quotient `log u(r)/r` must stop growing over the top decades; the
/// witness envelope is `c2` = last quotient (at least the running max over
/// the tail), `c1` = max over the grid of `u(r) e^{-c2 r}`.
fn check_u2(u: &GrowthFunction, name: &str) -> CheckResult {
    let grid = decade_grid();
    let start = grid.len() - 1 - TAIL_DECADES * PER_DECADE;
    let mut qs = Vec::with_capacity(grid.len());
    for &r in &grid {
        match u.log_eval(r) {
            Ok(v) if v.is_finite() => qs.push(v / r),
            Ok(_) => {
                return CheckResult::fail(name, grid.len())
                    .with_counterexample("r", r)
                    .with_counterexample("quotient", f64::INFINITY)
            }
            Err(e) => {
                return CheckResult::fail(name, grid.len())
                    .with_counterexample("r", r)
                    .with_note(format!("evaluation failed: {e}"))
            }
        }
    }
    let tail = &qs[start..];
    let q_start = tail[0];
    let q_end = *tail.last().expect("tail nonempty");
    // Growing by more than rounding across three decades means unbounded.
    if q_end > q_start * (1.0 + 1e-9) + 1e-12 {
        return CheckResult::fail(name, grid.len())
            .with_counterexample("r", *grid.last().expect("grid nonempty"))
            .with_counterexample("quotient", q_end)
            .with_counterexample("quotient_three_decades_earlier", q_start);
    }
    let c2 = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max).max(1e-12);
    let mut log_c1 = f64::NEG_INFINITY;
    for &r in scan_grid().iter() {
        if let Ok(v) = u.log_eval(r) {
            log_c1 = log_c1.max(v - c2 * r);
        }
    }
    CheckResult::pass(name, grid.len())
        .with_witness("c1", log_c1.exp())
        .with_witness("c2", c2)
}

fn convex_in(u: &GrowthFunction, name: &str, k: f64) -> CheckResult {
    let x_max = R_MAX.powf(1.0 / k);
    let fine = linspace(0.0, 10f64.min(x_max), 2000);
    let r = second_differences(name, &fine, |x| u.log_eval(x.powf(k)));
    if !r.passed() {
        return r;
    }
    let coarse = linspace(0.0, x_max, 10_000);
    second_differences(name, &coarse, |x| u.log_eval(x.powf(k)))
}

/// Second differences on a uniform grid, stopping at the first overflow.
fn second_differences(
    name: &str,
    xs: &[f64],
    f: impl Fn(f64) -> crate::Result<f64>,
) -> CheckResult {
    let mut vals = Vec::with_capacity(xs.len());
    for &x in xs {
        match f(x) {
            Ok(v) if v.is_finite() => vals.push(v),
            Ok(_) => break,
            Err(e) => {
                return CheckResult::fail(name, xs.len())
                    .with_counterexample("x", x)
                    .with_note(format!("evaluation failed: {e}"))
            }
        }
    }
    let mut worst = f64::INFINITY;
    for i in 1..vals.len().saturating_sub(1) {
        let (a, b, c) = (vals[i - 1], vals[i], vals[i + 1]);
        let dd = a - 2.0 * b + c;
        let scale = a.abs().max(b.abs()).max(c.abs());
        let slack = dd + CONVEX_TOL * scale + 1e-12;
        worst = worst.min(dd);
        if slack < 0.0 {
            return CheckResult::fail(name, vals.len())
                .with_counterexample("x", xs[i])
                .with_counterexample("second_difference", dd);
        }
    }
    CheckResult::pass(name, vals.len()).with_witness("min_second_difference", worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::growth::GrowthFunction;

    fn verdict(u: &GrowthFunction, c: GrowthCondition) -> bool {
        check_condition(u, c).passed()
    }

    #[test]
    fn exp_satisfies_everything() {
        let u = GrowthFunction::pure_exp();
        for c in [
            GrowthCondition::CPlusLog,
            GrowthCondition::CPlusHalf,
            GrowthCondition::U0,
            GrowthCondition::U1,
            GrowthCondition::U2,
            GrowthCondition::U3,
            GrowthCondition::LogExpConvex,
        ] {
            assert!(verdict(&u, c), "{c}");
        }
        let w = check_condition(&u, GrowthCondition::U2).witness;
        assert!((w["c2"] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn double_exponential_violates_u2() {
        let v = GrowthFunction::iterated_exp(2).unwrap();
        let r = check_condition(&v, GrowthCondition::U2);
        assert!(!r.passed());
        assert!(r.counterexample.contains_key("r"));
    }

    #[test]
    fn polynomial_is_not_in_c_plus_log() {
        let u = GrowthFunction::custom("quartic", Default::default(), |r| 4.0 * (1.0 + r).ln());
        assert!(!verdict(&u, GrowthCondition::CPlusLog));
    }

    #[test]
    fn sqrt_growth_fails_c_plus_half() {
        let u = GrowthFunction::custom("sqrt", Default::default(), |r| 3.0 * r.sqrt());
        assert!(verdict(&u, GrowthCondition::CPlusLog));
        assert!(!verdict(&u, GrowthCondition::CPlusHalf));
    }

    #[test]
    fn concave_square_fails_u3() {
        let u = GrowthFunction::custom("shifted", Default::default(), |r| (r - 1.0).powi(2));
        assert!(!verdict(&u, GrowthCondition::U3));
        assert!(verdict(&u, GrowthCondition::U0));
        assert!(!verdict(&u, GrowthCondition::U1));
    }

    #[test]
    fn parse_round_trip() {
        for s in ["U0", "u3", "C_plus_half", "log_xk_convex(3)"] {
            let c: GrowthCondition = s.parse().unwrap();
            assert_eq!(c.to_string().parse::<GrowthCondition>().unwrap(), c);
        }
        assert!("U9".parse::<GrowthCondition>().is_err());
    }
}
