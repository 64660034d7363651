//! Log-domain arithmetic shared by every module: factorials, compensated
//! log-sum-exp accumulation and tail-certified power series.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `n` for which `n!` is a finite double.
const EXACT_FACTORIAL_MAX: usize = 170;

fn factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut out = Vec::with_capacity(EXACT_FACTORIAL_MAX + 1);
        let mut prod = 1.0_f64;
        out.push(0.0);
        for k in 1..=EXACT_FACTORIAL_MAX {
            prod *= k as f64;
            out.push(prod.ln());
        }
        out
    })
}

/// `log n!`. Exact products up to 170, log-gamma beyond.
pub fn ln_factorial(n: usize) -> f64 {
    if n <= EXACT_FACTORIAL_MAX {
        factorial_table()[n]
    } else {
        statrs::function::gamma::ln_gamma(n as f64 + 1.0)
    }
}

pub fn ln_binomial(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// `n log n` with the convention `0 log 0 = 0`.
pub fn n_ln_n(n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        let x = n as f64;
        x * x.ln()
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Accumulates `log Σ exp(terms)` without overflow. The running scale is
/// the largest term seen so far; smaller terms are added compensated.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    shift: f64,
    acc: CompensatedSum,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self {
            shift: f64::NEG_INFINITY,
            acc: CompensatedSum::default(),
        }
    }
}

impl LogSumExp {
    pub fn add(&mut self, log_term: f64) {
        if log_term == f64::NEG_INFINITY {
            return;
        }
        if log_term > self.shift {
            let rescale = (self.shift - log_term).exp();
            let old = self.acc.value() * rescale;
            self.acc = CompensatedSum::default();
            self.acc.add(old);
            self.shift = log_term;
            self.acc.add(1.0);
        } else {
            self.acc.add((log_term - self.shift).exp());
        }
    }

    pub fn value(&self) -> f64 {
        if self.shift == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.shift + self.acc.value().ln()
        }
    }
}

/// `log(e^a + e^b)`.
pub fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `|a/b - 1| ≤ rel` for positive quantities given by their logarithms,
/// floored at the resolution with which a double can represent `log b`.
pub fn log_rel_close(log_a: f64, log_b: f64, rel: f64) -> bool {
    log_rel_error(log_a, log_b) <= rel || (log_a - log_b).abs() <= representability_floor(log_b)
}

/// `|a/b - 1|` from logarithms.
pub fn log_rel_error(log_a: f64, log_b: f64) -> f64 {
    if log_a == log_b {
        return 0.0;
    }
    (log_a - log_b).exp_m1().abs()
}

/// Absolute spacing of doubles near `log_b`, times a safety factor covering
/// a few nested optimizations. When `log u` is of order 1e17 no double
/// computation can resolve `u` to any relative accuracy; agreement of the
/// logarithms to this many ulps is the best achievable.
pub fn representability_floor(log_b: f64) -> f64 {
    16384.0 * f64::EPSILON * log_b.abs()
}

/// Truncation policy for tail-certified series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// Stop once the tail bound is below `rel_tol` times the partial sum.
    pub rel_tol: f64,
    /// ... or below this absolute value.
    pub abs_tol: f64,
    pub max_terms: usize,
    pub min_terms: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            rel_tol: 1e-15,
            abs_tol: 0.0,
            max_terms: 50_000,
            min_terms: 4,
        }
    }
}

/// A power-series value with its truncation certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesSum {
    pub log_value: f64,
    /// Number of terms summed.
    pub terms: usize,
    /// Log of the geometric tail bound at the stopping index.
    pub log_tail_bound: f64,
}

impl SeriesSum {
    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }
}

/// Sums `Σ_n exp(log_coef(n)) r^n` in the log domain.
///
/// The tail after index `N` is bounded by `T_N ρ/(1-ρ)` where `ρ` is the
/// last term ratio, valid once ratios are nonincreasing (log-concave
/// coefficients). The sum stops at the first `N` past `min_terms` whose
/// ratios have been nonincreasing for three steps and whose bound meets
/// the policy.
pub fn power_series<F>(mut log_coef: F, r: f64, policy: &TruncationPolicy) -> Result<SeriesSum>
where
    F: FnMut(usize) -> Result<f64>,
{
    if !(r >= 0.0) {
        return Err(Error::InvalidArgument(format!("series argument r = {r} must be >= 0")));
    }
    let first = log_coef(0)?;
    if r == 0.0 {
        return Ok(SeriesSum {
            log_value: first,
            terms: 1,
            log_tail_bound: f64::NEG_INFINITY,
        });
    }
    let log_r = r.ln();
    let mut acc = LogSumExp::default();
    acc.add(first);
    let mut prev_term = first;
    let mut prev_ratio = f64::INFINITY;
    let mut monotone_run = 0usize;
    for n in 1..policy.max_terms {
        let c = log_coef(n)?;
        if c.is_nan() || c == f64::INFINITY {
            return Err(Error::NonFinite { at: n as f64, value: c });
        }
        let term = c + n as f64 * log_r;
        acc.add(term);
        let ratio = term - prev_term;
        if ratio <= prev_ratio + 1e-12 {
            monotone_run += 1;
        } else {
            monotone_run = 0;
        }
        prev_ratio = ratio;
        prev_term = term;
        if n + 1 >= policy.min_terms && monotone_run >= 3 && ratio < 0.0 {
            let log_tail = term + ratio - (-ratio.exp()).ln_1p();
            let total = acc.value();
            let rel_ok = log_tail <= total + policy.rel_tol.ln();
            let abs_ok = policy.abs_tol > 0.0 && log_tail <= policy.abs_tol.ln();
            if rel_ok || abs_ok || term == f64::NEG_INFINITY {
                return Ok(SeriesSum {
                    log_value: total,
                    terms: n + 1,
                    log_tail_bound: log_tail,
                });
            }
        }
    }
    Err(Error::TruncationBudgetExceeded {
        cap: policy.max_terms,
    })
}

/// `n` points geometrically spaced on `[lo, hi]`, both ends included.
pub fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// `n` points uniformly spaced on `[lo, hi]`, both ends included.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials_match_products() {
        assert_eq!(ln_factorial(0), 0.0);
        assert!((ln_factorial(5) - 120f64.ln()).abs() < 1e-15);
        let lg = statrs::function::gamma::ln_gamma(171.0);
        assert!((ln_factorial(170) - lg).abs() / lg < 1e-13);
        let big = ln_factorial(171);
        assert!((big - ln_factorial(170) - 171f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn log_sum_exp_handles_huge_terms() {
        let mut acc = LogSumExp::default();
        acc.add(1000.0);
        acc.add(1000.0);
        assert!((acc.value() - (1000.0 + 2f64.ln())).abs() < 1e-12);
        let mut empty = LogSumExp::default();
        empty.add(f64::NEG_INFINITY);
        assert_eq!(empty.value(), f64::NEG_INFINITY);
    }

    #[test]
    fn exponential_series_is_certified() {
        let s = power_series(|n| Ok(-ln_factorial(n)), 1.0, &TruncationPolicy::default()).unwrap();
        assert!((s.value() - std::f64::consts::E).abs() < 1e-14);
        let z = power_series(|n| Ok(-ln_factorial(n)), 0.0, &TruncationPolicy::default()).unwrap();
        assert_eq!(z.value(), 1.0);
    }

    #[test]
    fn divergent_series_exhausts_budget() {
        let policy = TruncationPolicy {
            max_terms: 200,
            ..Default::default()
        };
        let err = power_series(|_| Ok(0.0), 2.0, &policy).unwrap_err();
        assert_eq!(err, Error::TruncationBudgetExceeded { cap: 200 });
    }

    #[test]
    fn rel_close_floors_at_double_resolution() {
        assert!(log_rel_close(1.0, 1.0 + 1e-9, 1e-8));
        assert!(!log_rel_close(1.0, 1.1, 1e-8));
        assert!(log_rel_close(1e40, 1e40 * (1.0 + 1e-15), 1e-5));
    }
}
