use serde::{Deserialize, Serialize};

use super::WeightSequence;
use crate::error::Result;

/// Extra slope allowed when an exact first-half fit does not extend, to
/// absorb polynomial factors such as `√n`.
const SLOPE_SLACK: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SequenceEquivalence {
    /// `K1 c1ⁿ a(n) ≤ b(n) ≤ K2 c2ⁿ a(n)` for every checked `n`.
    Certificate { k1: f64, c1: f64, k2: f64, c2: f64 },
    /// First index where the extrapolated bounds break.
    Counterexample { n: usize },
}

impl SequenceEquivalence {
    pub fn is_certificate(&self) -> bool {
        matches!(self, SequenceEquivalence::Certificate { .. })
    }
}

/// Fits the growth rate of `b/a` on `n_max/4 ≤ n ≤ n_max/2` and checks that
/// it persists up to `n_max`; the constants then cover the whole range.
pub fn sequence_equivalence(a: &WeightSequence, b: &WeightSequence, n_max: usize) -> Result<SequenceEquivalence> {
    let la = a.prefix(n_max)?;
    let lb = b.prefix(n_max)?;
    let d: Vec<f64> = lb.iter().zip(&la).map(|(x, y)| x - y).collect();
    if n_max < 4 {
        return Err(crate::Error::InvalidArgument("sequence equivalence needs n_max >= 4".into()));
    }
    let half = n_max / 2;

    let mut fail_at = usize::MAX;
    let mut found = None;
    // Slope over the second quarter, where early irregularities have faded.
    let q = half / 2;
    let s_fit = if half > q { (d[half] - d[q]) / (half - q) as f64 } else { 0.0 };
    for slack in [0.0, SLOPE_SLACK] {
        // Upper line log K2 + n s2 ≥ d(n); lower line log K1 + n s1 ≤ d(n).
        let s2 = s_fit + slack;
        let s1 = s_fit - slack;
        // Anchor the lines on the second quarter and extrapolate.
        let anchor = |pick: fn(f64, f64) -> f64, s: f64, init: f64| {
            (q..=half).map(|n| d[n] - n as f64 * s).fold(init, pick)
        };
        let a2 = anchor(f64::max, s2, f64::NEG_INFINITY);
        let a1 = anchor(f64::min, s1, f64::INFINITY);
        let tol = |v: f64| 1e-12 * v.abs().max(1.0);
        let bad = (half + 1..=n_max).find(|&n| {
            let up = a2 + n as f64 * s2;
            let lo = a1 + n as f64 * s1;
            d[n] > up + tol(up) || d[n] < lo - tol(lo)
        });
        let k2 = d.iter().enumerate().map(|(n, v)| v - n as f64 * s2).fold(f64::NEG_INFINITY, f64::max);
        let k1 = d.iter().enumerate().map(|(n, v)| v - n as f64 * s1).fold(f64::INFINITY, f64::min);
        match bad {
            None => {
                found = Some(SequenceEquivalence::Certificate {
                    k1: k1.exp(),
                    c1: s1.exp(),
                    k2: k2.exp(),
                    c2: s2.exp(),
                });
                break;
            }
            Some(n) => fail_at = n,
        }
    }
    Ok(found.unwrap_or(SequenceEquivalence::Counterexample { n: fail_at }))
}
