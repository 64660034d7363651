use serde::{Deserialize, Serialize};

use super::GrowthFunction;
use crate::numeric::{geomspace, linspace};

/// Search grid for sandwich constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceGrid {
    /// Dilations `a = 2^{k/2}` for `k ∈ [-a_half_steps, a_half_steps]`.
    pub a_half_steps: i32,
    /// Multipliers `c = 2^j` for `j ∈ [-c_max_exp, c_max_exp]`.
    pub c_max_exp: i32,
    pub uniform_points: usize,
    pub geometric_points: usize,
}

impl Default for EquivalenceGrid {
    fn default() -> Self {
        EquivalenceGrid {
            a_half_steps: 20,
            c_max_exp: 20,
            uniform_points: 200,
            geometric_points: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Equivalence {
    /// `c1 f(a1 r) ≤ g(r) ≤ c2 f(a2 r)` at every grid point.
    Certificate { c1: f64, a1: f64, c2: f64, a2: f64 },
    /// No grid candidate works for the named side; `r` is where the most
    /// persistent candidate first fails.
    Counterexample { side: Side, r: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Lower,
    Upper,
}

impl Equivalence {
    pub fn is_certificate(&self) -> bool {
        matches!(self, Equivalence::Certificate { .. })
    }
}

pub fn equivalence_witness(f: &GrowthFunction, g: &GrowthFunction, r_max: f64) -> Equivalence {
    equivalence_witness_on(f, g, r_max, &EquivalenceGrid::default())
}

struct SideResult {
    log_c: f64,
    a: f64,
}

pub fn equivalence_witness_on(
    f: &GrowthFunction,
    g: &GrowthFunction,
    r_max: f64,
    grid: &EquivalenceGrid,
) -> Equivalence {
    let mut rs = linspace(0.0, r_max, grid.uniform_points);
    rs.extend(geomspace(r_max * 1e-6, r_max, grid.geometric_points));
    rs.sort_by(f64::total_cmp);
    rs.dedup();
    let log_g: Vec<Option<f64>> = rs.iter().map(|&r| g.log_eval(r).ok().filter(|v| v.is_finite())).collect();

    // Dilations ordered by distance from 1.
    let mut ks: Vec<i32> = (-grid.a_half_steps..=grid.a_half_steps).collect();
    ks.sort_by_key(|k| (k.abs(), *k));
    let c_lim = grid.c_max_exp as f64 * std::f64::consts::LN_2;

    let mut lower: Option<SideResult> = None;
    let mut upper: Option<SideResult> = None;
    let mut lower_fail = (0usize, 0.0);
    let mut upper_fail = (0usize, 0.0);

    for k in ks {
        if lower.is_some() && upper.is_some() {
            break;
        }
        let a = 2f64.powf(k as f64 / 2.0);
        // d(r) = log g(r) - log f(a r); None marks an unusable point.
        let d: Vec<Option<f64>> = rs
            .iter()
            .zip(&log_g)
            .map(|(&r, lg)| {
                let lf = f.log_eval(a * r).ok().filter(|v| v.is_finite())?;
                Some((*lg)? - lf)
            })
            .collect();
        if lower.is_none() {
            // Need log c1 ≤ d(r) for all r, with log c1 on the grid ≥ -c_lim.
            match prefix_until(&d, |x| x >= -c_lim) {
                None => {
                    let m = d.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
                    let log_c = snap_down(m.min(0.0).max(-c_lim));
                    lower = Some(SideResult { log_c, a });
                }
                Some(i) if i >= lower_fail.0 => lower_fail = (i, rs[i]),
                _ => {}
            }
        }
        if upper.is_none() {
            match prefix_until(&d, |x| x <= c_lim) {
                None => {
                    let m = d.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let log_c = snap_up(m.max(0.0).min(c_lim));
                    upper = Some(SideResult { log_c, a });
                }
                Some(i) if i >= upper_fail.0 => upper_fail = (i, rs[i]),
                _ => {}
            }
        }
    }
    match (lower, upper) {
        (Some(l), Some(u)) => Equivalence::Certificate {
            c1: l.log_c.exp(),
            a1: l.a,
            c2: u.log_c.exp(),
            a2: u.a,
        },
        (None, _) => Equivalence::Counterexample {
            side: Side::Lower,
            r: lower_fail.1,
        },
        (_, None) => Equivalence::Counterexample {
            side: Side::Upper,
            r: upper_fail.1,
        },
    }
}

/// Index of the first point that is unusable or violates `ok`.
fn prefix_until(d: &[Option<f64>], ok: impl Fn(f64) -> bool) -> Option<usize> {
    d.iter().position(|x| match x {
        Some(v) => !ok(*v),
        None => true,
    })
}

/// Largest `log 2^j ≤ x`.
fn snap_down(x: f64) -> f64 {
    (x / std::f64::consts::LN_2).floor() * std::f64::consts::LN_2
}

/// Smallest `log 2^j ≥ x`.
fn snap_up(x: f64) -> f64 {
    (x / std::f64::consts::LN_2).ceil() * std::f64::consts::LN_2
}
