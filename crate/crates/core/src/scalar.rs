//! One-dimensional extremum search in log coordinates.
//!
//! Bracket by doubling away from a start point, prescan the bracket on a
//! uniform grid, then golden-section on the best grid cell.

use crate::error::{Error, Result};

/// `log(1e-300)`.
pub const X_MIN: f64 = -690.775_527_898_213_7;
pub const X_MAX: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    Interior,
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub x: f64,
    pub value: f64,
    pub edge: Edge,
}

#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    pub x0: f64,
    pub lower: f64,
    pub upper: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub prescan: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            x0: 0.0,
            lower: X_MIN,
            upper: X_MAX,
            tol: 1e-10,
            max_iter: 200,
            prescan: 64,
        }
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Objective values are compared with `+∞` treated as uphill. NaN and
/// `-∞` are reported, since a minimum of `-∞` means the search is
/// meaningless.
fn checked<F>(f: &mut F, x: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let v = f(x)?;
    if v.is_nan() || v == f64::NEG_INFINITY {
        return Err(Error::NonFinite { at: x, value: v });
    }
    Ok(v)
}

/// Walks from `x0` in steps `±1, ±2, ±4, …` until the objective turns
/// uphill or the limit is hit. Returns the visited points in order.
fn walk<F>(f: &mut F, x0: f64, f0: f64, dir: f64, limit: f64) -> Result<Vec<(f64, f64)>>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut out = Vec::new();
    let mut prev = f0;
    let mut best = f0;
    let mut step = 1.0;
    loop {
        let mut x = x0 + dir * step;
        let at_limit = (dir > 0.0 && x >= limit) || (dir < 0.0 && x <= limit);
        if at_limit {
            x = limit;
        }
        let v = checked(f, x)?;
        out.push((x, v));
        if at_limit || (v > prev && v > best) {
            break;
        }
        prev = v;
        best = best.min(v);
        step *= 2.0;
    }
    Ok(out)
}

/// Minimizes a unimodal (or mildly multimodal) objective on `[lower, upper]`.
pub fn minimize<F>(mut f: F, opts: &SearchOptions) -> Result<Extremum>
where
    F: FnMut(f64) -> Result<f64>,
{
    let x0 = opts.x0.clamp(opts.lower, opts.upper);
    let f0 = checked(&mut f, x0)?;
    let mut pts = vec![(x0, f0)];
    if x0 < opts.upper {
        pts.extend(walk(&mut f, x0, f0, 1.0, opts.upper)?);
    }
    if x0 > opts.lower {
        pts.extend(walk(&mut f, x0, f0, -1.0, opts.lower)?);
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = argmin(&pts);
    let lo = pts[best.saturating_sub(1)].0;
    let hi = pts[(best + 1).min(pts.len() - 1)].0;

    // Prescan guards against a narrow dip missed by the coarse walk.
    if opts.prescan > 2 && hi > lo {
        let n = opts.prescan;
        let mut grid = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let x = lo + (hi - lo) * i as f64 / n as f64;
            grid.push((x, checked(&mut f, x)?));
        }
        pts = grid;
        best = argmin(&pts);
    }
    let (bx, bv) = pts[best];
    let a = pts[best.saturating_sub(1)].0;
    let b = pts[(best + 1).min(pts.len() - 1)].0;
    let (gx, gv) = golden(&mut f, a, b, opts.tol, opts.max_iter)?;
    let (x, value) = if gv < bv { (gx, gv) } else { (bx, bv) };

    let edge = if x <= opts.lower + opts.tol {
        Edge::Lower
    } else if x >= opts.upper - opts.tol {
        Edge::Upper
    } else {
        Edge::Interior
    };
    Ok(Extremum { x, value, edge })
}

/// Maximizes by minimizing the negated objective.
pub fn maximize<F>(mut f: F, opts: &SearchOptions) -> Result<Extremum>
where
    F: FnMut(f64) -> Result<f64>,
{
    let m = minimize(
        |x| {
            let v = f(x)?;
            // -(+∞) must stay uphill for the minimizer.
            if v == f64::NEG_INFINITY {
                Ok(f64::INFINITY)
            } else {
                Ok(-v)
            }
        },
        opts,
    )?;
    Ok(Extremum {
        value: -m.value,
        ..m
    })
}

fn argmin(pts: &[(f64, f64)]) -> usize {
    let mut best = 0;
    for (i, p) in pts.iter().enumerate() {
        if p.1 < pts[best].1 {
            best = i;
        }
    }
    best
}

/// Golden-section search on `[a, b]`; returns the best point evaluated.
pub fn golden<F>(f: &mut F, mut a: f64, mut b: f64, tol: f64, max_iter: usize) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = checked(f, c)?;
    let mut fd = checked(f, d)?;
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    let mut iter = 0;
    while (b - a).abs() > tol && iter < max_iter {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = checked(f, c)?;
            if fc < best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = checked(f, d)?;
            if fd < best.1 {
                best = (d, fd);
            }
        }
        iter += 1;
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_minimum() {
        let m = minimize(|x| Ok((x - 3.7).powi(2) + 1.0), &SearchOptions::default()).unwrap();
        assert!((m.x - 3.7).abs() < 1e-8);
        assert!((m.value - 1.0).abs() < 1e-15);
        assert_eq!(m.edge, Edge::Interior);
    }

    #[test]
    fn far_minimum_is_reached_by_doubling() {
        let m = minimize(|x| Ok((x + 300.0).abs()), &SearchOptions::default()).unwrap();
        assert!((m.x + 300.0).abs() < 1e-8);
    }

    #[test]
    fn monotone_objective_reports_edge() {
        let m = minimize(|x| Ok(-x), &SearchOptions::default()).unwrap();
        assert_eq!(m.edge, Edge::Upper);
        let m = minimize(Ok, &SearchOptions::default()).unwrap();
        assert_eq!(m.edge, Edge::Lower);
    }

    #[test]
    fn overflow_counts_as_uphill() {
        let m = minimize(
            |x| Ok(if x > 10.0 { f64::INFINITY } else { (x - 2.0).powi(2) }),
            &SearchOptions::default(),
        )
        .unwrap();
        assert!((m.x - 2.0).abs() < 1e-8);
    }

    #[test]
    fn nan_is_an_error() {
        let e = minimize(|_| Ok(f64::NAN), &SearchOptions::default()).unwrap_err();
        assert!(matches!(e, Error::NonFinite { .. }));
    }

    #[test]
    fn maximize_mirrors_minimize() {
        let m = maximize(|x| Ok(-(x * x) + 5.0), &SearchOptions::default()).unwrap();
        assert!((m.value - 5.0).abs() < 1e-15);
    }
}
