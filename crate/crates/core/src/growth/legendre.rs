use serde::{Deserialize, Serialize};

use super::GrowthFunction;
use crate::error::{Error, Result};
use crate::numeric::{ln_factorial, power_series, SeriesSum, TruncationPolicy};
use crate::scalar::{maximize, minimize, Edge, SearchOptions, X_MIN};

/// Smallest minimizer reported when the infimum escapes to `r → 0⁺`.
pub const R_STAR_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegendrePoint {
    pub log_ell: f64,
    pub r_star: f64,
    /// The infimum was approached at `r → 0⁺` and `r_star` was clamped.
    pub at_boundary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualPoint {
    pub log_value: f64,
    pub s_star: f64,
}

/// `log ℓ_u(t) = min_x [log u(e^x) - t x]`.
pub fn legendre(u: &GrowthFunction, t: f64) -> Result<LegendrePoint> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("Legendre order t = {t} must be >= 0")));
    }
    let opts = SearchOptions {
        x0: if t > 1.0 { t.ln() } else { 0.0 },
        ..SearchOptions::default()
    };
    let m = minimize(|x| Ok(u.log_eval(x.exp())? - t * x), &opts)?;
    match m.edge {
        Edge::Upper => Err(Error::BracketFailure { x: m.x }),
        Edge::Lower => Ok(LegendrePoint {
            log_ell: m.value,
            r_star: R_STAR_FLOOR,
            at_boundary: true,
        }),
        Edge::Interior => Ok(LegendrePoint {
            log_ell: m.value,
            r_star: m.x.exp(),
            at_boundary: false,
        }),
    }
}

/// `log u*(r) = max_{s ≥ 0} [2√(rs) - log u(s)]`.
pub fn dual_legendre(u: &GrowthFunction, r: f64) -> Result<DualPoint> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!("dual Legendre argument r = {r} must be >= 0")));
    }
    let at_zero = -u.log_eval(0.0)?;
    let sqrt_r = r.sqrt();
    let opts = SearchOptions {
        x0: if r > 0.0 { r.ln().clamp(X_MIN, 50.0) } else { 0.0 },
        ..SearchOptions::default()
    };
    let m = maximize(
        |y| {
            let lu = u.log_eval(y.exp())?;
            Ok(2.0 * sqrt_r * (0.5 * y).exp() - lu)
        },
        &opts,
    )?;
    if m.edge == Edge::Upper {
        return Err(Error::UnboundedObjective { x: m.x });
    }
    if at_zero >= m.value || m.edge == Edge::Lower {
        return Ok(DualPoint {
            log_value: at_zero.max(m.value),
            s_star: 0.0,
        });
    }
    Ok(DualPoint {
        log_value: m.value,
        s_star: m.x.exp(),
    })
}

/// `L_u(r) = Σ ℓ_u(n) rⁿ`, tail-certified.
pub fn l_function(u: &GrowthFunction, r: f64, policy: &TruncationPolicy) -> Result<SeriesSum> {
    power_series(|n| u.log_ell_n(n), r, policy)
}

/// `L#_u(r) = Σ rⁿ / (ℓ_u(n) (n!)²)`, tail-certified.
pub fn l_sharp_function(u: &GrowthFunction, r: f64, policy: &TruncationPolicy) -> Result<SeriesSum> {
    power_series(|n| Ok(-u.log_ell_n(n)? - 2.0 * ln_factorial(n)), r, policy)
}

/// Sampled Legendre transform with its minimizers.
#[derive(Debug, Clone, Serialize)]
pub struct LegendreTable {
    pub source: String,
    pub values: Vec<(f64, f64)>,
    pub argmin_witnesses: Vec<f64>,
}

pub fn legendre_table(u: &GrowthFunction, ts: &[f64]) -> Result<LegendreTable> {
    let mut values = Vec::with_capacity(ts.len());
    let mut argmin_witnesses = Vec::with_capacity(ts.len());
    for &t in ts {
        let p = if t.fract() == 0.0 && t < 1e6 {
            u.ell_n(t as usize)?
        } else {
            legendre(u, t)?
        };
        values.push((t, p.log_ell));
        argmin_witnesses.push(p.r_star);
    }
    Ok(LegendreTable {
        source: u.name(),
        values,
        argmin_witnesses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_legendre_closed_form() {
        let u = GrowthFunction::pure_exp();
        let p = legendre(&u, 2.0).unwrap();
        assert!((p.log_ell.exp() - 1.847_264_024_732_662).abs() < 1e-12);
        assert!((p.r_star - 2.0).abs() < 1e-6);
        let z = legendre(&u, 0.0).unwrap();
        assert!(z.at_boundary);
        assert!(z.log_ell.abs() < 1e-12);
    }

    #[test]
    fn legendre_is_scale_covariant() {
        let u = GrowthFunction::beta_exp(0.5).unwrap();
        let v = u.scaled(7.5);
        for t in [0.5, 3.0, 11.0] {
            let a = legendre(&u, t).unwrap().log_ell;
            let b = legendre(&v, t).unwrap().log_ell;
            assert!((b - a - 7.5f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn exp_is_self_dual() {
        let u = GrowthFunction::pure_exp();
        for r in [0.0, 0.01, 1.0, 7.0, 100.0] {
            let d = dual_legendre(&u, r).unwrap();
            assert!((d.log_value - r).abs() < 1e-12 * (1.0 + r), "r = {r}");
            assert!((d.s_star - r).abs() < 1e-5 * (1.0 + r));
        }
    }

    #[test]
    fn dual_at_zero_is_reciprocal_infimum() {
        let u = GrowthFunction::beta_exp(0.3).unwrap().scaled(2.0);
        let d = dual_legendre(&u, 0.0).unwrap();
        assert!((d.log_value + 2f64.ln()).abs() < 1e-14);
        assert_eq!(d.s_star, 0.0);
    }

    #[test]
    fn subquadratic_dual_is_unbounded() {
        // log u = √r/2 grows too slowly: 2√(rs) - √s/2 is unbounded.
        let u = GrowthFunction::custom("half-sqrt", Default::default(), |r| 0.5 * r.sqrt());
        assert!(matches!(dual_legendre(&u, 1.0), Err(Error::UnboundedObjective { .. })));
    }

    #[test]
    fn polynomial_has_no_legendre_bracket() {
        let u = GrowthFunction::custom("cubic", Default::default(), |r| 3.0 * (1.0 + r).ln());
        assert!(matches!(legendre(&u, 5.0), Err(Error::BracketFailure { .. })));
    }

    #[test]
    fn l_function_of_exp_at_zero_and_one() {
        let u = GrowthFunction::pure_exp();
        let p = TruncationPolicy::default();
        assert_eq!(l_function(&u, 0.0, &p).unwrap().value(), 1.0);
        let s = l_sharp_function(&u, 0.0, &p).unwrap();
        assert!((s.value() - 1.0).abs() < 1e-12);
    }
}
