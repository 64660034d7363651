use super::{Flags, GrowthFunction, LogFn};
use crate::error::Result;
use crate::scalar::{maximize, Edge, SearchOptions, X_MAX};

use std::sync::Arc;

/// `θ(t) = ½ log u(t²)`, the convention in which `u` and `u*` become an
/// ordinary convex-conjugate pair.
#[derive(Clone)]
pub struct ThetaView {
    theta: LogFn,
}

impl ThetaView {
    pub fn from_growth(u: &GrowthFunction) -> Self {
        let u = u.clone();
        ThetaView {
            theta: Arc::new(move |t: f64| {
                let r = t * t;
                if r.is_infinite() {
                    return f64::INFINITY;
                }
                0.5 * u.log_eval(r).unwrap_or(f64::NAN)
            }),
        }
    }

    pub fn from_fn(theta: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        ThetaView { theta: Arc::new(theta) }
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.theta)(t)
    }

    /// `θ*(s) = sup_{t ≥ 0} [s t - θ(t)]` with the maximizer.
    pub fn dual(&self, s: f64) -> Result<(f64, f64)> {
        let at_zero = -self.eval(0.0);
        let m = maximize(
            |x| {
                let t = x.exp();
                let th = self.eval(t);
                Ok(if th == f64::INFINITY { f64::NEG_INFINITY } else { s * t - th })
            },
            // t² must stay inside double range.
            &SearchOptions {
                upper: 0.5 * X_MAX,
                ..SearchOptions::default()
            },
        )?;
        if m.edge == Edge::Upper {
            return Err(crate::Error::UnboundedObjective { x: m.x });
        }
        if at_zero >= m.value {
            Ok((at_zero, 0.0))
        } else {
            Ok((m.value, m.x.exp()))
        }
    }

    /// Back to a growth function: `log u(r) = 2 θ(√r)`.
    pub fn to_growth(&self, name: &str, flags: Flags) -> GrowthFunction {
        let th = self.theta.clone();
        GrowthFunction::custom(name, flags, move |r| 2.0 * th(r.sqrt()))
    }
}
