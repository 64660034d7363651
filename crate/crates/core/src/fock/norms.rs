use std::fmt;

use super::expansion::ChaosExpansion;
use super::model::SpaceModel;
use crate::error::{Error, Result};
use crate::growth::GrowthFunction;
use crate::numeric::ln_factorial;
use crate::sequences::WeightSequence;

/// Degree weights for the Fock norms. Variants marked dual evaluate kernels
/// in `|·|_{-p}`, the others in `|·|_p`.
#[derive(Clone)]
pub enum Weight {
    /// `‖φ‖²_{p,α} = Σ n! α(n) |f_n|²_p`.
    Alpha(WeightSequence),
    /// `‖Φ‖²_{-p,1/α} = Σ n!/α(n) |f_n|²_{-p}` (dual).
    InvAlpha(WeightSequence),
    /// `‖φ‖²_{p,u} = Σ |f_n|²_p / ℓ_u(n)`.
    U(GrowthFunction),
    /// `‖Φ‖²_{-p,(u)} = Σ ℓ_u(n) (n!)² |f_n|²_{-p}` (dual).
    UParen(GrowthFunction),
    /// `‖Φ‖²_{-p,u*} = Σ |f_n|²_{-p} / ℓ_{u*}(n)` (dual); holds `u*` itself.
    UStar(GrowthFunction),
    /// `‖φ‖²_{p,(u*)} = Σ ℓ_{u*}(n) (n!)² |f_n|²_p`; holds `u*` itself.
    UStarParen(GrowthFunction),
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Alpha(s) => write!(f, "Alpha({})", s.name()),
            Weight::InvAlpha(s) => write!(f, "InvAlpha({})", s.name()),
            Weight::U(u) => write!(f, "U({})", u.name()),
            Weight::UParen(u) => write!(f, "UParen({})", u.name()),
            Weight::UStar(u) => write!(f, "UStar({})", u.name()),
            Weight::UStarParen(u) => write!(f, "UStarParen({})", u.name()),
        }
    }
}

impl Weight {
    /// `‖·‖_{-p,u*}` for `u`; keep the returned value to reuse its cache.
    pub fn u_star(u: &GrowthFunction) -> Self {
        Weight::UStar(GrowthFunction::dual_of(u))
    }

    pub fn u_star_paren(u: &GrowthFunction) -> Self {
        Weight::UStarParen(GrowthFunction::dual_of(u))
    }

    pub fn is_dual(&self) -> bool {
        matches!(self, Weight::InvAlpha(_) | Weight::UParen(_) | Weight::UStar(_))
    }

    /// Log of the factor multiplying `|f_n|²`.
    pub fn log_factor(&self, n: usize) -> Result<f64> {
        let unavailable = |e: Error| Error::WeightUnavailable(format!("{self:?} at n = {n}: {e}"));
        let nf = ln_factorial(n);
        Ok(match self {
            Weight::Alpha(s) => nf + s.log_alpha(n).map_err(unavailable)?,
            Weight::InvAlpha(s) => nf - s.log_alpha(n).map_err(unavailable)?,
            Weight::U(u) | Weight::UStar(u) => -u.log_ell_n(n).map_err(unavailable)?,
            Weight::UParen(u) | Weight::UStarParen(u) => u.log_ell_n(n).map_err(unavailable)? + 2.0 * nf,
        })
    }
}

/// The weighted norm of `phi` at grade `p ≥ 0`.
pub fn norm(phi: &ChaosExpansion, model: &SpaceModel, p: f64, weight: &Weight) -> Result<f64> {
    let grade = if weight.is_dual() { -p } else { p };
    let kn = phi.kernel_norms_sq(model, grade)?;
    let mut sum = 0.0;
    for (n, k) in kn.iter().enumerate() {
        if *k == 0.0 {
            continue;
        }
        sum += k * weight.log_factor(n)?.exp();
    }
    Ok(sum.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::model::real_vector;
    use num_complex::Complex64;

    #[test]
    fn constant_has_unit_norm() {
        let m = SpaceModel::new(2).unwrap();
        let one = ChaosExpansion::constant(2, Complex64::new(1.0, 0.0)).unwrap();
        for w in [
            Weight::Alpha(WeightSequence::ones()),
            Weight::U(GrowthFunction::pure_exp()),
            Weight::UParen(GrowthFunction::pure_exp()),
        ] {
            assert!((norm(&one, &m, 1.3, &w).unwrap() - 1.0).abs() < 1e-12, "{w:?}");
        }
    }

    #[test]
    fn exponential_vector_gives_generating_partial_sum() {
        let m = SpaceModel::new(2).unwrap();
        let xi = real_vector(&[0.4, -0.1]);
        let seq = WeightSequence::factorial_power(0.5);
        let phi = ChaosExpansion::renorm_exp(&xi, 40).unwrap();
        let r = m.norm_sq(&xi, 1.0);
        let partial = seq.partial_sums(crate::sequences::Direction::GAlpha, r, 40).unwrap()[40];
        let got = norm(&phi, &m, 1.0, &Weight::Alpha(seq)).unwrap();
        assert!((got.ln() - 0.5 * partial).abs() < 1e-12);
    }
}
