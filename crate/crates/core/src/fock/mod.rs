//! A finite-mode model of the Gaussian space: symmetric chaos kernels,
//! weighted Fock norms, transforms, products and operators.

mod characterization;
mod expansion;
mod gaussian;
mod intrinsic;
mod model;
mod norms;
mod operators;

pub use characterization::{
    exponential_certificate, hs_gap_for, verify_characterization, CharacterizationDirection, CharacterizationParams,
};
pub use expansion::{
    exponent_from_index, exponents, hermite_table, index_from_exponent, ln_multiplicity, total, ChaosExpansion,
    Evaluator, Exponent, DEGREE_CAP,
};
pub use gaussian::{
    gaussian_exp_integral, gaussian_exp_integral_mc, hida_check, l_pq, monte_carlo_mean, GaussianMeasureSpec,
    HidaCheck,
};
pub use intrinsic::{intrinsic_norm_estimate, log_exponential_sup, log_ratio, IntrinsicEstimate, SearchBudget};
pub use model::{bilinear, real_vector, SpaceModel, Vector, MAX_MODES};
pub use norms::{norm, Weight};
pub use operators::{diff_op, fourier_gauss, from_monomials, plain_exp, scaling, theta, to_monomials, translation};
