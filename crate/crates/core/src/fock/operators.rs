//! Differentiation, translation, scaling and Fourier-Gauss transforms.
//!
//! Apart from `D_y`, each operator acts mode by mode on the exponent vector,
//! so it is a tensor product of one-mode maps `k ↦ Σ w_m x^m`.

use num_complex::Complex64;

use super::expansion::{poly_add, total, ChaosExpansion, Exponent, Poly, DEGREE_CAP};
use crate::error::{Error, Result};
use crate::numeric::{ln_binomial, ln_factorial};

type ModeMap<'a> = dyn Fn(usize, u8) -> Vec<(u8, Complex64)> + 'a;

fn tensor_map(d: usize, p: &Poly, f: &ModeMap<'_>) -> Poly {
    let mut out = Poly::new();
    for (k, c) in p {
        let mut terms: Vec<(Exponent, Complex64)> = vec![(Vec::with_capacity(d), *c)];
        for (j, &kj) in k.iter().enumerate() {
            let images = f(j, kj);
            let mut next = Vec::with_capacity(terms.len() * images.len());
            for (e, w) in &terms {
                for (m, v) in &images {
                    let mut ee = e.clone();
                    ee.push(*m);
                    next.push((ee, w * v));
                }
            }
            terms = next;
        }
        for (e, w) in terms {
            poly_add(&mut out, e, w);
        }
    }
    out
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `He_n = Σ_r (-1)^r n!/(r!(n-2r)! 2^r) x^{n-2r}`.
fn hermite_to_monomial_1d(n: u8) -> Vec<(u8, Complex64)> {
    let n = n as usize;
    (0..=n / 2)
        .map(|r| {
            let w = (ln_factorial(n) - ln_factorial(r) - ln_factorial(n - 2 * r) - r as f64 * std::f64::consts::LN_2).exp();
            ((n - 2 * r) as u8, real(if r % 2 == 0 { w } else { -w }))
        })
        .collect()
}

/// `x^n = Σ_r n!/(r!(n-2r)! 2^r) He_{n-2r}`.
fn monomial_to_hermite_1d(n: u8) -> Vec<(u8, Complex64)> {
    let n = n as usize;
    (0..=n / 2)
        .map(|r| {
            let w = (ln_factorial(n) - ln_factorial(r) - ln_factorial(n - 2 * r) - r as f64 * std::f64::consts::LN_2).exp();
            ((n - 2 * r) as u8, real(w))
        })
        .collect()
}

/// Plain-monomial coefficients: `φ(x) = Σ m_k x^k`.
pub fn to_monomials(phi: &ChaosExpansion) -> Poly {
    tensor_map(phi.d(), phi.poly(), &|_, k| hermite_to_monomial_1d(k))
}

pub fn from_monomials(d: usize, degree: usize, m: &Poly) -> Result<ChaosExpansion> {
    ChaosExpansion::from_poly(d, degree, tensor_map(d, m, &|_, k| monomial_to_hermite_1d(k)))
}

fn check_vector(phi: &ChaosExpansion, y: &[Complex64]) -> Result<()> {
    if y.len() != phi.d() {
        return Err(Error::DimensionMismatch {
            expected: phi.d(),
            found: y.len(),
        });
    }
    if y.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::InvalidArgument("operator parameter must be finite".into()));
    }
    Ok(())
}

/// `D_y`: `g_n = (n+1) f_{n+1}⌟y`, the directional derivative along `y`.
pub fn diff_op(y: &[Complex64], phi: &ChaosExpansion) -> Result<ChaosExpansion> {
    check_vector(phi, y)?;
    let mut out = Poly::new();
    for (k, c) in phi.poly() {
        for (j, &kj) in k.iter().enumerate() {
            if kj == 0 {
                continue;
            }
            let mut k1 = k.clone();
            k1[j] -= 1;
            poly_add(&mut out, k1, c * y[j] * kj as f64);
        }
    }
    ChaosExpansion::from_poly(phi.d(), phi.degree().saturating_sub(1), out)
}

/// `T_y`: `(T_y φ)(x) = φ(x + y)`, from `He_n(x+y) = Σ C(n,m) y^{n-m} He_m(x)`.
pub fn translation(y: &[Complex64], phi: &ChaosExpansion) -> Result<ChaosExpansion> {
    check_vector(phi, y)?;
    let out = tensor_map(phi.d(), phi.poly(), &|j, k| {
        (0..=k)
            .map(|m| (m, y[j].powu((k - m) as u32) * ln_binomial(k as usize, m as usize).exp()))
            .collect()
    });
    ChaosExpansion::from_poly(phi.d(), phi.degree(), out)
}

/// `S_z`: `(S_z φ)(x) = φ(z x)`.
pub fn scaling(z: Complex64, phi: &ChaosExpansion) -> Result<ChaosExpansion> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidArgument("scale must be finite".into()));
    }
    let m = to_monomials(phi);
    let scaled: Poly = m.into_iter().map(|(k, c)| (k.clone(), c * z.powu(total(&k) as u32))).collect();
    from_monomials(phi.d(), phi.degree(), &scaled)
}

/// `E[y^s]` for a standard Gaussian: `(s-1)!!` for even `s`.
fn gaussian_moment(s: usize) -> f64 {
    if s % 2 == 1 {
        0.0
    } else {
        (ln_factorial(s) - ln_factorial(s / 2) - (s / 2) as f64 * std::f64::consts::LN_2).exp()
    }
}

/// `G_{a,b}`: `(G_{a,b} φ)(x) = ∫ φ(a y + b x) dμ(y)`, expanding `(a y + b x)^k`
/// binomially and integrating each power of `y` exactly.
pub fn fourier_gauss(a: Complex64, b: Complex64, phi: &ChaosExpansion) -> Result<ChaosExpansion> {
    if !(a.re.is_finite() && a.im.is_finite() && b.re.is_finite() && b.im.is_finite()) {
        return Err(Error::InvalidArgument("Fourier-Gauss parameters must be finite".into()));
    }
    let m = to_monomials(phi);
    let integrated = tensor_map(phi.d(), &m, &|_, k| {
        let k = k as usize;
        (0..=k)
            .step_by(2)
            .map(|s| {
                let w = ln_binomial(k, s).exp() * gaussian_moment(s);
                ((k - s) as u8, a.powu(s as u32) * b.powu((k - s) as u32) * w)
            })
            .collect()
    });
    from_monomials(phi.d(), phi.degree(), &integrated)
}

/// `Θ = G_{i,1}`, taking `e^{⟨·,ξ⟩}` to `:e^{⟨·,ξ⟩}:`.
pub fn theta(phi: &ChaosExpansion) -> Result<ChaosExpansion> {
    fourier_gauss(Complex64::new(0.0, 1.0), Complex64::new(1.0, 0.0), phi)
}

/// Plain exponential `e^{⟨·,ξ⟩}` truncated at degree `n`, in chaos form.
pub fn plain_exp(xi: &[Complex64], n: usize) -> Result<ChaosExpansion> {
    if n > DEGREE_CAP {
        return Err(Error::DegreeCapExceeded { degree: n, cap: DEGREE_CAP });
    }
    let d = xi.len();
    let e = ChaosExpansion::renorm_exp(xi, n)?;
    // Same coefficients ξ^k/k!, read as plain monomials.
    from_monomials(d, n, e.poly())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::model::{bilinear, real_vector, SpaceModel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    #[test]
    fn monomial_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let phi = ChaosExpansion::random(3, 6, 1.0, &mut rng).unwrap();
        let back = from_monomials(3, 6, &to_monomials(&phi)).unwrap();
        assert!(phi.max_rel_diff(&back) < 1e-12);
    }

    #[test]
    fn derivative_of_exponential_vector() {
        let xi = vec![Complex64::new(0.5, 0.2), Complex64::new(-0.3, 0.0)];
        let y = vec![Complex64::new(1.0, -1.0), Complex64::new(2.0, 0.5)];
        let phi = ChaosExpansion::renorm_exp(&xi, 12).unwrap();
        let d = diff_op(&y, &phi).unwrap();
        let expect = phi.truncate(11).scale(bilinear(&y, &xi));
        assert!(d.max_rel_diff(&expect) < 1e-13);
    }

    #[test]
    fn operators_match_pointwise_definitions() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = SpaceModel::new(3).unwrap();
        let phi = ChaosExpansion::random(3, 4, 1.0, &mut rng).unwrap();
        let y = m.sample_vector(&mut rng, 0.0, 1.0);
        let z = Complex64::new(0.7, -0.4);
        let t = translation(&y, &phi).unwrap();
        let s = scaling(z, &phi).unwrap();
        for _ in 0..10 {
            let x = m.sample_vector(&mut rng, 0.0, 1.0);
            let xy: Vec<Complex64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            let zx: Vec<Complex64> = x.iter().map(|a| a * z).collect();
            assert!(rel(t.evaluate(&x).unwrap(), phi.evaluate(&xy).unwrap()) < 1e-10);
            assert!(rel(s.evaluate(&x).unwrap(), phi.evaluate(&zx).unwrap()) < 1e-10);
        }
    }

    #[test]
    fn gauss_transform_at_one_one_is_s_transform() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let phi = ChaosExpansion::random(2, 5, 1.0, &mut rng).unwrap();
        let g = fourier_gauss(real(1.0), real(1.0), &phi).unwrap();
        for xi in [[0.3, -1.2], [2.0, 0.5]] {
            let xi = real_vector(&xi);
            assert!(rel(g.evaluate(&xi).unwrap(), phi.s_transform(&xi).unwrap()) < 1e-10);
        }
        let id = fourier_gauss(real(0.0), real(1.0), &phi).unwrap();
        assert!(id.max_rel_diff(&phi) < 1e-13);
    }

    #[test]
    fn theta_renormalizes_exponentials() {
        let xi = vec![Complex64::new(0.4, 0.1), Complex64::new(-0.6, 0.3)];
        let wick = ChaosExpansion::renorm_exp(&xi, 10).unwrap();
        // Low degrees of Θ applied to a long truncation converge to the target.
        let long = theta(&plain_exp(&xi, 40).unwrap()).unwrap().truncate(10);
        assert!(long.max_rel_diff(&wick) < 1e-12);
    }
}
