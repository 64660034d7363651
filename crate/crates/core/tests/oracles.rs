//! Library results against independent oracles and frozen reference values.

use std::f64::consts::E;

use cks_core::fock::{gaussian_exp_integral, ChaosExpansion, SpaceModel};
use cks_core::growth::{l_function, l_sharp_function, legendre, monotone_envelope, GrowthFunction, ThetaView};
use cks_core::numeric::TruncationPolicy;
use cks_core::sequences::{sequence_equivalence, Direction, WeightSequence};
use num_complex::Complex64;

fn ln_fact(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn legendre_of_exp_at_two() {
    let p = legendre(&GrowthFunction::pure_exp(), 2.0).unwrap();
    assert!(rel(p.log_ell.exp(), 1.847_264_024_732_662) < 1e-10, "{}", p.log_ell.exp());
    assert!((p.r_star - 2.0).abs() < 1e-6);
}

/// Brute-force `min_x [log u(e^x) - t x]` on a dense log grid, then a
/// ternary refinement around the best node.
fn grid_legendre(log_u: impl Fn(f64) -> f64, t: f64) -> f64 {
    let f = |x: f64| log_u(x.exp()) - t * x;
    let (lo, hi) = (1e-8f64.ln(), 1e8f64.ln());
    let n = 200_000;
    let h = (hi - lo) / n as f64;
    let best = (0..=n).min_by(|&i, &j| f(lo + i as f64 * h).total_cmp(&f(lo + j as f64 * h))).unwrap();
    let (mut a, mut b) = (lo + (best as f64 - 1.0) * h, lo + (best as f64 + 1.0) * h);
    for _ in 0..200 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if f(m1) < f(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    f(0.5 * (a + b))
}

#[test]
fn beta_exp_legendre_matches_grid_search() {
    let u = GrowthFunction::beta_exp(0.5).unwrap();
    let want = grid_legendre(|r| 1.5 * r.powf(2.0 / 3.0), 3.0);
    assert!(rel(want, -0.443_755_299_006_494) < 1e-10);
    let got = legendre(&u, 3.0).unwrap().log_ell;
    assert!(rel(got, want) < 1e-8, "{got} vs {want}");
}

#[test]
fn l_series_of_exp_at_one() {
    let policy = TruncationPolicy::default();
    let u = GrowthFunction::pure_exp();
    let oracle: f64 = (0..200).map(|n| if n == 0 { 1.0 } else { (E / n as f64).powi(n) }).sum();
    assert!((oracle - 6.580_400_372_508_843).abs() < 1e-12);
    let got = l_function(&u, 1.0, &policy).unwrap().log_value.exp();
    assert!((got - oracle).abs() < 1e-6, "{got}");

    let oracle_sharp: f64 = (0..200)
        .map(|n| {
            let log_term = if n == 0 { 0.0 } else { n as f64 * (n as f64 / E).ln() };
            (log_term - 2.0 * ln_fact(n)).exp()
        })
        .sum();
    assert!((oracle_sharp - 1.550_414_052_231_529).abs() < 1e-12);
    let got = l_sharp_function(&u, 1.0, &policy).unwrap().log_value.exp();
    assert!(rel(got, oracle_sharp) < 1e-10, "{got}");
}

/// Bell numbers from the Bell triangle, exact in `u128`.
fn bell_triangle(n_max: usize) -> Vec<u128> {
    let mut out = vec![1u128];
    let mut row = vec![1u128];
    for _ in 0..n_max {
        let mut next = vec![*row.last().unwrap()];
        for v in &row {
            let last = *next.last().unwrap();
            next.push(last + v);
        }
        out.push(next[0]);
        row = next;
    }
    out
}

#[test]
fn bell_numbers_match_triangle() {
    let exact = bell_triangle(25);
    assert_eq!(&exact[..8], &[1, 1, 2, 5, 15, 52, 203, 877]);
    assert_eq!(exact[25], 4_638_590_332_229_999_353);
    let seq = WeightSequence::bell(1, 25).unwrap();
    for (n, b) in exact.iter().enumerate() {
        let got = seq.log_alpha(n).unwrap();
        assert!(rel(got.exp(), *b as f64) < 1e-12, "n = {n}: {} vs {b}", got.exp());
    }
}

#[test]
fn hilbert_schmidt_norm_of_embedding() {
    let model = SpaceModel::new(4).unwrap();
    let got = model.hs_norm_sq(2.0, 1.0).unwrap();
    assert!((got - 0.355_902_777_777_777_8).abs() < 1e-14);
    assert!((got - (0.25 + 1.0 / 16.0 + 1.0 / 36.0 + 1.0 / 64.0)).abs() < 1e-15);
}

#[test]
fn gaussian_integral_product() {
    let model = SpaceModel::with_weights(vec![2.0, 4.0]).unwrap();
    let got = gaussian_exp_integral(&model, 1.0, 0.1).unwrap();
    assert!((got - 1.067_521_025_367_247_6).abs() < 1e-12, "{got}");
}

#[test]
fn second_chaos_is_hermite() {
    let one = Complex64::new(1.0, 0.0);
    let h2 = ChaosExpansion::from_kernel_entries(2, 2, [(vec![0, 0], one)]).unwrap();
    for x0 in [-2.0, -0.3, 0.0, 1.5] {
        let x = [Complex64::new(x0, 0.0), Complex64::new(0.7, 0.0)];
        let got = h2.evaluate(&x).unwrap();
        assert!((got - Complex64::new(x0 * x0 - 1.0, 0.0)).norm() < 1e-13);
        assert!((h2.evaluate_hermite(&x).unwrap() - got).norm() < 1e-13);
    }
    // x0 · x0 = :x0²: + 1.
    let h1 = ChaosExpansion::from_kernel_entries(2, 1, [(vec![0], one)]).unwrap();
    let sq = h1.pointwise_product(&h1).unwrap();
    let x = [Complex64::new(1.3, 0.0), Complex64::new(-0.4, 0.0)];
    assert!((sq.evaluate(&x).unwrap() - Complex64::new(1.69, 0.0)).norm() < 1e-13);
}

#[test]
fn renormalized_exponential_evaluates_in_closed_form() {
    let xi = [Complex64::new(0.4, 0.0), Complex64::new(-0.2, 0.0), Complex64::new(0.1, 0.0)];
    let phi = ChaosExpansion::renorm_exp(&xi, 24).unwrap();
    for x in [[0.3, 1.0, -0.5], [-1.2, 0.4, 2.0]] {
        let xs: Vec<Complex64> = x.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        let pair: f64 = x.iter().zip(&xi).map(|(a, b)| a * b.re).sum();
        let sq: f64 = xi.iter().map(|b| b.re * b.re).sum();
        let want = (pair - 0.5 * sq).exp();
        let got = phi.evaluate_hermite(&xs).unwrap();
        assert!(rel(got.re, want) < 1e-12 && got.im.abs() < 1e-14, "{got} vs {want}");
    }
}

#[test]
fn generating_functions_of_simple_sequences() {
    let ones = WeightSequence::ones();
    for dir in [Direction::GAlpha, Direction::GInvAlpha] {
        let got = ones.generating_function(dir, 1.0).unwrap().log_value;
        assert!((got - 1.0).abs() < 1e-13);
    }
    // G_{1/α} of the sequence of e^r is L_{e^r}.
    let u = GrowthFunction::pure_exp();
    let seq = WeightSequence::from_growth(&u);
    let policy = TruncationPolicy::default();
    let g = seq.generating_function(Direction::GInvAlpha, 1.0).unwrap().log_value;
    let l = l_function(&u, 1.0, &policy).unwrap().log_value;
    assert!((g - l).abs() < 1e-12 * l.abs().max(1.0), "{g} vs {l}");
    // α_{e^r}(n) = nⁿ / (n! eⁿ).
    for n in 1..20 {
        let want = n as f64 * (n as f64).ln() - ln_fact(n) - n as f64;
        assert!((seq.log_alpha(n).unwrap() - want).abs() < 1e-9 * want.abs().max(1.0));
    }
}

#[test]
fn theta_of_beta_exp() {
    let beta = 0.5;
    let theta = ThetaView::from_growth(&GrowthFunction::beta_exp(beta).unwrap());
    for t in [0.5f64, 1.0, 3.0, 10.0] {
        // ½ (1+β) (t²)^{1/(1+β)}.
        let want = 0.5 * (1.0 + beta) * (t * t).powf(1.0 / (1.0 + beta));
        assert!(rel(theta.eval(t), want) < 1e-13);
    }
}

#[test]
fn monotone_envelope_flattens_initial_dip() {
    let u = GrowthFunction::custom("bump", Default::default(), |r| (r - 1.0) * (r - 1.0));
    let v = monotone_envelope(&u).unwrap();
    for r in [0.0, 0.25, 0.5, 0.99] {
        assert!(v.log_eval(r).unwrap().abs() < 1e-9, "r = {r}");
    }
    for r in [1.5, 2.0, 4.0] {
        assert!((v.log_eval(r).unwrap() - u.log_eval(r).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn factorial_power_and_its_growth_function_are_equivalent() {
    let a = WeightSequence::factorial_power(0.5);
    let b = WeightSequence::from_growth(&GrowthFunction::beta_exp(0.5).unwrap());
    assert!(sequence_equivalence(&a, &b, 60).unwrap().is_certificate());
    let bell = WeightSequence::bell(2, 60).unwrap();
    assert!(!sequence_equivalence(&WeightSequence::ones(), &bell, 60).unwrap().is_certificate());
}
