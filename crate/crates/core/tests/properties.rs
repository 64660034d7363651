use cks_core::fock::ChaosExpansion;
use cks_core::growth::{dual_legendre, legendre, GrowthFunction};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn legendre_is_log_concave(beta in -0.9f64..0.9, n in 2usize..40) {
        let u = GrowthFunction::beta_exp(beta).unwrap();
        let l = |k: usize| u.log_ell_n(k).unwrap();
        prop_assert!(l(n - 1) + l(n + 1) <= 2.0 * l(n) + 1e-9 * l(n).abs().max(1.0));
    }

    #[test]
    fn legendre_scales_with_argument(beta in -0.5f64..0.5, c in 0.2f64..5.0, t in 0.5f64..20.0) {
        let u = GrowthFunction::beta_exp(beta).unwrap();
        let inner = u.clone();
        let scaled = GrowthFunction::custom("scaled", Default::default(), move |r| inner.log_eval(c * r).unwrap());
        let got = legendre(&scaled, t).unwrap().log_ell;
        let want = legendre(&u, t).unwrap().log_ell + t * c.ln();
        prop_assert!(close(got, want, 1e-8), "{got} vs {want}");
    }

    #[test]
    fn dual_legendre_identity(beta in -0.5f64..0.5, t in 0.5f64..30.0) {
        let u = GrowthFunction::beta_exp(beta).unwrap();
        let dual = GrowthFunction::dual_of(&u);
        let lhs = legendre(&dual, t).unwrap().log_ell + legendre(&u, t).unwrap().log_ell;
        let want = 2.0 * t - 2.0 * t * t.ln();
        prop_assert!(close(lhs, want, 1e-6), "{lhs} vs {want}");
    }

    #[test]
    fn dual_is_an_involution(beta in -0.5f64..0.5, r in 0.5f64..50.0) {
        let u = GrowthFunction::beta_exp(beta).unwrap();
        let twice = dual_legendre(&GrowthFunction::dual_of(&u), r).unwrap().log_value;
        let want = u.log_eval(r).unwrap();
        prop_assert!(close(twice, want, 1e-5), "{twice} vs {want}");
    }

    #[test]
    fn wick_product_multiplies_s_transforms(seed in any::<u64>(), re in -1.0f64..1.0, im in -1.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = ChaosExpansion::random(2, 3, 1.0, &mut rng).unwrap();
        let g = ChaosExpansion::random(2, 3, 1.0, &mut rng).unwrap();
        let xi = [Complex64::new(re, im), Complex64::new(im, -re)];
        let got = f.wick_product(&g).unwrap().s_transform(&xi).unwrap();
        let want = f.s_transform(&xi).unwrap() * g.s_transform(&xi).unwrap();
        prop_assert!((got - want).norm() <= 1e-10 * want.norm().max(1.0), "{got} vs {want}");
    }
}
