use crate::error::{Error, Result};
use crate::growth::log_iterated_exp;
use crate::numeric::{ln_factorial, LogSumExp};

/// Largest supported order: `exp_{k+1}(0)` must stay finite.
pub const BELL_MAX_K: u32 = 3;
pub const BELL_MAX_N: usize = 400;

/// Terms always computed, so that the recomposition check is meaningful for
/// short requests too.
const MIN_TERMS: usize = 48;
const RESIDUAL_POINTS: [f64; 2] = [0.02, 0.05];
const RESIDUAL_LIMIT: f64 = 1e-12;

/// `log c_n` for `exp_{k+1}(x) / exp_{k+1}(0) = Σ c_n xⁿ`, `n ≤ n_max`.
///
/// Built by composing `P_{j+1} = exp(exp_j(0) · (P_j - 1))` from `P_1 = eˣ`,
/// every coefficient positive so the log-domain recursion never cancels.
pub fn bell_log_coefficients(k: u32, n_max: usize) -> Result<Vec<f64>> {
    if k == 0 || k > BELL_MAX_K {
        return Err(Error::InvalidArgument(format!("Bell order must be in 1..={BELL_MAX_K}, got {k}")));
    }
    if n_max > BELL_MAX_N {
        return Err(Error::InvalidArgument(format!("Bell index limited to {BELL_MAX_N}, got {n_max}")));
    }
    let len = n_max.max(MIN_TERMS) + 1;
    let mut c: Vec<f64> = (0..len).map(|n| -ln_factorial(n)).collect();
    // ln exp_j(0) = exp_{j-1}(0)
    let mut ln_base = 0.0_f64;
    for j in 1..=k {
        if j > 1 {
            ln_base = ln_base.exp();
        }
        let a: Vec<f64> = c.iter().map(|v| v + ln_base).collect();
        c = exp_series(&a);
    }
    residual_check(k, &c)?;
    c.truncate(n_max + 1);
    Ok(c)
}

/// `log b_k(n) = log c_n + log n!`.
pub(crate) fn bell_log_numbers(k: u32, n_max: usize) -> Result<Vec<f64>> {
    Ok(bell_log_coefficients(k, n_max)?
        .into_iter()
        .enumerate()
        .map(|(n, c)| c + ln_factorial(n))
        .collect())
}

/// Coefficients of `exp(A)` for `A = Σ_{n ≥ 1} a_n xⁿ` (the `n = 0` entry is
/// ignored), from `n b_n = Σ_m m a_m b_{n-m}`.
fn exp_series(log_a: &[f64]) -> Vec<f64> {
    let mut b = vec![0.0; log_a.len()];
    for n in 1..log_a.len() {
        let mut acc = LogSumExp::default();
        for m in 1..=n {
            acc.add((m as f64).ln() + log_a[m] + b[n - m]);
        }
        b[n] = acc.value() - (n as f64).ln();
    }
    b
}

fn residual_check(k: u32, log_c: &[f64]) -> Result<()> {
    for x in RESIDUAL_POINTS {
        let mut acc = LogSumExp::default();
        for (n, c) in log_c.iter().enumerate() {
            acc.add(c + n as f64 * x.ln());
        }
        let exact = log_iterated_exp(k + 1, x);
        let residual = (acc.value() - exact).abs();
        if !(residual <= RESIDUAL_LIMIT) {
            return Err(Error::PrecisionLoss {
                residual,
                limit: RESIDUAL_LIMIT,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_bell_numbers() {
        let b = bell_log_numbers(1, 10).unwrap();
        let expect = [1u64, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975];
        for (l, e) in b.iter().zip(expect) {
            assert!((l.exp() - e as f64).abs() < 1e-9 * e as f64);
        }
    }

    #[test]
    fn second_order_start() {
        // exp(e(e^{e^x - 1} - 1)): 1, e, e(1+e)... checked against direct expansion.
        let b = bell_log_numbers(2, 2).unwrap();
        let e = std::f64::consts::E;
        assert!(b[0].abs() < 1e-15);
        assert!((b[1].exp() - e).abs() < 1e-12);
        assert!((b[2].exp() - (e * e + 2.0 * e)).abs() < 1e-11);
    }

    #[test]
    fn orders_and_lengths_are_validated() {
        assert!(bell_log_coefficients(0, 5).is_err());
        assert!(bell_log_coefficients(4, 5).is_err());
        assert!(bell_log_coefficients(1, BELL_MAX_N + 1).is_err());
        assert_eq!(bell_log_coefficients(3, 5).unwrap().len(), 6);
    }
}
