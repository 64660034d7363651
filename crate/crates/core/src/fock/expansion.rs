//! Finite chaos expansions `φ = Σ_n ⟨:x^{⊗n}:, f_n⟩`.
//!
//! A symmetric kernel `f_n` is determined by its entries on nondecreasing
//! multi-indices, which we key by exponent vector `k` (`k_j` = number of
//! occurrences of mode `j`, `|k| = n`). Internally each entry is stored as
//! `c_k = mult(k) f_k` with `mult(k) = n!/Π k_j!`, so that
//! `⟨f_n, ξ^{⊗n}⟩ = Σ_{|k|=n} c_k ξ^k` and `⟨:x^{⊗n}:, f_n⟩ = Σ c_k Π He_{k_j}(x_j)`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::model::{SpaceModel, MAX_MODES};
use crate::error::{Error, Result};
use crate::numeric::ln_factorial;

/// Largest total degree an expansion may carry.
pub const DEGREE_CAP: usize = 64;

pub type Exponent = Vec<u8>;
pub(crate) type Poly = BTreeMap<Exponent, Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
/// Bound on the number of stored entries for generated expansions.
const MAX_TERMS: f64 = 2.0e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExpansionDoc", into = "ExpansionDoc")]
pub struct ChaosExpansion {
    d: usize,
    degree: usize,
    coef: Poly,
}

pub fn total(k: &[u8]) -> usize {
    k.iter().map(|&v| v as usize).sum()
}

/// `log mult(k) = log n! - Σ log k_j!`.
pub fn ln_multiplicity(k: &[u8]) -> f64 {
    ln_factorial(total(k)) - k.iter().map(|&v| ln_factorial(v as usize)).sum::<f64>()
}

fn ln_k_factorial(k: &[u8]) -> f64 {
    k.iter().map(|&v| ln_factorial(v as usize)).sum()
}

/// Exponent vectors of total degree `n` in `d` modes, lexicographic.
pub fn exponents(d: usize, n: usize) -> Vec<Exponent> {
    fn rec(d: usize, left: usize, cur: &mut Exponent, out: &mut Vec<Exponent>) {
        if cur.len() + 1 == d {
            cur.push(left as u8);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for v in (0..=left).rev() {
            cur.push(v as u8);
            rec(d, left - v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, n, &mut Vec::with_capacity(d), &mut out);
    out
}

pub fn exponent_from_index(d: usize, index: &[usize]) -> Result<Exponent> {
    let mut k = vec![0u8; d];
    for &i in index {
        if i >= d {
            return Err(Error::DimensionMismatch { expected: d, found: i + 1 });
        }
        k[i] += 1;
    }
    Ok(k)
}

/// The nondecreasing multi-index with exponent `k`.
pub fn index_from_exponent(k: &[u8]) -> Vec<usize> {
    k.iter().enumerate().flat_map(|(j, &v)| std::iter::repeat_n(j, v as usize)).collect()
}

fn check_degree(degree: usize) -> Result<()> {
    if degree > DEGREE_CAP {
        return Err(Error::DegreeCapExceeded {
            degree,
            cap: DEGREE_CAP,
        });
    }
    Ok(())
}

fn check_d(d: usize) -> Result<()> {
    if d == 0 || d > MAX_MODES {
        return Err(Error::InvalidArgument(format!("mode count must be in 1..={MAX_MODES}, got {d}")));
    }
    Ok(())
}

pub(crate) fn poly_add(p: &mut Poly, k: Exponent, c: Complex64) {
    if c == ZERO {
        return;
    }
    *p.entry(k).or_insert(ZERO) += c;
}

/// `He_0..=He_n` at `x`.
pub fn hermite_table(x: Complex64, n: usize) -> Vec<Complex64> {
    let mut h = Vec::with_capacity(n + 1);
    h.push(Complex64::new(1.0, 0.0));
    if n >= 1 {
        h.push(x);
    }
    for m in 1..n {
        let next = x * h[m] - h[m - 1] * m as f64;
        h.push(next);
    }
    h
}

impl ChaosExpansion {
    pub fn zero(d: usize, degree: usize) -> Result<Self> {
        check_d(d)?;
        check_degree(degree)?;
        Ok(ChaosExpansion {
            d,
            degree,
            coef: Poly::new(),
        })
    }

    pub fn constant(d: usize, c: Complex64) -> Result<Self> {
        let mut e = Self::zero(d, 0)?;
        poly_add(&mut e.coef, vec![0; d], c);
        Ok(e)
    }

    /// From `c_k` coefficients (the S-transform polynomial).
    pub fn from_coefficients(d: usize, degree: usize, coefs: impl IntoIterator<Item = (Exponent, Complex64)>) -> Result<Self> {
        let mut e = Self::zero(d, degree)?;
        for (k, c) in coefs {
            e.check_exponent(&k)?;
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::NonFinite {
                    at: total(&k) as f64,
                    value: c.norm(),
                });
            }
            poly_add(&mut e.coef, k, c);
        }
        Ok(e)
    }

    /// From kernel entries `f` at multi-indices in any order; entries with
    /// the same canonical form accumulate.
    pub fn from_kernel_entries(d: usize, degree: usize, entries: impl IntoIterator<Item = (Vec<usize>, Complex64)>) -> Result<Self> {
        let mut coefs = Vec::new();
        for (index, f) in entries {
            let k = exponent_from_index(d, &index)?;
            let m = ln_multiplicity(&k).exp();
            coefs.push((k, f * m));
        }
        Self::from_coefficients(d, degree, coefs)
    }

    /// `:e^{⟨·,ξ⟩}:` truncated at degree `n`: `f_m = ξ^{⊗m}/m!`.
    pub fn renorm_exp(xi: &[Complex64], n: usize) -> Result<Self> {
        let d = xi.len();
        let mut e = Self::zero(d, n)?;
        // Only modes where ξ is nonzero contribute.
        let support: Vec<usize> = (0..d).filter(|&j| xi[j] != ZERO).collect();
        if support.is_empty() {
            poly_add(&mut e.coef, vec![0; d], Complex64::new(1.0, 0.0));
            return Ok(e);
        }
        let s = support.len();
        let terms = (ln_factorial(n + s) - ln_factorial(n) - ln_factorial(s)).exp();
        if terms > MAX_TERMS {
            return Err(Error::InvalidArgument(format!(
                "exponential vector of degree {n} on {s} modes needs {terms:.0} terms"
            )));
        }
        for m in 0..=n {
            for ks in exponents(s, m) {
                let mut k = vec![0u8; d];
                let mut c = Complex64::new((-ln_k_factorial(&ks)).exp(), 0.0);
                for (i, &v) in ks.iter().enumerate() {
                    k[support[i]] = v;
                    c *= xi[support[i]].powu(v as u32);
                }
                poly_add(&mut e.coef, k, c);
            }
        }
        Ok(e)
    }

    /// Kernel entries drawn as standard complex Gaussians times `scale`.
    pub fn random<R: Rng + ?Sized>(d: usize, n: usize, scale: f64, rng: &mut R) -> Result<Self> {
        let mut e = Self::zero(d, n)?;
        for m in 0..=n {
            for k in exponents(d, m) {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                let f = Complex64::new(re, im) * (scale / std::f64::consts::SQRT_2);
                poly_add(&mut e.coef, k.clone(), f * ln_multiplicity(&k).exp());
            }
        }
        Ok(e)
    }

    fn check_exponent(&self, k: &[u8]) -> Result<()> {
        if k.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: k.len(),
            });
        }
        if total(k) > self.degree {
            return Err(Error::InvalidArgument(format!(
                "entry of degree {} exceeds declared degree {}",
                total(k),
                self.degree
            )));
        }
        Ok(())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Declared degree bound `N`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Highest degree with a nonzero entry.
    pub fn effective_degree(&self) -> usize {
        self.coef.iter().filter(|(_, c)| **c != ZERO).map(|(k, _)| total(k)).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coef.values().all(|c| *c == ZERO)
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&Exponent, &Complex64)> {
        self.coef.iter()
    }

    pub fn coefficient(&self, k: &[u8]) -> Complex64 {
        self.coef.get(k).copied().unwrap_or(ZERO)
    }

    /// Kernel entry `f` at a multi-index (any order).
    pub fn kernel_entry(&self, index: &[usize]) -> Result<Complex64> {
        let k = exponent_from_index(self.d, index)?;
        Ok(self.coefficient(&k) / ln_multiplicity(&k).exp())
    }

    pub(crate) fn from_poly(d: usize, degree: usize, coef: Poly) -> Result<Self> {
        check_d(d)?;
        check_degree(degree)?;
        let coef = coef.into_iter().filter(|(_, c)| *c != ZERO).collect();
        Ok(ChaosExpansion { d, degree, coef })
    }

    pub(crate) fn poly(&self) -> &Poly {
        &self.coef
    }

    /// Keeps degrees `≤ n`.
    pub fn truncate(&self, n: usize) -> Self {
        ChaosExpansion {
            d: self.d,
            degree: n.min(self.degree),
            coef: self.coef.iter().filter(|(k, _)| total(k) <= n).map(|(k, c)| (k.clone(), *c)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_d(other)?;
        let mut coef = self.coef.clone();
        for (k, c) in &other.coef {
            poly_add(&mut coef, k.clone(), *c);
        }
        Self::from_poly(self.d, self.degree.max(other.degree), coef)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        ChaosExpansion {
            d: self.d,
            degree: self.degree,
            coef: self.coef.iter().map(|(k, c)| (k.clone(), c * s)).collect(),
        }
    }

    fn same_d(&self, other: &Self) -> Result<()> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: other.d,
            });
        }
        Ok(())
    }

    /// Largest coefficient difference relative to the largest coefficient.
    pub fn max_rel_diff(&self, other: &Self) -> f64 {
        let scale = self
            .coef
            .values()
            .chain(other.coef.values())
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        let mut worst = 0.0_f64;
        for k in self.coef.keys().chain(other.coef.keys()) {
            worst = worst.max((self.coefficient(k) - other.coefficient(k)).norm());
        }
        if scale == 0.0 {
            worst
        } else {
            worst / scale
        }
    }

    /// `|f_n|²_p` for `n = 0..=N`.
    pub fn kernel_norms_sq(&self, model: &SpaceModel, p: f64) -> Result<Vec<f64>> {
        model.check_dim(&vec![ZERO; self.d])?;
        let ln_l: Vec<f64> = model.lambda().iter().map(|l| l.ln()).collect();
        let mut out = vec![0.0; self.degree + 1];
        for (k, c) in &self.coef {
            let w: f64 = k.iter().zip(&ln_l).map(|(&v, l)| 2.0 * p * v as f64 * l).sum();
            out[total(k)] += c.norm_sqr() * (w - ln_multiplicity(k)).exp();
        }
        Ok(out)
    }

    /// `(SΦ)(ξ) = Σ_n ⟨f_n, ξ^{⊗n}⟩`.
    pub fn s_transform(&self, xi: &[Complex64]) -> Result<Complex64> {
        self.check_point(xi)?;
        let powers = self.power_table(xi);
        Ok(self
            .coef
            .iter()
            .map(|(k, c)| k.iter().enumerate().fold(*c, |acc, (j, &v)| acc * powers[j][v as usize]))
            .sum())
    }

    fn power_table(&self, xi: &[Complex64]) -> Vec<Vec<Complex64>> {
        xi.iter()
            .map(|z| {
                let mut row = Vec::with_capacity(self.degree + 1);
                let mut acc = Complex64::new(1.0, 0.0);
                for _ in 0..=self.degree {
                    row.push(acc);
                    acc *= z;
                }
                row
            })
            .collect()
    }

    fn check_point(&self, x: &[Complex64]) -> Result<()> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: x.len(),
            });
        }
        if x.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidArgument("evaluation point must be finite".into()));
        }
        Ok(())
    }

    /// `φ(x)` through the Wick-tensor recursion
    /// `⟨:x^{⊗n}:, f⟩ = ⟨:x^{⊗(n-1)}:, f⌟x⟩ - (n-1)⟨:x^{⊗(n-2)}:, tr f⟩`,
    /// applied to all degrees at once from the top down.
    pub fn evaluate(&self, x: &[Complex64]) -> Result<Complex64> {
        self.check_point(x)?;
        let mut levels: Vec<Poly> = vec![Poly::new(); self.degree + 1];
        for (k, c) in &self.coef {
            poly_add(&mut levels[total(k)], k.clone(), *c);
        }
        for m in (1..=self.degree).rev() {
            let level = std::mem::take(&mut levels[m]);
            let inv = 1.0 / m as f64;
            for (k, c) in level {
                for j in 0..self.d {
                    let kj = k[j];
                    if kj == 0 {
                        continue;
                    }
                    // f⌟x in coefficient form: (1/m) Σ_j x_j ∂_j.
                    let mut k1 = k.clone();
                    k1[j] -= 1;
                    poly_add(&mut levels[m - 1], k1, c * x[j] * (kj as f64 * inv));
                    // (m-1) tr f in coefficient form: (1/m) Σ_j ∂_j².
                    if kj >= 2 {
                        let mut k2 = k.clone();
                        k2[j] -= 2;
                        poly_add(&mut levels[m - 2], k2, -c * ((kj as f64) * (kj as f64 - 1.0) * inv));
                    }
                }
            }
        }
        Ok(levels[0].values().sum())
    }

    /// Precomputed Hermite-basis evaluator for repeated evaluation.
    pub fn evaluator(&self) -> Evaluator {
        let mut exps = Vec::with_capacity(self.coef.len() * self.d);
        let mut coefs = Vec::with_capacity(self.coef.len());
        for (k, c) in &self.coef {
            exps.extend_from_slice(k);
            coefs.push(*c);
        }
        Evaluator {
            d: self.d,
            degree: self.degree,
            exps,
            coefs,
        }
    }

    /// `φ(x) = Σ c_k Π He_{k_j}(x_j)`.
    pub fn evaluate_hermite(&self, x: &[Complex64]) -> Result<Complex64> {
        self.check_point(x)?;
        Ok(self.evaluator().eval(x))
    }

    /// Wick product, kernelwise `Σ_{j+k=n} sym(f_j ⊗ g_k)`.
    pub fn wick_product(&self, other: &Self) -> Result<Self> {
        let degree = self.degree + other.degree;
        check_degree(degree)?;
        self.wick_product_truncated(other, degree)
    }

    /// Wick product keeping degrees `≤ n`.
    pub fn wick_product_truncated(&self, other: &Self, n: usize) -> Result<Self> {
        self.same_d(other)?;
        check_degree(n)?;
        let mut out = Poly::new();
        for (k1, c1) in &self.coef {
            let t1 = total(k1);
            for (k2, c2) in &other.coef {
                if t1 + total(k2) > n {
                    continue;
                }
                let k: Exponent = k1.iter().zip(k2).map(|(a, b)| a + b).collect();
                poly_add(&mut out, k, c1 * c2);
            }
        }
        Self::from_poly(self.d, n, out)
    }

    /// Pointwise product, linearizing `He_a He_b = Σ_r r! C(a,r) C(b,r) He_{a+b-2r}`
    /// mode by mode.
    pub fn pointwise_product(&self, other: &Self) -> Result<Self> {
        self.same_d(other)?;
        let degree = self.degree + other.degree;
        check_degree(degree)?;
        let mut out = Poly::new();
        for (k1, c1) in &self.coef {
            for (k2, c2) in &other.coef {
                let mut terms: Vec<(Exponent, f64)> = vec![(Vec::with_capacity(self.d), 0.0)];
                for j in 0..self.d {
                    let (a, b) = (k1[j] as usize, k2[j] as usize);
                    let mut next = Vec::with_capacity(terms.len() * (a.min(b) + 1));
                    for (k, lw) in &terms {
                        for r in 0..=a.min(b) {
                            let w = ln_factorial(r) + crate::numeric::ln_binomial(a, r) + crate::numeric::ln_binomial(b, r);
                            let mut kk = k.clone();
                            kk.push((a + b - 2 * r) as u8);
                            next.push((kk, lw + w));
                        }
                    }
                    terms = next;
                }
                let c = c1 * c2;
                for (k, lw) in terms {
                    poly_add(&mut out, k, c * lw.exp());
                }
            }
        }
        Self::from_poly(self.d, degree, out)
    }
}

/// Flat Hermite-basis form of an expansion.
#[derive(Debug, Clone)]
pub struct Evaluator {
    d: usize,
    degree: usize,
    exps: Vec<u8>,
    coefs: Vec<Complex64>,
}

impl Evaluator {
    pub fn eval(&self, x: &[Complex64]) -> Complex64 {
        let tables: Vec<Vec<Complex64>> = x.iter().map(|&z| hermite_table(z, self.degree)).collect();
        let mut acc = ZERO;
        for (i, c) in self.coefs.iter().enumerate() {
            let k = &self.exps[i * self.d..(i + 1) * self.d];
            let mut t = *c;
            for (j, &v) in k.iter().enumerate() {
                t *= tables[j][v as usize];
            }
            acc += t;
        }
        acc
    }
}

#[derive(Serialize, Deserialize)]
struct ExpansionDoc {
    d: usize,
    #[serde(rename = "N")]
    n: usize,
    kernels: Vec<KernelDoc>,
}

#[derive(Serialize, Deserialize)]
struct KernelDoc {
    degree: usize,
    entries: Vec<EntryDoc>,
}

#[derive(Serialize, Deserialize)]
struct EntryDoc {
    index: Vec<usize>,
    value: [f64; 2],
}

impl From<ChaosExpansion> for ExpansionDoc {
    fn from(e: ChaosExpansion) -> Self {
        let mut kernels: Vec<KernelDoc> = (0..=e.degree)
            .map(|degree| KernelDoc {
                degree,
                entries: Vec::new(),
            })
            .collect();
        for (k, c) in &e.coef {
            let f = c / ln_multiplicity(k).exp();
            kernels[total(k)].entries.push(EntryDoc {
                index: index_from_exponent(k),
                value: [f.re, f.im],
            });
        }
        for kd in &mut kernels {
            kd.entries.sort_by(|a, b| a.index.cmp(&b.index));
        }
        kernels.retain(|kd| !kd.entries.is_empty());
        ExpansionDoc {
            d: e.d,
            n: e.degree,
            kernels,
        }
    }
}

impl TryFrom<ExpansionDoc> for ChaosExpansion {
    type Error = Error;

    fn try_from(doc: ExpansionDoc) -> Result<Self> {
        let mut entries = Vec::new();
        for kd in doc.kernels {
            for e in kd.entries {
                if e.index.len() != kd.degree {
                    return Err(Error::Parse(format!(
                        "index {:?} listed under degree {}",
                        e.index, kd.degree
                    )));
                }
                if e.index.windows(2).any(|w| w[1] < w[0]) {
                    return Err(Error::Parse(format!("index {:?} is not nondecreasing", e.index)));
                }
                entries.push((e.index, Complex64::new(e.value[0], e.value[1])));
            }
        }
        ChaosExpansion::from_kernel_entries(doc.d, doc.n, entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::model::real_vector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn exponent_enumeration() {
        assert_eq!(exponents(3, 2).len(), 6);
        assert_eq!(exponents(1, 5), vec![vec![5]]);
        assert_eq!(index_from_exponent(&[2, 0, 1]), vec![0, 0, 2]);
        assert_eq!(exponent_from_index(3, &[2, 0, 0]).unwrap(), vec![2, 0, 1]);
    }

    #[test]
    fn renorm_exp_kernels() {
        let e0 = real_vector(&[1.0, 0.0]);
        let phi = ChaosExpansion::renorm_exp(&e0, 3).unwrap();
        assert_eq!(phi.kernel_entry(&[0, 0]).unwrap(), c(0.5));
        assert_eq!(phi.kernel_entry(&[0, 1]).unwrap(), c(0.0));
        let zero = ChaosExpansion::renorm_exp(&real_vector(&[0.0, 0.0]), 4).unwrap();
        assert_eq!(zero.max_rel_diff(&ChaosExpansion::constant(2, c(1.0)).unwrap()), 0.0);
        assert_eq!(zero.degree(), 4);
    }

    #[test]
    fn hermite_two() {
        let phi = ChaosExpansion::from_kernel_entries(2, 2, [(vec![0, 0], c(1.0))]).unwrap();
        for x0 in [-1.5, 0.0, 0.7, 3.0] {
            let x = real_vector(&[x0, 0.4]);
            let v = phi.evaluate(&x).unwrap();
            assert!((v.re - (x0 * x0 - 1.0)).abs() < 1e-14 && v.im == 0.0);
        }
    }

    #[test]
    fn off_diagonal_kernel_counts_both_orders() {
        // f_{01} = f_{10} = 1: ⟨f, ξ⊗ξ⟩ = 2 ξ0 ξ1 and φ(x) = 2 x0 x1.
        let phi = ChaosExpansion::from_kernel_entries(2, 2, [(vec![1, 0], c(1.0))]).unwrap();
        let x = real_vector(&[0.3, -2.0]);
        assert!((phi.s_transform(&x).unwrap().re + 1.2).abs() < 1e-15);
        assert!((phi.evaluate(&x).unwrap().re + 1.2).abs() < 1e-15);
    }

    #[test]
    fn recursion_matches_hermite_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let phi = ChaosExpansion::random(3, 5, 1.0, &mut rng).unwrap();
        let m = SpaceModel::new(3).unwrap();
        for _ in 0..20 {
            let x = m.sample_vector(&mut rng, 0.0, 1.5);
            let a = phi.evaluate(&x).unwrap();
            let b = phi.evaluate_hermite(&x).unwrap();
            assert!((a - b).norm() <= 1e-11 * b.norm().max(1.0));
        }
    }

    #[test]
    fn json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let phi = ChaosExpansion::random(2, 3, 1.0, &mut rng).unwrap();
        let s = serde_json::to_string(&phi).unwrap();
        assert!(s.contains("\"N\":3"));
        let back: ChaosExpansion = serde_json::from_str(&s).unwrap();
        assert!(phi.max_rel_diff(&back) < 1e-15);
        let bad = r#"{"d":2,"N":2,"kernels":[{"degree":2,"entries":[{"index":[1,0],"value":[1,0]}]}]}"#;
        assert!(serde_json::from_str::<ChaosExpansion>(bad).is_err());
    }

    #[test]
    fn degree_cap_is_enforced() {
        let a = ChaosExpansion::zero(1, 40).unwrap();
        assert!(matches!(a.wick_product(&a), Err(Error::DegreeCapExceeded { .. })));
        assert!(ChaosExpansion::zero(1, DEGREE_CAP + 1).is_err());
    }
}
