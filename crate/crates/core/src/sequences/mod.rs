//! Positive weight sequences `α(n)`, kept as `log α(n)`.

mod bell;
mod check;
mod equivalence;

use std::fmt;
use std::io::Write;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::growth::{l_function, l_sharp_function, log_iterated_exp, GrowthFunction};
use crate::numeric::{ln_factorial, power_series, SeriesSum, TruncationPolicy};

pub use bell::{bell_log_coefficients, BELL_MAX_K, BELL_MAX_N};
pub use check::{check, SequenceCondition};
pub use equivalence::{sequence_equivalence, SequenceEquivalence};

/// Which exponential generating function of a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// `G_α(r) = Σ α(n) rⁿ / n!`.
    GAlpha,
    /// `G_{1/α}(r) = Σ rⁿ / (n! α(n))`.
    GInvAlpha,
}

impl Direction {
    pub fn label(self) -> &'static str {
        match self {
            Direction::GAlpha => "G_alpha",
            Direction::GInvAlpha => "G_inv_alpha",
        }
    }
}

#[derive(Clone)]
pub enum Origin {
    Ones,
    FactorialPower(f64),
    Bell { k: u32, logs: Arc<Vec<f64>> },
    FromGrowth(GrowthFunction),
    Explicit(Arc<Vec<f64>>),
}

impl fmt::Debug for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Ones => write!(f, "Ones"),
            Origin::FactorialPower(b) => write!(f, "FactorialPower({b})"),
            Origin::Bell { k, logs } => write!(f, "Bell({k}, n <= {})", logs.len() - 1),
            Origin::FromGrowth(u) => write!(f, "FromGrowth({})", u.name()),
            Origin::Explicit(v) => write!(f, "Explicit({} terms)", v.len()),
        }
    }
}

/// Unbounded origins still stop somewhere.
const DEFAULT_CAPACITY: usize = 100_000;

struct Inner {
    origin: Origin,
    /// Materialized prefix of `log α(n)`; only ever extended.
    cache: RwLock<Vec<f64>>,
    capacity: usize,
}

#[derive(Clone)]
pub struct WeightSequence {
    inner: Arc<Inner>,
}

impl fmt::Debug for WeightSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.origin())
    }
}

impl WeightSequence {
    fn build(origin: Origin, capacity: usize) -> Self {
        WeightSequence {
            inner: Arc::new(Inner {
                origin,
                cache: RwLock::new(Vec::new()),
                capacity,
            }),
        }
    }

    pub fn ones() -> Self {
        Self::build(Origin::Ones, DEFAULT_CAPACITY)
    }

    /// `(n!)^β`.
    pub fn factorial_power(beta: f64) -> Self {
        Self::build(Origin::FactorialPower(beta), DEFAULT_CAPACITY)
    }

    /// `α_u(n) = 1 / (n! ℓ_u(n))`.
    pub fn from_growth(u: &GrowthFunction) -> Self {
        Self::build(Origin::FromGrowth(u.clone()), DEFAULT_CAPACITY)
    }

    /// Bell numbers of order `k`, `n ≤ n_max`.
    pub fn bell(k: u32, n_max: usize) -> Result<Self> {
        let logs = bell::bell_log_numbers(k, n_max)?;
        let cap = logs.len();
        Ok(Self::build(Origin::Bell { k, logs: Arc::new(logs) }, cap))
    }

    pub fn explicit_logs(logs: Vec<f64>) -> Result<Self> {
        if logs.is_empty() || logs.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("explicit sequence needs finite log values".into()));
        }
        let cap = logs.len();
        Ok(Self::build(Origin::Explicit(Arc::new(logs)), cap))
    }

    pub fn explicit(values: &[f64]) -> Result<Self> {
        if values.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::InvalidArgument("explicit sequence values must be positive".into()));
        }
        Self::explicit_logs(values.iter().map(|v| v.ln()).collect())
    }

    pub fn origin(&self) -> &Origin {
        &self.inner.origin
    }

    pub fn capacity(&self) -> usize {
        self.inner.capacity
    }

    pub fn name(&self) -> String {
        match self.origin() {
            Origin::Ones => "ones".into(),
            Origin::FactorialPower(b) => format!("factorial_power:{b}"),
            Origin::Bell { k, .. } => format!("bell:{k}"),
            Origin::FromGrowth(u) => format!("from-growth:{}", u.name()),
            Origin::Explicit(v) => format!("explicit[{}]", v.len()),
        }
    }

    /// The underlying growth function for `FromGrowth` sequences.
    pub fn growth(&self) -> Option<&GrowthFunction> {
        match self.origin() {
            Origin::FromGrowth(u) => Some(u),
            _ => None,
        }
    }

    fn generate(&self, n: usize) -> Result<f64> {
        match self.origin() {
            Origin::Ones => Ok(0.0),
            Origin::FactorialPower(b) => Ok(b * ln_factorial(n)),
            Origin::Bell { logs, .. } | Origin::Explicit(logs) => logs.get(n).copied().ok_or(Error::SequenceExhausted {
                index: n,
                len: logs.len(),
            }),
            Origin::FromGrowth(u) => Ok(-ln_factorial(n) - u.log_ell_n(n)?),
        }
    }

    /// `log α(n)`.
    pub fn log_alpha(&self, n: usize) -> Result<f64> {
        if n >= self.inner.capacity {
            return Err(Error::SequenceExhausted {
                index: n,
                len: self.inner.capacity,
            });
        }
        {
            let cache = self.inner.cache.read().expect("sequence cache poisoned");
            if let Some(v) = cache.get(n) {
                return Ok(*v);
            }
        }
        let have = self.inner.cache.read().expect("sequence cache poisoned").len();
        let mut fresh = Vec::with_capacity(n + 1 - have);
        for i in have..=n {
            let v = self.generate(i)?;
            if !v.is_finite() {
                return Err(Error::NonFinite { at: i as f64, value: v });
            }
            fresh.push(v);
        }
        let mut cache = self.inner.cache.write().expect("sequence cache poisoned");
        // A concurrent writer may have extended the prefix meanwhile.
        let start = cache.len().saturating_sub(have);
        if start < fresh.len() {
            cache.extend_from_slice(&fresh[start..]);
        }
        Ok(cache[n])
    }

    pub fn alpha(&self, n: usize) -> Result<f64> {
        Ok(self.log_alpha(n)?.exp())
    }

    /// `log α(0..=n_max)`.
    pub fn prefix(&self, n_max: usize) -> Result<Vec<f64>> {
        self.log_alpha(n_max)?;
        let cache = self.inner.cache.read().expect("sequence cache poisoned");
        Ok(cache[..=n_max].to_vec())
    }

    /// Tail-certified `G_α(r)` or `G_{1/α}(r)`.
    pub fn generating_function(&self, direction: Direction, r: f64) -> Result<SeriesSum> {
        self.generating_function_with(direction, r, &TruncationPolicy::default())
    }

    pub fn generating_function_with(
        &self,
        direction: Direction,
        r: f64,
        policy: &TruncationPolicy,
    ) -> Result<SeriesSum> {
        match (self.origin(), direction) {
            (Origin::Ones, _) => Ok(closed_form(r)),
            (Origin::Bell { k, .. }, Direction::GAlpha) => Ok(closed_form(log_iterated_exp(k + 1, r))),
            (Origin::FromGrowth(u), Direction::GAlpha) => l_sharp_function(u, r, policy),
            (Origin::FromGrowth(u), Direction::GInvAlpha) => l_function(u, r, policy),
            (_, Direction::GAlpha) => power_series(|n| Ok(self.log_alpha(n)? - ln_factorial(n)), r, policy),
            (_, Direction::GInvAlpha) => power_series(|n| Ok(-self.log_alpha(n)? - ln_factorial(n)), r, policy),
        }
    }

    /// Partial sums `Σ_{n ≤ N}` for `N = 0..=n_max`, in the log domain.
    pub fn partial_sums(&self, direction: Direction, r: f64, n_max: usize) -> Result<Vec<f64>> {
        let mut acc = crate::numeric::LogSumExp::default();
        let log_r = r.ln();
        let mut out = Vec::with_capacity(n_max + 1);
        for n in 0..=n_max {
            let la = self.log_alpha(n)?;
            let c = match direction {
                Direction::GAlpha => la,
                Direction::GInvAlpha => -la,
            } - ln_factorial(n);
            let term = if n == 0 { c } else { c + n as f64 * log_r };
            acc.add(term);
            out.push(acc.value());
        }
        Ok(out)
    }

    /// Writes `n,log_alpha` rows for `n ≤ n_max`.
    pub fn write_csv<W: Write>(&self, n_max: usize, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "log_alpha"])?;
        for (n, v) in self.prefix(n_max)?.into_iter().enumerate() {
            w.write_record([n.to_string(), format!("{v:.17e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn closed_form(log_value: f64) -> SeriesSum {
    SeriesSum {
        log_value,
        terms: 0,
        log_tail_bound: f64::NEG_INFINITY,
    }
}

/// Lazy view of one generating function of a sequence.
#[derive(Debug, Clone)]
pub struct GeneratingFunctionView {
    pub seq: WeightSequence,
    pub direction: Direction,
    pub policy: TruncationPolicy,
}

impl GeneratingFunctionView {
    pub fn new(seq: &WeightSequence, direction: Direction) -> Self {
        GeneratingFunctionView {
            seq: seq.clone(),
            direction,
            policy: TruncationPolicy::default(),
        }
    }

    pub fn eval(&self, r: f64) -> Result<SeriesSum> {
        self.seq.generating_function_with(self.direction, r, &self.policy)
    }
}

impl std::str::FromStr for WeightSequence {
    type Err = Error;

    /// `ones`, `factorial_power:β`, `bell:k` or `from-growth:<function>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("unknown sequence {s:?}"));
        if s == "ones" {
            return Ok(Self::ones());
        }
        if let Some(rest) = s.strip_prefix("factorial_power:") {
            return Ok(Self::factorial_power(rest.parse().map_err(|_| bad())?));
        }
        if let Some(rest) = s.strip_prefix("bell:") {
            return Self::bell(rest.parse().map_err(|_| bad())?, DEFAULT_BELL_N);
        }
        if let Some(rest) = s.strip_prefix("from-growth:") {
            return Ok(Self::from_growth(&rest.parse()?));
        }
        Err(bad())
    }
}

/// Prefix length for Bell sequences built from a spec string.
pub const DEFAULT_BELL_N: usize = 120;
