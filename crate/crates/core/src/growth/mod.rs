//! Growth functions `u` on `[0, ∞)`, always handled through `log u`.

mod conditions;
mod envelope;
mod equivalence;
mod legendre;
mod theta;

use std::fmt;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequences::{Direction, WeightSequence};

pub use conditions::{check_condition, GrowthCondition};
pub use envelope::monotone_envelope;
pub use equivalence::{equivalence_witness, equivalence_witness_on, Equivalence, EquivalenceGrid, Side};
pub use legendre::{
    dual_legendre, l_function, l_sharp_function, legendre, legendre_table, DualPoint,
    LegendrePoint, LegendreTable,
};
pub use theta::ThetaView;

/// Iterated exponentials beyond this depth are not representable.
pub const MAX_ITERATED_EXP: u32 = 4;

/// Declared regularity of a growth function.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Flags {
    pub in_c_plus_log: bool,
    pub in_c_plus_half: bool,
    pub u0: bool,
    pub u1: bool,
    pub u2: bool,
    pub u3: bool,
    /// `(c1, c2)` with `u(r) ≤ c1 e^{c2 r}`.
    pub u2_envelope: Option<(f64, f64)>,
}

impl Flags {
    fn all_with_envelope(c1: f64, c2: f64) -> Self {
        Flags {
            in_c_plus_log: true,
            in_c_plus_half: true,
            u0: true,
            u1: true,
            u2: true,
            u3: true,
            u2_envelope: Some((c1, c2)),
        }
    }
}

pub type LogFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Kind {
    /// `e^r`.
    PureExp,
    /// `exp[(1+β) r^{1/(1+β)}]`, `β ∈ (-1, 1)`. Negative `β` gives the duals.
    BetaExp { beta: f64 },
    /// `exp_k(r) / exp_k(0)`.
    IteratedExp { k: u32 },
    /// `exp[2 √(r log_{k-1} √r)]` with the clamped iterated logarithm.
    WSqrtLog { k: u32 },
    DualOf(GrowthFunction),
    /// Constant `log_floor` on `[0, r_min]`, the inner function beyond.
    MonotoneEnvelopeOf {
        inner: GrowthFunction,
        r_min: f64,
        log_floor: f64,
    },
    /// Piecewise-linear `log u` through `(r, log_u)` nodes.
    Tabulated { r: Vec<f64>, log_u: Vec<f64> },
    /// A generating function `G_α` or `G_{1/α}` viewed as a growth function.
    Generating {
        seq: WeightSequence,
        direction: Direction,
    },
    /// `c · u`.
    Scaled { inner: GrowthFunction, log_c: f64 },
    /// `u^p`.
    Power { inner: GrowthFunction, p: f64 },
    /// `u(a r)`.
    Dilated { inner: GrowthFunction, a: f64 },
    Custom { name: String, log_u: LogFn },
}

impl fmt::Debug for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::PureExp => write!(f, "PureExp"),
            Kind::BetaExp { beta } => write!(f, "BetaExp({beta})"),
            Kind::IteratedExp { k } => write!(f, "IteratedExp({k})"),
            Kind::WSqrtLog { k } => write!(f, "WSqrtLog({k})"),
            Kind::DualOf(u) => write!(f, "DualOf({:?})", u.kind()),
            Kind::MonotoneEnvelopeOf { inner, r_min, .. } => {
                write!(f, "MonotoneEnvelopeOf({:?}, r_min = {r_min})", inner.kind())
            }
            Kind::Tabulated { r, .. } => write!(f, "Tabulated({} nodes)", r.len()),
            Kind::Generating { seq, direction } => {
                write!(f, "Generating({:?}, {direction:?})", seq.origin())
            }
            Kind::Scaled { inner, log_c } => write!(f, "Scaled({:?}, log c = {log_c})", inner.kind()),
            Kind::Power { inner, p } => write!(f, "Power({:?}, {p})", inner.kind()),
            Kind::Dilated { inner, a } => write!(f, "Dilated({:?}, {a})", inner.kind()),
            Kind::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

struct Inner {
    kind: Kind,
    flags: Flags,
    /// Integer-sampled Legendre transform, filled on demand.
    ell_cache: RwLock<Vec<Option<LegendrePoint>>>,
}

/// A positive continuous function on `[0, ∞)`. Cheap to clone.
#[derive(Clone)]
pub struct GrowthFunction {
    inner: Arc<Inner>,
}

impl fmt::Debug for GrowthFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl GrowthFunction {
    fn build(kind: Kind, flags: Flags) -> Self {
        GrowthFunction {
            inner: Arc::new(Inner {
                kind,
                flags,
                ell_cache: RwLock::new(Vec::new()),
            }),
        }
    }

    pub fn pure_exp() -> Self {
        Self::build(Kind::PureExp, Flags::all_with_envelope(1.0, 1.0))
    }

    pub fn beta_exp(beta: f64) -> Result<Self> {
        if !(beta > -1.0 && beta < 1.0) {
            return Err(Error::InvalidArgument(format!("beta = {beta} outside (-1, 1)")));
        }
        let u2 = beta >= 0.0;
        let flags = Flags {
            u2,
            // max_r (1+β) r^{1/(1+β)} - r = β, attained at r = 1.
            u2_envelope: u2.then(|| (beta.exp(), 1.0)),
            ..Flags::all_with_envelope(1.0, 1.0)
        };
        Ok(Self::build(Kind::BetaExp { beta }, flags))
    }

    pub fn iterated_exp(k: u32) -> Result<Self> {
        if k == 0 || k > MAX_ITERATED_EXP {
            return Err(Error::InvalidArgument(format!(
                "iterated exponential depth {k} outside 1..={MAX_ITERATED_EXP}"
            )));
        }
        let flags = Flags {
            u2: k == 1,
            u2_envelope: (k == 1).then_some((1.0, 1.0)),
            ..Flags::all_with_envelope(1.0, 1.0)
        };
        Ok(Self::build(Kind::IteratedExp { k }, flags))
    }

    pub fn w_sqrt_log(k: u32) -> Result<Self> {
        if !(2..=MAX_ITERATED_EXP).contains(&k) {
            return Err(Error::InvalidArgument(format!(
                "w_k needs 2 <= k <= {MAX_ITERATED_EXP}, got {k}"
            )));
        }
        // log_{k-1} ≥ 1 everywhere and 2√(r L) - r peaks at 1 when L = 1.
        Ok(Self::build(Kind::WSqrtLog { k }, Flags::all_with_envelope(std::f64::consts::E, 1.0)))
    }

    /// The dual Legendre transform `u*` as a growth function.
    pub fn dual_of(u: &GrowthFunction) -> Self {
        let f = u.flags();
        // u* is increasing and (log, x²)-convex; u*(0) = 1/inf u.
        let mut flags = Flags {
            in_c_plus_log: true,
            in_c_plus_half: true,
            u0: f.u0,
            u1: f.u0,
            u3: true,
            ..Flags::default()
        };
        if let Some((m, b)) = u.linear_minorant() {
            // log u(s) ≥ m s - b  ⇒  log u*(r) ≤ r/m + b.
            flags.u2 = true;
            flags.u2_envelope = Some((b.exp(), 1.0 / m));
        }
        if let Kind::DualOf(v) = u.kind() {
            let g = v.flags();
            if g.u1 && g.u3 {
                // (v*)* = v for increasing (log, x²)-convex v.
                flags = g;
            }
        }
        Self::build(Kind::DualOf(u.clone()), flags)
    }

    pub fn tabulated(r: Vec<f64>, log_u: Vec<f64>) -> Result<Self> {
        if r.len() != log_u.len() || r.len() < 2 {
            return Err(Error::InvalidArgument(
                "tabulated function needs at least two (r, log_u) nodes".into(),
            ));
        }
        if r[0] < 0.0 || r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("tabulated r must be >= 0 and strictly increasing".into()));
        }
        if log_u.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("tabulated log_u must be finite".into()));
        }
        let provisional = Self::build(Kind::Tabulated { r: r.clone(), log_u: log_u.clone() }, Flags::default());
        let flags = derived_flags(&provisional);
        Ok(Self::build(Kind::Tabulated { r, log_u }, flags))
    }

    /// Reads `(r, log_u)` rows from a CSV file with a header line.
    pub fn tabulated_from_csv(path: &std::path::Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)?;
        let mut r = Vec::new();
        let mut log_u = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() < 2 {
                return Err(Error::Parse(format!("expected two columns, got {}", rec.len())));
            }
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}")));
            r.push(parse(&rec[0])?);
            log_u.push(parse(&rec[1])?);
        }
        Self::tabulated(r, log_u)
    }

    pub fn generating(seq: &WeightSequence, direction: Direction) -> Self {
        let flags = Flags {
            in_c_plus_log: true,
            ..Flags::default()
        };
        Self::build(
            Kind::Generating {
                seq: seq.clone(),
                direction,
            },
            flags,
        )
    }

    pub fn scaled(&self, c: f64) -> Self {
        let f = self.flags();
        let unit = c == 1.0;
        let flags = Flags {
            u0: f.u0 && unit,
            u1: f.u1 && unit,
            u2_envelope: f.u2_envelope.map(|(c1, c2)| (c1 * c, c2)),
            ..f
        };
        Self::build(
            Kind::Scaled {
                inner: self.clone(),
                log_c: c.ln(),
            },
            flags,
        )
    }

    pub fn power(&self, p: f64) -> Self {
        let f = self.flags();
        let flags = Flags {
            u2_envelope: f.u2_envelope.map(|(c1, c2)| (c1.powf(p), c2 * p)),
            ..f
        };
        Self::build(Kind::Power { inner: self.clone(), p }, flags)
    }

    pub fn dilated(&self, a: f64) -> Self {
        let f = self.flags();
        let flags = Flags {
            u2_envelope: f.u2_envelope.map(|(c1, c2)| (c1, c2 * a)),
            ..f
        };
        Self::build(Kind::Dilated { inner: self.clone(), a }, flags)
    }

    /// A growth function from an arbitrary `r ↦ log u(r)` with caller-declared flags.
    pub fn custom(name: impl Into<String>, flags: Flags, log_u: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::build(
            Kind::Custom {
                name: name.into(),
                log_u: Arc::new(log_u),
            },
            flags,
        )
    }

    pub(crate) fn envelope_of(inner: &GrowthFunction, r_min: f64, log_floor: f64) -> Self {
        let f = inner.flags();
        let flags = Flags {
            u1: f.u1 || (f.u0 && f.u3),
            ..f
        };
        Self::build(
            Kind::MonotoneEnvelopeOf {
                inner: inner.clone(),
                r_min,
                log_floor,
            },
            flags,
        )
    }

    pub fn kind(&self) -> &Kind {
        &self.inner.kind
    }

    pub fn flags(&self) -> Flags {
        self.inner.flags
    }

    pub fn name(&self) -> String {
        match self.kind() {
            Kind::PureExp => "exp".into(),
            Kind::BetaExp { beta } => format!("beta_exp:{beta}"),
            Kind::IteratedExp { k } => format!("exp_{k}"),
            Kind::WSqrtLog { k } => format!("w_{k}"),
            Kind::DualOf(u) => format!("dual:{}", u.name()),
            Kind::MonotoneEnvelopeOf { inner, .. } => format!("envelope:{}", inner.name()),
            Kind::Tabulated { r, .. } => format!("tabulated[{}]", r.len()),
            Kind::Generating { seq, direction } => format!("{}[{}]", direction.label(), seq.name()),
            Kind::Scaled { inner, log_c } => format!("{}*{}", log_c.exp(), inner.name()),
            Kind::Power { inner, p } => format!("{}^{p}", inner.name()),
            Kind::Dilated { inner, a } => format!("{}({a}r)", inner.name()),
            Kind::Custom { name, .. } => name.clone(),
        }
    }

    pub fn same_as(&self, other: &GrowthFunction) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
    }

    /// `log u(r)`. May be `+∞` when `u(r)` exceeds double range.
    pub fn log_eval(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) || r.is_infinite() {
            return Err(Error::InvalidArgument(format!("growth function argument r = {r}")));
        }
        let v = match self.kind() {
            Kind::PureExp => r,
            Kind::BetaExp { beta } => (1.0 + beta) * r.powf(1.0 / (1.0 + beta)),
            Kind::IteratedExp { k } => log_iterated_exp(*k, r),
            Kind::WSqrtLog { k } => 2.0 * (r * iterated_log(*k - 1, r.sqrt())).sqrt(),
            // A supremum still climbing at the edge of double range is
            // reported as overflow, like any other unrepresentable value.
            Kind::DualOf(u) => match dual_legendre(u, r) {
                Ok(p) => p.log_value,
                Err(Error::UnboundedObjective { .. }) => f64::INFINITY,
                Err(e) => return Err(e),
            },
            Kind::MonotoneEnvelopeOf {
                inner,
                r_min,
                log_floor,
            } => {
                if r <= *r_min {
                    *log_floor
                } else {
                    inner.log_eval(r)?
                }
            }
            Kind::Tabulated { r: nodes, log_u } => interpolate(nodes, log_u, r),
            Kind::Generating { seq, direction } => seq.generating_function(*direction, r)?.log_value,
            Kind::Scaled { inner, log_c } => inner.log_eval(r)? + log_c,
            Kind::Power { inner, p } => p * inner.log_eval(r)?,
            Kind::Dilated { inner, a } => inner.log_eval(a * r)?,
            Kind::Custom { log_u, .. } => log_u(r),
        };
        if v.is_nan() || v == f64::NEG_INFINITY {
            return Err(Error::NonFinite { at: r, value: v });
        }
        Ok(v)
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        Ok(self.log_eval(r)?.exp())
    }

    /// `(m, b)` with `log u(s) ≥ m s - b` for all `s ≥ 0`, when known.
    pub fn linear_minorant(&self) -> Option<(f64, f64)> {
        match self.kind() {
            Kind::PureExp => Some((1.0, 0.0)),
            // (1+β) s^{1/(1+β)} - s is minimized at s = 1 for β ≤ 0.
            Kind::BetaExp { beta } if *beta <= 0.0 => Some((1.0, -beta)),
            Kind::IteratedExp { .. } => Some((1.0, 0.0)),
            Kind::DualOf(u) => u.flags().u2_envelope.map(|(c1, c2)| (1.0 / c2, c1.ln())),
            Kind::Scaled { inner, log_c } => inner.linear_minorant().map(|(m, b)| (m, b - log_c)),
            Kind::Power { inner, p } => inner.linear_minorant().map(|(m, b)| (m * p, b * p)),
            Kind::Dilated { inner, a } => inner.linear_minorant().map(|(m, b)| (m * a, b)),
            _ => None,
        }
    }

    /// `ℓ_u(n)` from the write-once integer cache.
    pub fn ell_n(&self, n: usize) -> Result<LegendrePoint> {
        {
            let cache = self.inner.ell_cache.read().expect("legendre cache poisoned");
            if let Some(Some(p)) = cache.get(n) {
                return Ok(*p);
            }
        }
        let p = legendre(self, n as f64)?;
        let mut cache = self.inner.ell_cache.write().expect("legendre cache poisoned");
        if cache.len() <= n {
            cache.resize(n + 1, None);
        }
        // Another thread may have filled the slot; both values are identical.
        cache[n].get_or_insert(p);
        Ok(p)
    }

    /// `log ℓ_u(n)`.
    pub fn log_ell_n(&self, n: usize) -> Result<f64> {
        Ok(self.ell_n(n)?.log_ell)
    }
}

/// `log v_k(r) = exp_{k-1}(r) - exp_{k-1}(0)`, by peeling one layer at a time:
/// `D_0 = r`, `D_m = exp_m(0) · expm1(D_{m-1})`.
pub fn log_iterated_exp(k: u32, r: f64) -> f64 {
    let mut d = r;
    let mut base = 0.0_f64; // exp_m(0)
    for _ in 1..k {
        base = base.exp();
        d = base * d.exp_m1();
    }
    d
}

impl std::str::FromStr for GrowthFunction {
    type Err = Error;

    /// `exp`, `beta_exp:β`, `exp_k`, `w_k`, `dual:<spec>`, `envelope:<spec>`
    /// or `tabulated:<csv path>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("unknown growth function {s:?}"));
        if s == "exp" {
            return Ok(Self::pure_exp());
        }
        if let Some(rest) = s.strip_prefix("dual:") {
            return Ok(Self::dual_of(&rest.parse()?));
        }
        if let Some(rest) = s.strip_prefix("envelope:") {
            return monotone_envelope(&rest.parse()?);
        }
        if let Some(rest) = s.strip_prefix("tabulated:") {
            return Self::tabulated_from_csv(std::path::Path::new(rest));
        }
        if let Some(rest) = s.strip_prefix("beta_exp:") {
            return Self::beta_exp(rest.parse().map_err(|_| bad())?);
        }
        if let Some(rest) = s.strip_prefix("exp_") {
            return Self::iterated_exp(rest.parse().map_err(|_| bad())?);
        }
        if let Some(rest) = s.strip_prefix("w_") {
            return Self::w_sqrt_log(rest.parse().map_err(|_| bad())?);
        }
        Err(bad())
    }
}

/// The built-in families at the parameters used by the sweeps.
pub fn builtins() -> Vec<GrowthFunction> {
    let mut out = vec![GrowthFunction::pure_exp()];
    for beta in [-0.5, 0.25, 0.5, 0.75] {
        out.push(GrowthFunction::beta_exp(beta).expect("valid beta"));
    }
    for k in 2..=3 {
        out.push(GrowthFunction::iterated_exp(k).expect("valid depth"));
    }
    for k in 2..=3 {
        out.push(GrowthFunction::w_sqrt_log(k).expect("valid depth"));
    }
    out
}

/// `log_1(x) = log max(x, e)`, `log_j = log_1 ∘ log_{j-1}`; `log_0` is the identity.
pub fn iterated_log(j: u32, x: f64) -> f64 {
    let mut v = x;
    for _ in 0..j {
        v = v.max(std::f64::consts::E).ln();
    }
    v
}

fn interpolate(nodes: &[f64], vals: &[f64], r: f64) -> f64 {
    if r <= nodes[0] {
        return vals[0];
    }
    let n = nodes.len();
    let i = match nodes.binary_search_by(|x| x.total_cmp(&r)) {
        Ok(i) => return vals[i],
        Err(i) => i.min(n - 1),
    };
    let (x0, x1, y0, y1) = (nodes[i - 1], nodes[i], vals[i - 1], vals[i]);
    y0 + (y1 - y0) * (r - x0) / (x1 - x0)
}

fn derived_flags(u: &GrowthFunction) -> Flags {
    use crate::report::Verdict;
    let pass = |c: GrowthCondition| check_condition(u, c).verdict == Verdict::PassOnGrid;
    let u2 = check_condition(u, GrowthCondition::U2);
    let envelope = match (u2.witness.get("c1"), u2.witness.get("c2")) {
        (Some(&c1), Some(&c2)) if u2.verdict == Verdict::PassOnGrid => Some((c1, c2)),
        _ => None,
    };
    Flags {
        in_c_plus_log: pass(GrowthCondition::CPlusLog),
        in_c_plus_half: pass(GrowthCondition::CPlusHalf),
        u0: pass(GrowthCondition::U0),
        u1: pass(GrowthCondition::U1),
        u2: envelope.is_some(),
        u3: pass(GrowthCondition::U3),
        u2_envelope: envelope,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn specs_parse() {
        for spec in ["exp", "beta_exp:0.5", "exp_2", "w_3", "dual:beta_exp:0.25"] {
            let u: GrowthFunction = spec.parse().unwrap();
            assert_eq!(u.name(), spec);
        }
        assert!("beta_exp:2".parse::<GrowthFunction>().is_err());
        assert!("cosh".parse::<GrowthFunction>().is_err());
    }

    #[test]
    fn iterated_exp_layers() {
        assert_eq!(log_iterated_exp(1, 2.5), 2.5);
        assert!((log_iterated_exp(2, 1.0) - (1f64.exp() - 1.0)).abs() < 1e-15);
        // exp_3(r)/exp_3(0) = exp(e^{e^r} - e).
        let r: f64 = 0.7;
        let direct = r.exp().exp() - 1f64.exp();
        assert!((log_iterated_exp(3, r) - direct).abs() < 1e-13);
        assert_eq!(log_iterated_exp(4, 0.0), 0.0);
        assert_eq!(log_iterated_exp(3, 800.0), f64::INFINITY);
    }

    #[test]
    fn iterated_log_is_clamped() {
        assert_eq!(iterated_log(1, 0.5), 1.0);
        assert_eq!(iterated_log(2, 100.0), 100f64.ln().ln());
        assert_eq!(iterated_log(3, 100.0), 1.0);
    }

    #[test]
    fn tabulated_interpolates_log_values() {
        let u = GrowthFunction::tabulated(vec![0.0, 1.0, 3.0], vec![0.0, 1.0, 5.0]).unwrap();
        assert_eq!(u.log_eval(0.5).unwrap(), 0.5);
        assert_eq!(u.log_eval(2.0).unwrap(), 3.0);
        assert_eq!(u.log_eval(4.0).unwrap(), 7.0);
        assert!(GrowthFunction::tabulated(vec![1.0, 1.0], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn w_k_envelope_holds() {
        for k in 2..=4 {
            let w = GrowthFunction::w_sqrt_log(k).unwrap();
            let (c1, c2) = w.flags().u2_envelope.unwrap();
            for i in 0..4000 {
                let r = i as f64 * 0.05 + (i as f64).powi(3) * 1e-3;
                assert!(w.log_eval(r).unwrap() <= c1.ln() + c2 * r + 1e-12, "k = {k}, r = {r}");
            }
        }
    }

    #[test]
    fn beta_exp_envelope_holds() {
        for beta in [0.0, 0.25, 0.5, 0.9] {
            let u = GrowthFunction::beta_exp(beta).unwrap();
            let (c1, c2) = u.flags().u2_envelope.unwrap();
            for i in 0..2000 {
                let r = i as f64 * 0.01 + (i as f64).powi(2) * 1e-2;
                assert!(u.log_eval(r).unwrap() <= c1.ln() + c2 * r + 1e-12);
            }
        }
        assert!(GrowthFunction::beta_exp(-0.5).unwrap().flags().u2_envelope.is_none());
        assert!(GrowthFunction::beta_exp(1.0).is_err());
    }

    #[test]
    fn dual_flags_follow_minorant() {
        let d = GrowthFunction::dual_of(&GrowthFunction::beta_exp(-0.5).unwrap());
        assert_eq!(d.flags().u2_envelope, Some((0.5f64.exp(), 1.0)));
        let d = GrowthFunction::dual_of(&GrowthFunction::beta_exp(0.5).unwrap());
        assert!(!d.flags().u2);
        assert!(d.flags().u1 && d.flags().u3);
    }
}
