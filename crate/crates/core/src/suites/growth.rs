use super::{flag_case, log_rel_case, rel_case, Ctx, Tightest};
use crate::error::{Error, Result};
use crate::growth::{
    builtins, check_condition, dual_legendre, equivalence_witness, l_function, l_sharp_function, legendre,
    monotone_envelope, Equivalence, Flags, GrowthCondition, GrowthFunction, ThetaView,
};
use crate::numeric::{geomspace, TruncationPolicy};
use crate::report::{CaseResult, VerificationReport};
use crate::scalar::{maximize, SearchOptions};
use crate::sequences::{Direction, WeightSequence};

/// L-function sums are only attempted where `log u` at the largest
/// argument stays below this, so that the series has a manageable length.
const LOG_U_CAP: f64 = 700.0;

/// Above this `log u(r)` the double dual needs `s > e^700`.
const BEYOND_RANGE_LOG_U: f64 = 1e150;

fn increasing_x2_convex(u: &GrowthFunction) -> bool {
    let f = u.flags();
    f.u1 && f.u3
}

fn log_ell(u: &GrowthFunction, t: f64) -> Result<f64> {
    Ok(legendre(u, t)?.log_ell)
}

fn within_cap(u: &GrowthFunction, r: f64) -> bool {
    matches!(u.log_eval(r), Ok(v) if v.is_finite() && v <= LOG_U_CAP)
}

fn beta_pairs() -> Vec<(f64, GrowthFunction, GrowthFunction)> {
    [0.25, 0.5, 0.75]
        .into_iter()
        .map(|b| {
            (
                b,
                GrowthFunction::beta_exp(b).expect("valid beta"),
                GrowthFunction::beta_exp(-b).expect("valid beta"),
            )
        })
        .collect()
}

pub(super) fn exp_closed_form(ctx: &Ctx) -> Result<VerificationReport> {
    let u = GrowthFunction::pure_exp();
    let mut report = ctx.report().param("u", u.name());
    for n in 1..=ctx.trials {
        let t = n as f64;
        match legendre(&u, t) {
            Ok(p) => {
                report.push(log_rel_case(format!("l({n})"), p.log_ell, t * (1.0 - t.ln()), ctx.tolerance).with("r_star", p.r_star));
            }
            Err(e) => report.push_error(format!("l({n})"), &e),
        }
    }
    Ok(report)
}

pub(super) fn dual_beta_pair(ctx: &Ctx) -> Result<VerificationReport> {
    let mut report = ctx.report();
    let grid = geomspace(1e-2, 1e2, ctx.trials);
    for (beta, u, _) in beta_pairs() {
        let mut worst = Tightest::default();
        for &r in &grid {
            let want = (1.0 - beta) * r.powf(1.0 / (1.0 - beta));
            match dual_legendre(&u, r) {
                Ok(d) => worst.offer(log_rel_case(format!("beta = {beta}"), d.log_value, want, ctx.tolerance).with("r", r)),
                Err(e) => report.push_error(format!("beta = {beta}, r = {r}"), &e),
            }
        }
        worst.push_into(&mut report);
    }
    Ok(report)
}

pub(super) fn log_concave(ctx: &Ctx) -> Result<VerificationReport> {
    let mut report = ctx.report();
    for u in ctx.functions_or(builtins) {
        let logs: Result<Vec<f64>> = (0..=ctx.trials).map(|n| u.log_ell_n(n)).collect();
        let logs = match logs {
            Ok(l) => l,
            Err(e) => {
                report.push_error(u.name(), &e);
                continue;
            }
        };
        let mut worst = Tightest::default();
        for n in 0..ctx.trials.saturating_sub(1) {
            let d2 = logs[n] + logs[n + 2] - 2.0 * logs[n + 1];
            worst.offer(CaseResult::new(u.name(), ctx.tolerance - d2).with("n", n as f64).with("second_difference", d2));
        }
        worst.push_into(&mut report);
    }
    Ok(report)
}

/// `sup_{t ≥ 0} [log ℓ(t) + t log r]`.
fn sup_over_t(u: &GrowthFunction, r: f64) -> Result<f64> {
    let at_zero = log_ell(u, 0.0)?;
    let m = maximize(
        |x| {
            let t = x.exp();
            Ok(log_ell(u, t)? + t * r.ln())
        },
        &SearchOptions {
            x0: r.max(1.0).ln(),
            lower: (1e-8f64).ln(),
            upper: (1e8f64).ln(),
            ..SearchOptions::default()
        },
    )?;
    Ok(m.value.max(at_zero))
}

pub(super) fn recovers_u(ctx: &Ctx) -> Result<VerificationReport> {
    let mut report = ctx.report();
    let grid = geomspace(0.1, 100.0, ctx.trials);
    for u in ctx.functions_or(builtins) {
        if !check_condition(&u, GrowthCondition::LogExpConvex).passed() {
            report = report.param(&format!("skipped {}", u.name()), "not (log, exp)-convex on the grid");
            continue;
        }
        let mut worst = Tightest::default();
        for &r in &grid {
            let lu = match u.log_eval(r) {
                Ok(v) if v.is_finite() && v <= 100.0 => v,
                _ => continue,
            };
            match sup_over_t(&u, r) {
                Ok(s) => worst.offer(log_rel_case(format!("{}: sup", u.name()), s, lu, ctx.tolerance).with("r", r)),
                Err(e) => report.push_error(format!("{}: sup at r = {r}", u.name()), &e),
            }
        }
        worst.push_into(&mut report);

        let logs: Result<Vec<f64>> = (0..=60).map(|n| u.log_ell_n(n)).collect();
        let logs = match logs {
            Ok(l) => l,
            Err(e) => {
                report.push_error(u.name(), &e);
                continue;
            }
        };
        let mut root = Tightest::default();
        for n in 1..60 {
            let (a, b) = (logs[n] / n as f64, logs[n + 1] / (n + 1) as f64);
            root.offer(CaseResult::new(format!("{}: l^(1/t) decreasing", u.name()), a - b + 1e-12).with("n", n as f64));
        }
        root.push_into(&mut report);
    }
    Ok(report)
}

pub(super) fn supermultiplicative(ctx: &Ctx) -> Result<VerificationReport> {
    let k = 2.0;
    let mut report = ctx.report().param("k", k);
    let n_max = ctx.trials;
    for u in ctx.functions_or(builtins) {
        if !u.flags().u3 {
            continue;
        }
        let logs: Result<Vec<f64>> = (0..=2 * n_max).map(|n| u.log_ell_n(n)).collect();
        let logs = match logs {
            Ok(l) => l,
            Err(e) => {
                report.push_error(u.name(), &e);
                continue;
            }
        };
        let g = |n: usize| logs[n] + k * crate::numeric::n_ln_n(n);
        let mut convex = Tightest::default();
        for n in 0..2 * n_max - 1 {
            let d2 = g(n) + g(n + 2) - 2.0 * g(n + 1);
            convex.offer(CaseResult::new(format!("{}: l(t) t^(kt) log-convex", u.name()), d2 + ctx.tolerance).with("n", n as f64));
        }
        convex.push_into(&mut report);
        let mut mult = Tightest::default();
        for n in 0..=n_max {
            for m in n..=n_max {
                let lhs = logs[n] + logs[m];
                let rhs = logs[0] + k * (n + m) as f64 * std::f64::consts::LN_2 + logs[n + m];
                mult.offer(
                    CaseResult::log_le(format!("{}: l(n) l(m) <= l(0) 2^(k(n+m)) l(n+m)", u.name()), lhs, rhs, ctx.tolerance)
                        .with("n", n as f64)
                        .with("m", m as f64),
                );
            }
        }
        mult.push_into(&mut report);
    }
    Ok(report)
}

fn log_l(u: &GrowthFunction, r: f64) -> Result<f64> {
    Ok(l_function(u, r, &TruncationPolicy::default())?.log_value)
}

pub(super) fn l_envelope(ctx: &Ctx) -> Result<VerificationReport> {
    let mut report = ctx.report().param("log_u_cap", LOG_U_CAP);
    let grid = geomspace(1e-3, ctx.r_max, ctx.trials);
    for u in ctx.functions_or(builtins) {
        if check_condition(&u, GrowthCondition::LogExpConvex).passed() {
            for a in [1.5f64, 2.0, 4.0] {
                let mut worst = Tightest::default();
                for &r in grid.iter().filter(|&&r| within_cap(&u, a * r)) {
                    let rhs = (std::f64::consts::E * a / a.ln()).ln() + u.log_eval(a * r)?;
                    match log_l(&u, r) {
                        Ok(l) => worst.offer(CaseResult::log_le(format!("{}: L(r) <= (ea/log a) u(ar), a = {a}", u.name()), l, rhs, ctx.tolerance).with("r", r)),
                        Err(e) => report.push_error(format!("{}: L({r})", u.name()), &e),
                    }
                }
                worst.push_into(&mut report);
            }
        }
        if increasing_x2_convex(&u) {
            // u(r) / L(4r) over the grid; bounded if its maximum is not at the top end.
            let mut ratios = Vec::new();
            for &r in grid.iter().filter(|&&r| within_cap(&u, 4.0 * r)) {
                match log_l(&u, 4.0 * r) {
                    Ok(l) => ratios.push(u.log_eval(r)? - l),
                    Err(e) => report.push_error(format!("{}: L({})", u.name(), 4.0 * r), &e),
                }
            }
            if ratios.len() >= 4 {
                let split = ratios.len() * 3 / 4;
                let head = ratios[..split].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let tail = ratios[split..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                report.push(
                    CaseResult::new(format!("{}: u(r) <= C L(4r)", u.name()), head - tail + ctx.tolerance)
                        .with("C", head.max(tail).exp()),
                );
            }
        }
    }
    Ok(report)
}

pub(super) fn dual_regularity(ctx: &Ctx) -> Result<VerificationReport> {
    let mut report = ctx.report();
    for u in ctx.functions_or(builtins) {
        if !u.flags().in_c_plus_half {
            continue;
        }
        let dual = GrowthFunction::dual_of(&u);
        for cond in [GrowthCondition::U1, GrowthCondition::U3, GrowthCondition::CPlusHalf] {
            let c = check_condition(&dual, cond);
            report.push(flag_case(format!("{}: {cond}", dual.name()), c.passed()));
        }
    }
    Ok(report)
}

pub(super) fn dual_legendre_identity(ctx: &Ctx) -> Result<VerificationReport> {
    let mut report = ctx.report();
    let default = || {
        let mut v = vec![GrowthFunction::pure_exp()];
        v.extend(beta_pairs().into_iter().map(|p| p.1));
        v
    };
    let mut ts = vec![0.5];
    ts.extend((1..=20).map(|n| n as f64));
    for u in ctx.functions_or(default) {
        let dual = GrowthFunction::dual_of(&u);
        let mut worst = Tightest::default();
        for &t in &ts {
            let got = log_ell(&dual, t).and_then(|a| Ok((a, log_ell(&u, t)?)));
            match got {
                Ok((ld, lu)) => {
                    let want = 2.0 * t - lu - 2.0 * t * t.ln();
                    worst.offer(log_rel_case(u.name(), ld, want, ctx.tolerance).with("t", t));
                }
                Err(e) => report.push_error(format!("{}: t = {t}", u.name()), &e),
            }
        }
        worst.push_into(&mut report);
    }
    Ok(report)
}

pub(super) fn dual_involution(ctx: &Ctx) -> Result<VerificationReport> {
    let mut report = ctx.report();
    let grid = geomspace(1e-2, 1e2, ctx.trials);
    for u in ctx.functions_or(builtins) {
        if !increasing_x2_convex(&u) {
            continue;
        }
        let twice = GrowthFunction::dual_of(&GrowthFunction::dual_of(&u));
        let mut worst = Tightest::default();
        let mut beyond = 0usize;
        for &r in &grid {
            let want = match u.log_eval(r) {
                Ok(v) if v.is_finite() => v,
                _ => continue,
            };
            match twice.log_eval(r) {
                // The outer maximizer sits near s = (log u(r))^2 / r, past
                // e^700 once log u(r) is this large.
                Ok(got) if got == f64::INFINITY && want > BEYOND_RANGE_LOG_U => beyond += 1,
                Ok(got) => worst.offer(log_rel_case(u.name(), got, want, ctx.tolerance).with("r", r)),
                Err(e) => report.push_error(format!("{}: r = {r}", u.name()), &e),
            }
        }
        worst.push_into(&mut report);
        if beyond > 0 {
            report = report.param(&format!("{}: points beyond double range", u.name()), beyond as f64);
        }
    }
    Ok(report)
}

fn equivalence_case(label: String, e: &Equivalence) -> CaseResult {
    match e {
        Equivalence::Certificate { c1, a1, c2, a2 } => flag_case(label, true).with("c1", *c1).with("a1", *a1).with("c2", *c2).with("a2", *a2),
        Equivalence::Counterexample { r, .. } => flag_case(label, false).with("r", *r),
    }
}

pub(super) fn l_sharp_equivalence(ctx: &Ctx) -> Result<VerificationReport> {
    let mut report = ctx.report().param("r_max", ctx.r_max);
    let default = || {
        let mut v = vec![GrowthFunction::pure_exp()];
        v.extend(beta_pairs().into_iter().map(|p| p.1));
        v
    };
    for u in ctx.functions_or(default) {
        let dual = GrowthFunction::dual_of(&u);
        let r_max = evaluable_up_to(&dual, ctx.r_max);
        let l_dual = l_function_of(&dual, &dual);
        let l_sharp = l_sharp_of(&u, &dual);
        report.push(equivalence_case(format!("{}: u* ~ L_(u*)", u.name()), &equivalence_witness(&l_dual, &dual, r_max)).with("r_max", r_max));
        report.push(equivalence_case(format!("{}: u* ~ L#_u", u.name()), &equivalence_witness(&l_sharp, &dual, r_max)).with("r_max", r_max));
    }
    Ok(report)
}

/// Largest `r ≤ r_max` on a halving ladder with `log u(r) ≤ LOG_U_CAP`.
fn evaluable_up_to(u: &GrowthFunction, r_max: f64) -> f64 {
    let mut r = r_max;
    while r > 1e-3 && !within_cap(u, r) {
        r *= 0.9;
    }
    r
}

/// `L_u` as a growth function; reported as overflow wherever `size`
/// (a function of the same order) exceeds the summation cap.
fn l_function_of(u: &GrowthFunction, size: &GrowthFunction) -> GrowthFunction {
    let (u, size) = (u.clone(), size.clone());
    GrowthFunction::custom(format!("L[{}]", u.name()), Flags::default(), move |r| {
        if !within_cap(&size, r) {
            return f64::INFINITY;
        }
        l_function(&u, r, &TruncationPolicy::default()).map(|s| s.log_value).unwrap_or(f64::NAN)
    })
}

fn l_sharp_of(u: &GrowthFunction, size: &GrowthFunction) -> GrowthFunction {
    let (u, size) = (u.clone(), size.clone());
    GrowthFunction::custom(format!("L#[{}]", u.name()), Flags::default(), move |r| {
        if !within_cap(&size, r) {
            return f64::INFINITY;
        }
        l_sharp_function(&u, r, &TruncationPolicy::default()).map(|s| s.log_value).unwrap_or(f64::NAN)
    })
}

pub(super) fn l_square(ctx: &Ctx) -> Result<VerificationReport> {
    let mut report = ctx.report().param("log_u_cap", LOG_U_CAP);
    let grid = geomspace(1e-3, ctx.r_max, ctx.trials);
    for u in ctx.functions_or(builtins) {
        if !increasing_x2_convex(&u) {
            continue;
        }
        let l0 = u.log_ell_n(0)?;
        let mut worst = Tightest::default();
        for &r in grid.iter().filter(|&&r| within_cap(&u, 8.0 * r)) {
            match log_l(&u, r).and_then(|a| Ok((a, log_l(&u, 8.0 * r)?))) {
                Ok((a, b)) => worst.offer(CaseResult::log_le(format!("{}: L(r)^2 <= l(0) L(8r)", u.name()), 2.0 * a, l0 + b, ctx.tolerance).with("r", r)),
                Err(e) => report.push_error(format!("{}: r = {r}", u.name()), &e),
            }
        }
        worst.push_into(&mut report);
        let r_max = evaluable_up_to(&u.power(2.0), ctx.r_max);
        report.push(equivalence_case(format!("{}: u ~ u^2", u.name()), &equivalence_witness(&u, &u.power(2.0), r_max)).with("r_max", r_max));
    }
    Ok(report)
}

pub(super) fn l_sqrt_envelope(ctx: &Ctx) -> Result<VerificationReport> {
    let mut report = ctx.report().param("log_u_cap", LOG_U_CAP);
    let grid = geomspace(1e-3, 50.0, ctx.trials);
    let c = (2.0 * std::f64::consts::E / std::f64::consts::LN_2).ln();
    for u in ctx.functions_or(builtins) {
        if !increasing_x2_convex(&u) {
            continue;
        }
        let l0 = u.log_ell_n(0)?;
        let mut worst = Tightest::default();
        for &r in grid.iter().filter(|&&r| within_cap(&u, r)) {
            let rhs = 0.5 * (l0 + c + u.log_eval(16.0 * r)?);
            match log_l(&u, r) {
                Ok(l) => worst.offer(CaseResult::log_le(u.name(), l, rhs, ctx.tolerance).with("r", r)),
                Err(e) => report.push_error(format!("{}: r = {r}", u.name()), &e),
            }
        }
        worst.push_into(&mut report);
    }
    Ok(report)
}

pub(super) fn monotone_envelope_suite(ctx: &Ctx) -> Result<VerificationReport> {
    let mut report = ctx.report();
    let flags = Flags {
        in_c_plus_log: true,
        in_c_plus_half: true,
        ..Flags::default()
    };
    let bump = GrowthFunction::custom("exp((r-1)^2)", flags, |r| (r - 1.0) * (r - 1.0));
    let v = monotone_envelope(&bump)?;
    for r in [0.0, 0.3, 0.99] {
        report.push(CaseResult::new(format!("envelope flat at r = {r}"), ctx.tolerance - v.log_eval(r)?.abs()));
    }
    for r in [1.5, 4.0] {
        report.push(log_rel_case(format!("envelope equals u at r = {r}"), v.log_eval(r)?, bump.log_eval(r)?, ctx.tolerance));
    }
    for t in [0.0, 0.5, 1.0, 2.0, 3.0, 5.0] {
        report.push(log_rel_case(format!("l_v({t}) = l_u({t})"), log_ell(&v, t)?, log_ell(&bump, t)?, ctx.tolerance));
    }
    for u in [GrowthFunction::pure_exp(), GrowthFunction::w_sqrt_log(2)?] {
        let env = monotone_envelope(&u)?;
        report.push(flag_case(format!("{} is its own envelope", u.name()), env.same_as(&u)));
    }
    Ok(report)
}

pub(super) fn scale_covariance(ctx: &Ctx) -> Result<VerificationReport> {
    let mut report = ctx.report();
    for u in ctx.functions_or(builtins) {
        let mut worst = Tightest::default();
        for c in [0.5f64, 3.0] {
            let scaled = u.scaled(c);
            for t in [0.5, 2.0, 7.0] {
                match log_ell(&scaled, t).and_then(|a| Ok((a, log_ell(&u, t)?))) {
                    Ok((a, b)) => worst.offer(log_rel_case(u.name(), a, b + c.ln(), ctx.tolerance).with("c", c).with("t", t)),
                    Err(e) => report.push_error(format!("{}: c = {c}, t = {t}", u.name()), &e),
                }
            }
        }
        worst.push_into(&mut report);
    }
    Ok(report)
}

type ClosedForm = Box<dyn Fn(f64) -> f64>;

pub(super) fn theta_conversion(ctx: &Ctx) -> Result<VerificationReport> {
    let mut report = ctx.report();
    let ts = geomspace(0.01, 10.0, ctx.trials);
    let mut closed: Vec<(GrowthFunction, ClosedForm)> = vec![(GrowthFunction::pure_exp(), Box::new(|t: f64| t * t / 2.0))];
    for (beta, u, _) in beta_pairs() {
        closed.push((u, Box::new(move |t: f64| (1.0 + beta) / 2.0 * t.powf(2.0 / (1.0 + beta)))));
    }
    for (u, theta) in &closed {
        let view = ThetaView::from_growth(u);
        let mut worst = Tightest::default();
        for &t in &ts {
            worst.offer(rel_case(format!("theta of {}", u.name()), view.eval(t), theta(t), ctx.tolerance).with("t", t));
        }
        worst.push_into(&mut report);
    }

    let quadratic = ThetaView::from_fn(|t| t * t / 2.0);
    let mut worst = Tightest::default();
    for &s in &ts {
        let (v, _) = quadratic.dual(s)?;
        worst.offer(rel_case("quadratic is self-conjugate", v, s * s / 2.0, ctx.tolerance).with("s", s));
    }
    worst.push_into(&mut report);

    let rs = geomspace(0.01, 100.0, ctx.trials);
    for u in ctx.functions_or(builtins) {
        let view = ThetaView::from_growth(&u);
        let back = view.to_growth("round trip", u.flags());
        let mut trip = Tightest::default();
        let mut conj = Tightest::default();
        for &r in &rs {
            let lu = u.log_eval(r)?;
            if lu.is_finite() {
                trip.offer(log_rel_case(format!("{}: round trip", u.name()), back.log_eval(r)?, lu, ctx.tolerance).with("r", r));
            }
            let label = format!("{}: log u*(r) = 2 theta*(sqrt r)", u.name());
            match (view.dual(r.sqrt()), dual_legendre(&u, r)) {
                (Ok((th, _)), Ok(du)) => conj.offer(log_rel_case(label, 2.0 * th, du.log_value, ctx.tolerance).with("r", r)),
                // Both suprema run past double range: the two routes agree.
                (Err(Error::UnboundedObjective { .. }), Err(Error::UnboundedObjective { .. })) => {
                    conj.offer(flag_case(label, true).with("r", r).with("unbounded", 1.0))
                }
                (Err(e), _) | (_, Err(e)) => report.push_error(format!("{}: r = {r}", u.name()), &e),
            }
        }
        trip.push_into(&mut report);
        conj.push_into(&mut report);
    }
    Ok(report)
}

pub(super) fn generating_beta(ctx: &Ctx) -> Result<VerificationReport> {
    let mut report = ctx.report().param("r_max", ctx.r_max);
    for beta in [0.25, 0.5] {
        let seq = WeightSequence::factorial_power(beta);
        let g_alpha = GrowthFunction::generating(&seq, Direction::GAlpha);
        let g_inv = GrowthFunction::generating(&seq, Direction::GInvAlpha);
        let minus = GrowthFunction::beta_exp(-beta)?;
        let plus = GrowthFunction::beta_exp(beta)?;
        report.push(equivalence_case(format!("G_alpha ~ {}", minus.name()), &equivalence_witness(&g_alpha, &minus, ctx.r_max)));
        report.push(equivalence_case(format!("G_(1/alpha) ~ {}", plus.name()), &equivalence_witness(&g_inv, &plus, ctx.r_max)));
    }
    Ok(report)
}
