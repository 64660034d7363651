use super::{flag_case, log_rel_case, Ctx, Tightest};
use crate::error::Result;
use crate::growth::{builtins, l_function, l_sharp_function, legendre, GrowthFunction};
use crate::numeric::{ln_binomial, ln_factorial, n_ln_n, TruncationPolicy};
use crate::report::{CaseResult, CheckResult, VerificationReport};
use crate::sequences::{check, sequence_equivalence, Direction, SequenceCondition, WeightSequence, DEFAULT_BELL_N};

fn regular(u: &GrowthFunction) -> bool {
    let f = u.flags();
    f.u0 && f.u2 && f.u3
}

fn check_case(label: String, c: &CheckResult) -> CaseResult {
    let mut case = flag_case(label, c.passed());
    for (k, v) in c.witness.iter().chain(&c.counterexample) {
        case = case.with(k, *v);
    }
    case
}

/// Sequences for the implication suites: the explicit families, the
/// weights of the regular built-ins, and two sequences that fail the
/// hypotheses.
fn catalog() -> Result<Vec<WeightSequence>> {
    let mut out = vec![
        WeightSequence::ones(),
        WeightSequence::factorial_power(0.5),
        WeightSequence::factorial_power(-0.5),
    ];
    for k in 1..=3 {
        out.push(WeightSequence::bell(k, DEFAULT_BELL_N)?);
    }
    for u in builtins().iter().filter(|u| regular(u)) {
        out.push(WeightSequence::from_growth(u));
    }
    out.push(WeightSequence::explicit_logs((0..=DEFAULT_BELL_N).map(|n| (n * n) as f64).collect())?);
    out.push(WeightSequence::explicit_logs((0..=DEFAULT_BELL_N).map(|n| -((n * n) as f64)).collect())?);
    Ok(out)
}

fn growth_sequences(ctx: &Ctx, keep: impl Fn(&GrowthFunction) -> bool) -> Vec<(String, WeightSequence)> {
    ctx.functions_or(builtins)
        .into_iter()
        .filter(|u| keep(u))
        .map(|u| (u.name(), WeightSequence::from_growth(&u)))
        .collect()
}

pub(super) fn alpha_log_concave(ctx: &Ctx) -> Result<VerificationReport> {
    let mut report = ctx.report();
    for (name, seq) in growth_sequences(ctx, |u| u.flags().in_c_plus_log) {
        report.push(check_case(format!("{name}: B2tilde"), &check(&seq, SequenceCondition::B2Tilde, ctx.trials)));
    }
    Ok(report)
}

pub(super) fn alpha_near_b2(ctx: &Ctx) -> Result<VerificationReport> {
    let mut report = ctx.report();
    for (name, seq) in growth_sequences(ctx, regular) {
        // log λ(n)/n! = log α(n) + log n! - 2n log n
        let lam: Result<Vec<f64>> = (0..=ctx.trials).map(|n| Ok(seq.log_alpha(n)? + ln_factorial(n) - 2.0 * n_ln_n(n))).collect();
        match lam {
            Ok(lam) => {
                let mut worst = Tightest::default();
                for n in 0..ctx.trials.saturating_sub(1) {
                    let d2 = lam[n] + lam[n + 2] - 2.0 * lam[n + 1];
                    worst.offer(CaseResult::new(format!("{name}: lambda(n)/n! log-concave"), ctx.tolerance - d2).with("n", n as f64));
                }
                worst.push_into(&mut report);
            }
            Err(e) => report.push_error(name.clone(), &e),
        }
        report.push(check_case(format!("{name}: nearB2"), &check(&seq, SequenceCondition::NearB2, ctx.trials)));
    }
    Ok(report)
}

pub(super) fn alpha_conditions(ctx: &Ctx) -> Result<VerificationReport> {
    let mut report = ctx.report();
    for (name, seq) in growth_sequences(ctx, regular) {
        for cond in [SequenceCondition::A1, SequenceCondition::A2, SequenceCondition::NearB2, SequenceCondition::B2Tilde] {
            report.push(check_case(format!("{name}: {cond}"), &check(&seq, cond, ctx.trials)));
        }
    }
    Ok(report)
}

pub(super) fn alpha_identities(ctx: &Ctx) -> Result<VerificationReport> {
    let mut report = ctx.report();
    let policy = TruncationPolicy::default();
    for u in ctx.functions_or(builtins) {
        let seq = WeightSequence::from_growth(&u);
        let mut worst = Tightest::default();
        for n in 0..=ctx.trials {
            let fresh = legendre(&u, n as f64)?.log_ell;
            worst.offer(log_rel_case(format!("{}: alpha(n) n! l(n) = 1", u.name()), seq.log_alpha(n)?, -ln_factorial(n) - fresh, ctx.tolerance).with("n", n as f64));
        }
        worst.push_into(&mut report);
        if !regular(&u) {
            continue;
        }
        for r in [0.5, 1.0, 2.0] {
            let pairs = [
                (Direction::GAlpha, l_sharp_function(&u, r, &policy), "G_alpha = L#_u"),
                (Direction::GInvAlpha, l_function(&u, r, &policy), "G_(1/alpha) = L_u"),
            ];
            for (dir, want, label) in pairs {
                match seq.generating_function(dir, r).and_then(|g| Ok((g.log_value, want?.log_value))) {
                    Ok((g, w)) => report.push(log_rel_case(format!("{}: {label}", u.name()), g, w, ctx.tolerance).with("r", r)),
                    Err(e) => report.push_error(format!("{}: {label} at r = {r}", u.name()), &e),
                }
            }
        }
    }

    let ones = WeightSequence::ones();
    report.push(log_rel_case("G_alpha(1) = e for alpha = 1", ones.generating_function(Direction::GAlpha, 1.0)?.log_value, 1.0, ctx.tolerance));

    for beta in [0.25, 0.5] {
        let from_u = WeightSequence::from_growth(&GrowthFunction::beta_exp(beta)?);
        let eq = sequence_equivalence(&from_u, &WeightSequence::factorial_power(beta), ctx.trials)?;
        report.push(flag_case(format!("alpha of beta_exp({beta}) ~ (n!)^{beta}"), eq.is_certificate()));
    }
    let bell2 = WeightSequence::bell(2, DEFAULT_BELL_N)?;
    let eq = sequence_equivalence(&ones, &bell2, ctx.trials)?;
    report.push(flag_case("Bell numbers of order 2 are not equivalent to 1", !eq.is_certificate()));
    Ok(report)
}

/// Bell numbers from the Bell triangle.
fn bell_triangle(n_max: usize) -> Vec<u128> {
    let mut out = vec![1u128];
    let mut row = vec![1u128];
    for _ in 0..n_max {
        let mut next = vec![*row.last().expect("row is never empty")];
        for v in &row {
            let last = *next.last().expect("row is never empty");
            next.push(last + v);
        }
        out.push(next[0]);
        row = next;
    }
    out
}

pub(super) fn bell_numbers(ctx: &Ctx) -> Result<VerificationReport> {
    let mut report = ctx.report();
    let oracle = bell_triangle(25);
    let b1 = WeightSequence::bell(1, DEFAULT_BELL_N)?;
    for (n, &want) in oracle.iter().enumerate().take(7) {
        let got = b1.alpha(n)?;
        report.push(flag_case(format!("b_1({n}) = {want}"), got.round() == want as f64).with("got", got));
    }
    let mut worst = Tightest::default();
    for (n, &want) in oracle.iter().enumerate().skip(7) {
        worst.offer(log_rel_case("b_1(n) against the triangle", b1.log_alpha(n)?, (want as f64).ln(), ctx.tolerance).with("n", n as f64));
    }
    worst.push_into(&mut report);

    // Exponential generating functions e^{e^r - 1} and e^{e^{e^r} - e}.
    let b2 = WeightSequence::bell(2, DEFAULT_BELL_N)?;
    for r in [0.25f64, 0.5, 1.0] {
        let inner = r.exp_m1();
        report.push(log_rel_case(format!("G for b_1 at r = {r}"), b1.generating_function(Direction::GAlpha, r)?.log_value, inner, ctx.tolerance));
        report.push(log_rel_case(format!("G for b_2 at r = {r}"), b2.generating_function(Direction::GAlpha, r)?.log_value, std::f64::consts::E * inner.exp_m1(), ctx.tolerance));
    }

    for k in 2..=3 {
        let seq = WeightSequence::bell(k, DEFAULT_BELL_N)?;
        report.push(check_case(format!("b_{k}: B2"), &check(&seq, SequenceCondition::B2, ctx.trials)));
    }
    Ok(report)
}

pub(super) fn binomial_submultiplicative(ctx: &Ctx) -> Result<VerificationReport> {
    let mut report = ctx.report();
    let default = || {
        let mut v = vec![WeightSequence::ones(), WeightSequence::factorial_power(0.5)];
        v.extend((1..=3).filter_map(|k| WeightSequence::bell(k, DEFAULT_BELL_N).ok()));
        v
    };
    for seq in ctx.sequences_or(default) {
        let name = seq.name();
        let lb = seq.prefix(ctx.trials)?;
        if !check(&seq, SequenceCondition::B2, ctx.trials).passed() || lb[0].abs() > 1e-12 {
            report = report.param(&format!("skipped {name}"), "needs beta(n)/n! log-concave and beta(0) = 1");
            continue;
        }
        let mut binom = Tightest::default();
        let mut power = Tightest::default();
        for n in 0..=ctx.trials {
            for m in n..=ctx.trials - n {
                let prod = lb[n] + lb[m];
                let mid = ln_binomial(n + m, n) + prod;
                binom.offer(CaseResult::log_le(format!("{name}: beta(n+m) <= C(n+m,n) beta(n) beta(m)"), lb[n + m], mid, ctx.tolerance).with("n", n as f64).with("m", m as f64));
                power.offer(CaseResult::log_le(format!("{name}: C(n+m,n) beta(n) beta(m) <= 2^(n+m) beta(n) beta(m)"), mid, (n + m) as f64 * std::f64::consts::LN_2 + prod, ctx.tolerance).with("n", n as f64).with("m", m as f64));
            }
        }
        binom.push_into(&mut report);
        power.push_into(&mut report);
    }
    Ok(report)
}

fn implication(ctx: &Ctx, hyp: SequenceCondition, concl: SequenceCondition, alpha0_ok: impl Fn(f64) -> bool) -> Result<VerificationReport> {
    let mut report = ctx.report();
    let seqs = match &ctx.sequences {
        Some(s) => s.clone(),
        None => catalog()?,
    };
    for seq in seqs {
        let h = check(&seq, hyp, ctx.trials);
        let la0 = seq.log_alpha(0)?;
        let applies = h.passed() && alpha0_ok(la0);
        let c = check(&seq, concl, ctx.trials);
        let mut case = flag_case(format!("{}: {hyp} => {concl}", seq.name()), !applies || c.passed())
            .with("hypothesis", applies as u8 as f64)
            .with("conclusion", c.passed() as u8 as f64);
        if let Some(v) = c.witness.get("c") {
            case = case.with("c", *v);
        }
        report.push(case);
    }
    Ok(report)
}

pub(super) fn near_b2_implies_c2(ctx: &Ctx) -> Result<VerificationReport> {
    implication(ctx, SequenceCondition::NearB2, SequenceCondition::C2, |la0| la0 >= -1e-12)
}

pub(super) fn near_b2tilde_implies_c3(ctx: &Ctx) -> Result<VerificationReport> {
    implication(ctx, SequenceCondition::NearB2Tilde, SequenceCondition::C3, |la0| la0 <= 1e-12)
}

pub(super) fn b1_matches_near_b2(ctx: &Ctx) -> Result<VerificationReport> {
    let mut report = ctx.report();
    let seqs = match &ctx.sequences {
        Some(s) => s.clone(),
        None => catalog()?,
    };
    for (i, seq) in seqs.into_iter().enumerate() {
        for (b1, near) in [
            (SequenceCondition::B1, SequenceCondition::NearB2),
            (SequenceCondition::B1Tilde, SequenceCondition::NearB2Tilde),
        ] {
            let a = check(&seq, b1, ctx.trials).passed();
            let b = check(&seq, near, ctx.trials).passed();
            report.push(
                flag_case(format!("{} (#{i}): {b1} = {near}", seq.name()), a == b)
                    .with(&b1.to_string(), a as u8 as f64)
                    .with(&near.to_string(), b as u8 as f64),
            );
        }
    }
    Ok(report)
}

pub(super) fn stirling_sandwich(ctx: &Ctx) -> Result<VerificationReport> {
    let mut report = ctx.report();
    let mut low = Tightest::default();
    let mut high = Tightest::default();
    for n in 1..=ctx.trials {
        let lf = ln_factorial(n);
        let mid = n_ln_n(n) - n as f64;
        let lower = -1.0 - n as f64 / 2.0 * std::f64::consts::LN_2 + lf;
        low.offer(CaseResult::new("e^-1 2^(-n/2) n! <= (n/e)^n", mid - lower).with("n", n as f64));
        high.offer(CaseResult::new("(n/e)^n <= n!", lf - mid).with("n", n as f64));
    }
    low.push_into(&mut report);
    high.push_into(&mut report);
    Ok(report)
}
