use serde::Serialize;

use super::binomial::{g_prime_sum, g_weighted_sum, MAX_RELAYS};
use super::oracle::{oracle_epsilon, AfVariant, DbjBound, EventSpec, LowerCase, OracleParams};
use super::{
    agrees, relative_error, AnalyticError, Analysis, PerPacketIntercept, Provenance, TermCheck,
    TermSource,
};
use crate::channel::{DerivedThresholds, LinkParams, Protocol};

/// `1 - e^{-x}` for any real `x`; the AF and DBJ sums evaluate it at
/// negative arguments when an `I` constant is negative.
fn f(x: f64) -> f64 {
    -(-x).exp_m1()
}

fn check_k(k: usize) -> Result<(), AnalyticError> {
    match k {
        0 => Err(AnalyticError::NoRelays),
        k if k > MAX_RELAYS => Err(AnalyticError::TooManyRelays(k)),
        _ => Ok(()),
    }
}

/// Slot-race intercept probability `(1 - ε_R) / (1 - ε_D ε_R)`: the relays
/// succeed no later than the destination's first success.
pub fn race_intercept(eps_d: f64, eps_r: f64) -> f64 {
    (1.0 - eps_r) / (1.0 - eps_d * eps_r)
}

pub fn per_packet_intercept_direct(
    links: &LinkParams,
    k: usize,
    th: &DerivedThresholds,
) -> Result<PerPacketIntercept, AnalyticError> {
    check_k(k)?;
    let eps_d = f(links.lambda_sd * th.tau);
    let eps_r = f(links.lambda_sr * th.tau).powi(k as i32);
    Ok(PerPacketIntercept::exact(
        checked_race(eps_d, eps_r)?,
        Provenance::ClosedForm,
    ))
}

/// DF: the destination only ever decodes on its own (once a relay decodes,
/// the packet is already intercepted), so the race runs at the two-phase
/// threshold `τ'` on both sides.
pub fn per_packet_intercept_df(
    links: &LinkParams,
    k: usize,
    th: &DerivedThresholds,
) -> Result<PerPacketIntercept, AnalyticError> {
    check_k(k)?;
    let eps_d = f(links.lambda_sd * th.tau_prime);
    let eps_r = f(links.lambda_sr * th.tau_prime).powi(k as i32);
    Ok(PerPacketIntercept::exact(
        checked_race(eps_d, eps_r)?,
        Provenance::ClosedForm,
    ))
}

/// Per-`(k1, k2)` constants of the AF binomial sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AfTerms {
    pub i1: f64,
    pub i2: f64,
    pub a1: f64,
    pub a2: f64,
    pub variant: AfVariant,
}

pub fn af_terms(
    links: &LinkParams,
    k: usize,
    th: &DerivedThresholds,
    variant: AfVariant,
    k1: usize,
    k2: usize,
) -> AfTerms {
    let (ls, ld, lsd) = (links.lambda_sr, links.lambda_rd, links.lambda_sd);
    let tp = th.tau_prime;
    let rest = (k - 1 - k1 - k2) as f64;
    let i1 = (ls + ld) * (k2 as f64 + 1.0) + ld * rest;
    // The lower bound swaps τ₁ for τ' and drops the 1/2 on λ_SD.
    let (shift, i2) = match variant {
        AfVariant::Upper => (th.tau1, i1 - 0.5 * lsd),
        AfVariant::Lower => (tp, i1 - lsd),
    };
    let tail = (-lsd * shift).exp();
    let tol = 1e-9 * lsd.max(ls).max(ld);
    let a1 = if i2.abs() < tol {
        ls * tail * tp
    } else {
        ls * tail / i2 * f(i2 * tp)
    };
    let a2 = if (i2 - ls).abs() < tol {
        ld * tail / ls * (f(ls * tp) - ls * tp * (-ls * tp).exp())
    } else if i2.abs() < tol {
        ld * tail / -ls * (f(ls * tp) - ls * tp)
    } else {
        ld * tail / (i2 - ls) * (f(ls * tp) - ls / i2 * f(i2 * tp))
    };
    AfTerms {
        i1,
        i2,
        a1,
        a2,
        variant,
    }
}

/// Closed-form probability that all relays and the destination fail in a slot.
pub fn af_eps_both(links: &LinkParams, k: usize, th: &DerivedThresholds, variant: AfVariant) -> f64 {
    let (ls, ld) = (links.lambda_sr, links.lambda_rd);
    let tp = th.tau_prime;
    g_weighted_sum(
        f(ls * tp),
        |k1, k2| {
            let t = af_terms(links, k, th, variant, k1, k2);
            ls / t.i1 * f(t.i1 * tp) - t.a1
                + ld / (t.i1 - ls) * (f(ls * tp) - ls / t.i1 * f(t.i1 * tp))
                - t.a2
        },
        k,
    )
}

/// Closed-form probability that all relays fail and the destination succeeds.
pub fn af_eps_only_dest(
    links: &LinkParams,
    k: usize,
    th: &DerivedThresholds,
    variant: AfVariant,
) -> f64 {
    let ls = links.lambda_sr;
    g_weighted_sum(
        f(ls * th.tau_prime),
        |k1, k2| {
            let t = af_terms(links, k, th, variant, k1, k2);
            t.a1 + t.a2
        },
        k,
    )
}

fn resolve(
    term: String,
    verbatim: f64,
    alternates: &[(&str, f64)],
    exact: Option<f64>,
    oracle: f64,
) -> TermCheck {
    let relative = relative_error(verbatim, oracle);
    let (used, source) = if agrees(verbatim, oracle) {
        (verbatim, TermSource::Verbatim)
    } else if let Some((name, value)) = alternates.iter().find(|(_, v)| agrees(*v, oracle)) {
        (*value, TermSource::AlternateReading(name.to_string()))
    } else {
        match exact {
            Some(value) if agrees(value, oracle) => (value, TermSource::Exact),
            _ => (oracle, TermSource::Oracle),
        }
    };
    TermCheck {
        term,
        verbatim,
        oracle,
        used,
        relative_error: relative,
        source,
    }
}

fn race_from_checks(both: &TermCheck, only_dest: &TermCheck) -> Result<f64, AnalyticError> {
    if both.used >= 1.0 {
        return Err(AnalyticError::RaceNeverEnds(both.used));
    }
    Ok(1.0 - only_dest.used / (1.0 - both.used))
}

fn checked_race(eps_d: f64, eps_r: f64) -> Result<f64, AnalyticError> {
    if eps_d * eps_r >= 1.0 {
        return Err(AnalyticError::RaceNeverEnds(eps_d * eps_r));
    }
    Ok(race_intercept(eps_d, eps_r))
}

fn provenance_of(checks: &[TermCheck]) -> Provenance {
    if checks.iter().any(|c| c.source == TermSource::Oracle) {
        Provenance::Oracle
    } else {
        Provenance::ClosedForm
    }
}

/// AF bracket from the min-based SNR sandwich, each term checked against
/// its quadrature oracle.
pub fn per_packet_intercept_af(
    links: &LinkParams,
    k: usize,
    th: &DerivedThresholds,
) -> Result<Analysis, AnalyticError> {
    check_k(k)?;
    let params = OracleParams::from_thresholds(*th, 1.0);
    let mut checks = Vec::with_capacity(4);
    for variant in [AfVariant::Lower, AfVariant::Upper] {
        for event in [EventSpec::AfBothFail(variant), EventSpec::AfOnlyDest(variant)] {
            let verbatim = match event {
                EventSpec::AfBothFail(_) => af_eps_both(links, k, th, variant),
                _ => af_eps_only_dest(links, k, th, variant),
            };
            let oracle = oracle_epsilon(event, links, k, &params)?.p;
            checks.push(resolve(event.label(), verbatim, &[], None, oracle));
        }
    }
    let lower = race_from_checks(&checks[0], &checks[1])?;
    let upper = race_from_checks(&checks[2], &checks[3])?;
    Ok(Analysis {
        protocol: Protocol::Af,
        intercept: PerPacketIntercept::bounds(lower, upper, provenance_of(&checks)),
        checks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DbjRegime {
    Tau2AtLeastOne,
    Tau2BelowOne,
}

/// Which link rate the printed `e^{λ/(1-α)}` factor in the case-two lower
/// bound is read with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LambdaReading {
    /// `λ_SD`, as printed, though the network has no S-D link.
    AsPrinted,
    /// `λ_RD`, matching the definition of `I₁₀`.
    RelayDest,
}

/// Constants of the DBJ closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DbjTerms {
    pub lambda_x1: f64,
    pub lambda_x2: f64,
    pub lambda_sr: f64,
    pub lambda_rd: f64,
    pub lambda_sd: f64,
    pub alpha: f64,
    pub k: usize,
    pub th: DerivedThresholds,
    pub regime: DbjRegime,
    pub lower_case: LowerCase,
}

pub fn dbj_terms(links: &LinkParams, k: usize, alpha: f64, th: &DerivedThresholds) -> DbjTerms {
    let (ls, ld) = (links.lambda_sr, links.lambda_rd);
    DbjTerms {
        lambda_x1: ls / alpha,
        lambda_x2: ld / (2.0 - alpha),
        lambda_sr: ls,
        lambda_rd: ld,
        lambda_sd: links.lambda_sd,
        alpha,
        k,
        th: *th,
        regime: if th.tau2 >= 1.0 {
            DbjRegime::Tau2AtLeastOne
        } else {
            DbjRegime::Tau2BelowOne
        },
        // α σ_Sk² >= (2 - α) σ_kD², with σ² = 1/(ρλ).
        lower_case: if alpha * ld >= (2.0 - alpha) * ls {
            LowerCase::One
        } else {
            LowerCase::Two
        },
    }
}

impl DbjTerms {
    fn rest(&self, k1: usize, k2: usize) -> f64 {
        (self.k - 1 - k1 - k2) as f64
    }

    pub fn i3(&self, k1: usize, k2: usize) -> f64 {
        let (l1, l2, t2) = (self.lambda_x1, self.lambda_x2, self.th.tau2);
        (l1 + l2) * (k2 as f64 + 1.0) + (l2 + l1 * t2) * self.rest(k1, k2)
    }

    pub fn i4(&self, k1: usize, k2: usize) -> f64 {
        let (l1, l2, t2) = (self.lambda_x1, self.lambda_x2, self.th.tau2);
        l1 * t2 + l2 + (l1 + l2) * k2 as f64 + (l2 + l1 * t2) * self.rest(k1, k2)
    }

    pub fn i5(&self, k1: usize) -> f64 {
        (self.lambda_x1 + self.lambda_x2 / self.th.tau2) * (k1 as f64 + 1.0)
    }

    pub fn i6(&self) -> f64 {
        let a = self.alpha;
        self.lambda_rd + self.lambda_sr * (1.0 - a) * self.th.tau_prime / a
    }

    pub fn i7(&self, k1: usize, k2: usize) -> f64 {
        self.lambda_rd * (k2 as f64 + 1.0) + self.i6() * self.rest(k1, k2)
    }

    pub fn i8(&self, k1: usize, k2: usize) -> f64 {
        let a = self.alpha;
        self.i7(k1, k2) + self.lambda_sr * (1.0 - a) * self.th.tau_prime / a
    }

    pub fn i9(&self) -> f64 {
        let a = self.alpha;
        self.lambda_sr + self.lambda_rd * a / ((1.0 - a) * self.th.tau_prime)
    }

    pub fn i10(&self) -> f64 {
        self.lambda_sr * (self.lambda_rd / (1.0 - self.alpha)).exp() / self.i9()
    }

    pub fn i11(&self) -> f64 {
        let a = self.alpha;
        let tp = self.th.tau_prime;
        f(self.lambda_sr * tp / a) + self.i10() * (1.0 - f(self.i9() * tp / a))
    }
}

/// DBJ `(ε_{R,D}, ε_{R,D̄})` as transcribed. The regime and lower-bound case
/// come from `terms`; `reading` only affects the case-two lower bound.
pub fn dbj_eps_verbatim(terms: &DbjTerms, bound: DbjBound, reading: LambdaReading) -> (f64, f64) {
    let t = terms;
    let k = t.k;
    let (l1, l2) = (t.lambda_x1, t.lambda_x2);
    let (tau2, tau3, tp, a) = (t.th.tau2, t.th.tau3, t.th.tau_prime, t.alpha);
    match bound {
        DbjBound::Upper => match t.regime {
            DbjRegime::Tau2AtLeastOne => {
                let weight = l2 / (l2 + l1 * tau2);
                let both = g_weighted_sum(
                    weight,
                    |k1, k2| {
                        let (i3, i4) = (t.i3(k1, k2), t.i4(k1, k2));
                        l1 / i3 * f(i3 * tau3) + l2 / i3 * f(i3 * tau3) - l2 / i4 * f(i4 * tau3)
                    },
                    k,
                );
                let only = g_weighted_sum(
                    weight,
                    |k1, k2| {
                        let (i3, i4) = (t.i3(k1, k2), t.i4(k1, k2));
                        l1 / i3 * (1.0 - f(i3 * tau3)) + l2 / i3 * (1.0 - f(i3 * tau3))
                            - l2 / i4 * (1.0 - f(i4 * tau3))
                    },
                    k,
                );
                (both, only)
            }
            DbjRegime::Tau2BelowOne => {
                let lead = (l1 / (l1 + l2 / tau2)).powi(k as i32 - 1);
                let both = g_prime_sum(
                    1.0,
                    1.0,
                    |k1| {
                        let i5 = t.i5(k1);
                        lead * l1 / i5 * f(i5 * tau3)
                    },
                    k,
                );
                let only = g_prime_sum(
                    1.0,
                    1.0,
                    |k1| {
                        let i5 = t.i5(k1);
                        lead * l1 / i5 * (1.0 - f(i5 * tau3))
                    },
                    k,
                );
                (both, only)
            }
        },
        DbjBound::Lower(LowerCase::One) => {
            let ls = t.lambda_sr;
            let ld = t.lambda_rd;
            let jam = (-ls * tp / a).exp();
            let weight = 1.0 - ld * jam / t.i6();
            let both = g_weighted_sum(
                weight,
                |k1, k2| {
                    let (i7, i8) = (t.i7(k1, k2), t.i8(k1, k2));
                    ld / i7 * f(i7 * tp) - ld * jam / i8 * f(i8 * tp)
                },
                k,
            );
            let only = g_weighted_sum(
                weight,
                |k1, k2| {
                    let (i7, i8) = (t.i7(k1, k2), t.i8(k1, k2));
                    ld / i7 * (1.0 - f(i7 * tp)) - ld * jam / i8 * (1.0 - f(i8 * tp))
                },
                k,
            );
            (both, only)
        }
        DbjBound::Lower(LowerCase::Two) => {
            let ls = t.lambda_sr;
            let lambda_in_exp = match reading {
                LambdaReading::AsPrinted => t.lambda_sd,
                LambdaReading::RelayDest => t.lambda_rd,
            };
            let boost = (lambda_in_exp / (1.0 - a)).exp();
            let (i9, i10, i11) = (t.i9(), t.i10(), t.i11());
            let first = g_prime_sum(
                1.0,
                1.0,
                |k1| {
                    let m = k1 as f64 + 1.0;
                    f(m * ls * tp / a) / m
                },
                k,
            );
            let second = g_prime_sum(
                i10,
                i11,
                |k1| {
                    let m = k1 as f64 + 1.0;
                    ls * boost / (i9 * m) * (f(i9 * m * (2.0 - a) * tp / a) - f(i9 * m * tp / a))
                },
                k,
            );
            let only = g_prime_sum(
                i10,
                i11,
                |k1| {
                    let m = k1 as f64 + 1.0;
                    ls * boost / (i9 * m) * (1.0 - f(i9 * m * (2.0 - a) * tp / a))
                },
                k,
            );
            (first + second, only)
        }
    }
}

/// DBJ `(ε_{R,D}, ε_{R,D̄})` from the per-relay factorization.
///
/// Without a direct link, the relays fail and the destination fails in a
/// slot exactly when every relay's pair `(γ_Sk, γ_kD)` falls in the
/// corresponding single-relay region, so `ε_{R,D} = q^K` and
/// `ε_{R,D̄} = r^K - q^K` with `r` the single-relay failure probability.
pub fn dbj_eps_exact(links: &LinkParams, k: usize, alpha: f64, th: &DerivedThresholds, bound: DbjBound) -> (f64, f64) {
    let (ls, ld) = (links.lambda_sr, links.lambda_rd);
    let a = alpha;
    let tp = th.tau_prime;
    let (r, q) = match bound {
        DbjBound::Upper => {
            // X1 = αγ_S ~ Exp(λ_S/α), X2 = (2-α)γ_D ~ Exp(λ_D/(2-α)).
            let (l1, l2) = (ls / a, ld / (2.0 - a));
            let (tau2, tau3) = (th.tau2, th.tau3);
            let r = l1 * tau2 / (l2 + l1 * tau2);
            // P(X1 >= τ3, X2 >= τ3, X1 < τ2 X2) integrates X2 from y0.
            let y0 = if tau2 >= 1.0 { tau3 } else { tau3 / tau2 };
            let corner = (-l1 * tau3 - l2 * y0).exp() - l2 / (l2 + l1 * tau2) * (-(l2 + l1 * tau2) * y0).exp();
            (r, r - corner)
        }
        DbjBound::Lower(case) => {
            let i6 = ld + ls * (1.0 - a) * tp / a;
            let jam = (-ls * tp / a).exp();
            let r = 1.0 - ld * jam / i6;
            let q = match case {
                // γ_D < τ' and the relay fails.
                LowerCase::One => f(ld * tp) - ld * jam / i6 * f(i6 * tp),
                // Below γ_D = 1 the relay condition binds, above it αγ_S < (2-α)τ'.
                LowerCase::Two => f(ld) - ld * jam / i6 * f(i6) + (-ld).exp() * f(ls * (2.0 - a) * tp / a),
            };
            (r, q)
        }
    };
    let qk = q.powi(k as i32);
    (qk, r.powi(k as i32) - qk)
}

/// DBJ bracket: jamming-aware upper bound and the selected lower-bound case,
/// each term checked against its quadrature oracle and replaced by the
/// exact factorization when the transcription disagrees.
pub fn per_packet_intercept_dbj(
    links: &LinkParams,
    k: usize,
    alpha: f64,
    th: &DerivedThresholds,
) -> Result<Analysis, AnalyticError> {
    check_k(k)?;
    if alpha == 1.0 {
        return Err(AnalyticError::AlphaOne);
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(AnalyticError::Alpha(alpha));
    }
    let terms = dbj_terms(links, k, alpha, th);
    let params = OracleParams::from_thresholds(*th, alpha);
    let mut checks = Vec::with_capacity(4);
    for bound in [DbjBound::Lower(terms.lower_case), DbjBound::Upper] {
        let (vb, vo) = dbj_eps_verbatim(&terms, bound, LambdaReading::AsPrinted);
        let (ab, ao) = dbj_eps_verbatim(&terms, bound, LambdaReading::RelayDest);
        let (eb, eo) = dbj_eps_exact(links, k, alpha, th, bound);
        let alternates = |v: f64| -> Vec<(&str, f64)> {
            if bound == DbjBound::Lower(LowerCase::Two) {
                vec![("lambda_rd in exp(lambda/(1-alpha))", v)]
            } else {
                Vec::new()
            }
        };
        let both_event = EventSpec::DbjBothFail(bound);
        let only_event = EventSpec::DbjOnlyDest(bound);
        let ob = oracle_epsilon(both_event, links, k, &params)?.p;
        let oo = oracle_epsilon(only_event, links, k, &params)?.p;
        checks.push(resolve(term_label(both_event, &terms), vb, &alternates(ab), Some(eb), ob));
        checks.push(resolve(term_label(only_event, &terms), vo, &alternates(ao), Some(eo), oo));
    }
    let lower = race_from_checks(&checks[0], &checks[1])?;
    let upper = race_from_checks(&checks[2], &checks[3])?;
    Ok(Analysis {
        protocol: Protocol::Dbj,
        intercept: PerPacketIntercept::bounds(lower, upper, provenance_of(&checks)),
        checks,
    })
}

fn term_label(event: EventSpec, terms: &DbjTerms) -> String {
    match event {
        EventSpec::DbjBothFail(DbjBound::Upper) | EventSpec::DbjOnlyDest(DbjBound::Upper) => {
            let regime = match terms.regime {
                DbjRegime::Tau2AtLeastOne => "tau2>=1",
                DbjRegime::Tau2BelowOne => "tau2<1",
            };
            format!("{}[{regime}]", event.label())
        }
        _ => event.label(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn midpoint() -> LinkParams {
        LinkParams {
            lambda_sd: 0.01,
            lambda_sr: 6.25e-4,
            lambda_rd: 6.25e-4,
        }
    }

    #[test]
    fn direct_limits() {
        let th = DerivedThresholds::new(1.0, 1.0);
        let far = LinkParams {
            lambda_sr: 1e6,
            ..midpoint()
        };
        let p = per_packet_intercept_direct(&far, 1, &th).unwrap().exact.unwrap();
        assert!(p < 1e-12);
        let near = LinkParams {
            lambda_sr: 0.0,
            ..midpoint()
        };
        assert_eq!(per_packet_intercept_direct(&near, 3, &th).unwrap().exact, Some(1.0));
    }

    #[test]
    fn df_increases_with_relays() {
        let th = DerivedThresholds::new(1.0, 1.0);
        let p: Vec<f64> = (1..=3)
            .map(|k| per_packet_intercept_df(&midpoint(), k, &th).unwrap().exact.unwrap())
            .collect();
        assert!(p[0] < p[1] && p[1] < p[2], "{p:?}");
        let many = per_packet_intercept_df(&midpoint(), 64, &th).unwrap().exact.unwrap();
        assert!(many > 1.0 - 1e-12);
    }

    #[test]
    fn af_single_relay_terms_match_oracle() {
        let th = DerivedThresholds::new(1.0, 1.0);
        let a = per_packet_intercept_af(&midpoint(), 1, &th).unwrap();
        assert_eq!(a.deviations().count(), 0, "{:#?}", a.checks);
        let (lo, hi) = a.intercept.range();
        assert!(lo <= hi);
    }

    #[test]
    fn af_degenerate_branch_is_continuous() {
        // λ_SR = 0.5 λ_SD makes I₂ vanish at k2 = 0 for K = 1.
        let th = DerivedThresholds::new(1.0, 1.0);
        let links = LinkParams {
            lambda_sd: 0.4,
            lambda_sr: 0.1,
            lambda_rd: 0.1,
        };
        let t = af_terms(&links, 1, &th, AfVariant::Upper, 0, 0);
        assert!(t.i2.abs() < 1e-15);
        let nudged = LinkParams {
            lambda_sd: 0.4 * (1.0 + 1e-7),
            ..links
        };
        let exact = af_eps_both(&links, 1, &th, AfVariant::Upper);
        let near = af_eps_both(&nudged, 1, &th, AfVariant::Upper);
        assert!((exact - near).abs() < 1e-6 * exact, "{exact} vs {near}");
    }

    #[test]
    fn dbj_rejects_alpha_one() {
        let th = DerivedThresholds::new(1.0, 1.0);
        assert_eq!(
            per_packet_intercept_dbj(&midpoint(), 2, 1.0, &th).unwrap_err(),
            AnalyticError::AlphaOne
        );
    }

    #[test]
    fn dbj_single_relay_transcription_matches_exact() {
        for alpha in [0.2, 0.5, 0.8] {
            let th = DerivedThresholds::new(1.0, alpha);
            let links = midpoint();
            let terms = dbj_terms(&links, 1, alpha, &th);
            for bound in [DbjBound::Upper, DbjBound::Lower(LowerCase::One)] {
                let v = dbj_eps_verbatim(&terms, bound, LambdaReading::AsPrinted);
                let e = dbj_eps_exact(&links, 1, alpha, &th, bound);
                assert!((v.0 - e.0).abs() < 1e-12 && (v.1 - e.1).abs() < 1e-12, "{bound:?} {v:?} {e:?}");
            }
            let v = dbj_eps_verbatim(&terms, DbjBound::Lower(LowerCase::Two), LambdaReading::RelayDest);
            let e = dbj_eps_exact(&links, 1, alpha, &th, DbjBound::Lower(LowerCase::Two));
            assert!((v.0 - e.0).abs() < 1e-12 && (v.1 - e.1).abs() < 1e-12, "{v:?} {e:?}");
        }
    }
}
