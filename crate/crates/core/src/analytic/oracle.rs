//! Independent evaluation of every per-slot failure probability from the
//! event that defines it.
//!
//! The quadrature route never touches the binomial sums: AF events are
//! integrated against the distribution of the best relay's `min(γ_Sk, γ_kD)`,
//! DBJ events factor over relays and each factor is integrated over `γ_kD`
//! with the conditional `γ_Sk` probability in closed form. The Monte-Carlo
//! route samples the SNRs and evaluates the rate inequalities directly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::AnalyticError;
use crate::channel::{
    af_term_lower, af_term_upper, rate_dbj_pair, rate_direct, sample_snr, DerivedThresholds,
    LinkParams,
};

/// Which side of the AF sandwich the destination SNR is replaced by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AfVariant {
    /// `min/2 - 1/4` at the destination: yields the intercept upper bound.
    Upper,
    /// `min` at the destination: yields the intercept lower bound.
    Lower,
}

/// Which destination SNR bound the DBJ lower bound uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum LowerCase {
    /// Destination SNR bounded by `γ_kD`.
    One,
    /// Destination SNR bounded by `α γ_Sk / (2 - α)`.
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum DbjBound {
    Upper,
    Lower(LowerCase),
}

/// A per-slot event whose probability enters an intercept formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum EventSpec {
    /// Destination fails on the direct link at rate `R`.
    DirectDestFail,
    /// Every relay fails to eavesdrop at rate `R`.
    DirectRelaysFail,
    /// Destination fails on the direct link in the two-phase slot.
    DfDestFail,
    /// Every relay fails to decode in phase I.
    DfRelaysFail,
    /// All relays and the destination fail.
    AfBothFail(AfVariant),
    /// All relays fail and the destination succeeds.
    AfOnlyDest(AfVariant),
    DbjBothFail(DbjBound),
    DbjOnlyDest(DbjBound),
}

impl EventSpec {
    pub fn label(&self) -> String {
        match self {
            EventSpec::DirectDestFail => "direct.eps_d".into(),
            EventSpec::DirectRelaysFail => "direct.eps_r".into(),
            EventSpec::DfDestFail => "df.eps_d".into(),
            EventSpec::DfRelaysFail => "df.eps_r".into(),
            EventSpec::AfBothFail(v) => format!("af.{}.eps_both", variant_name(*v)),
            EventSpec::AfOnlyDest(v) => format!("af.{}.eps_only_dest", variant_name(*v)),
            EventSpec::DbjBothFail(b) => format!("dbj.{}.eps_both", dbj_name(*b)),
            EventSpec::DbjOnlyDest(b) => format!("dbj.{}.eps_only_dest", dbj_name(*b)),
        }
    }
}

fn variant_name(v: AfVariant) -> &'static str {
    match v {
        AfVariant::Upper => "upper",
        AfVariant::Lower => "lower",
    }
}

fn dbj_name(b: DbjBound) -> &'static str {
    match b {
        DbjBound::Upper => "upper",
        DbjBound::Lower(LowerCase::One) => "lower.case1",
        DbjBound::Lower(LowerCase::Two) => "lower.case2",
    }
}

/// Parameters an event needs besides the link rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleParams {
    pub thresholds: DerivedThresholds,
    pub rate: f64,
    pub alpha: f64,
}

impl OracleParams {
    pub fn new(rate: f64, alpha: f64) -> Self {
        OracleParams {
            thresholds: DerivedThresholds::new(rate, alpha),
            rate,
            alpha,
        }
    }

    /// Recovers the rate from `τ = 2^R - 1`.
    pub fn from_thresholds(thresholds: DerivedThresholds, alpha: f64) -> Self {
        OracleParams {
            thresholds,
            rate: thresholds.tau.ln_1p() / std::f64::consts::LN_2,
            alpha,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OracleMethod {
    Quadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleValue {
    pub p: f64,
    /// Standard error for Monte-Carlo values; quadrature error estimate otherwise.
    pub error: f64,
    pub method: OracleMethod,
}

const QUAD_TOL: f64 = 1e-14;

/// Integral over `[a, b]` split at the given interior points.
fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64]) -> (f64, f64) {
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let out = quadrature::double_exponential::integrate(&f, w[0], w[1], QUAD_TOL);
            (out.integral, out.error_estimate)
        })
        .fold((0.0, 0.0), |(s, e), (x, y)| (s + x, e + y))
}

/// Exponential CDF `1 - e^{-λx}`, with `x = ∞` allowed.
fn exp_cdf(lambda: f64, x: f64) -> f64 {
    if x == f64::INFINITY {
        1.0
    } else if x <= 0.0 {
        0.0
    } else {
        -(-lambda * x).exp_m1()
    }
}

fn check_inputs(links: &LinkParams, k: usize) -> Result<(), AnalyticError> {
    if k == 0 {
        return Err(AnalyticError::NoRelays);
    }
    for lambda in [links.lambda_sd, links.lambda_sr, links.lambda_rd] {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(AnalyticError::Unsupported(format!(
                "link rate {lambda} must be positive and finite"
            )));
        }
    }
    Ok(())
}

/// Evaluates an event probability by numerical integration.
pub fn oracle_epsilon(
    event: EventSpec,
    links: &LinkParams,
    k: usize,
    params: &OracleParams,
) -> Result<OracleValue, AnalyticError> {
    check_inputs(links, k)?;
    let th = &params.thresholds;
    let single_fail = |lambda: f64, threshold: f64| {
        integrate(|x| lambda * (-lambda * x).exp(), 0.0, threshold, &[])
    };
    let (p, error) = match event {
        EventSpec::DirectDestFail => single_fail(links.lambda_sd, th.tau),
        EventSpec::DfDestFail => single_fail(links.lambda_sd, th.tau_prime),
        EventSpec::DirectRelaysFail => power(single_fail(links.lambda_sr, th.tau), k),
        EventSpec::DfRelaysFail => power(single_fail(links.lambda_sr, th.tau_prime), k),
        EventSpec::AfBothFail(v) => af_event(links, k, th, v, false),
        EventSpec::AfOnlyDest(v) => af_event(links, k, th, v, true),
        EventSpec::DbjBothFail(b) | EventSpec::DbjOnlyDest(b) => {
            if params.alpha <= 0.0 || params.alpha > 1.0 {
                return Err(AnalyticError::Unsupported(format!(
                    "DBJ event with alpha = {}",
                    params.alpha
                )));
            }
            let cond = DbjConditional::new(links, th, params.alpha, b);
            let (both, e_both) = cond.single_relay(false);
            if matches!(event, EventSpec::DbjBothFail(_)) {
                power((both, e_both), k)
            } else {
                let (relay_fail, e_fail) = cond.single_relay(true);
                let (rk, ek) = power((relay_fail, e_fail), k);
                let (qk, eq) = power((both, e_both), k);
                (rk - qk, ek + eq)
            }
        }
    };
    Ok(OracleValue {
        p,
        error,
        method: OracleMethod::Quadrature,
    })
}

fn power((p, e): (f64, f64), k: usize) -> (f64, f64) {
    let pk = p.powi(k as i32);
    let ek = if p > 0.0 { k as f64 * pk / p * e } else { e };
    (pk, ek)
}

/// AF events: integrate the destination's direct-link probability against
/// the law of `M = max_k min(γ_Sk, γ_kD)` restricted to all relays failing.
fn af_event(
    links: &LinkParams,
    k: usize,
    th: &DerivedThresholds,
    variant: AfVariant,
    dest_succeeds: bool,
) -> (f64, f64) {
    let (ls, ld, lsd) = (links.lambda_sr, links.lambda_rd, links.lambda_sd);
    let tp = th.tau_prime;
    // Destination fails iff γ_SD < limit - slope * M.
    let (limit, slope) = match variant {
        AfVariant::Upper => (th.tau1, 0.5),
        AfVariant::Lower => (tp, 1.0),
    };
    let tail_s = (-ls * tp).exp();
    // Single relay: P(γ_S < τ', min(γ_S, γ_D) <= m) and its density in m.
    let h = |m: f64| -(-ls * tp).exp_m1() - ((-ls * m).exp() - tail_s) * (-ld * m).exp();
    let dh = |m: f64| {
        ls * (-(ls + ld) * m).exp() + ld * ((-ls * m).exp() - tail_s) * (-ld * m).exp()
    };
    let integrand = |m: f64| {
        let dest_fail = exp_cdf(lsd, limit - slope * m);
        let weight = k as f64 * h(m).powi(k as i32 - 1) * dh(m);
        if dest_succeeds {
            (1.0 - dest_fail) * weight
        } else {
            dest_fail * weight
        }
    };
    integrate(integrand, 0.0, tp, &[])
}

/// Per-relay DBJ event in terms of `γ_Sk` thresholds given `γ_kD = y`:
/// the relay fails iff `γ_Sk < relay(y)`, the destination term fails iff
/// `γ_Sk < dest(y)`.
struct DbjConditional {
    lambda_sr: f64,
    lambda_rd: f64,
    alpha: f64,
    th: DerivedThresholds,
    bound: DbjBound,
}

impl DbjConditional {
    fn new(links: &LinkParams, th: &DerivedThresholds, alpha: f64, bound: DbjBound) -> Self {
        DbjConditional {
            lambda_sr: links.lambda_sr,
            lambda_rd: links.lambda_rd,
            alpha,
            th: *th,
            bound,
        }
    }

    fn relay_limit(&self, y: f64) -> f64 {
        let a = self.alpha;
        match self.bound {
            DbjBound::Upper => {
                if a == 1.0 {
                    0.0
                } else {
                    self.th.tau2 * (2.0 - a) * y / a
                }
            }
            DbjBound::Lower(_) => self.th.tau_prime * (1.0 + (1.0 - a) * y) / a,
        }
    }

    fn dest_limit(&self, y: f64) -> f64 {
        let a = self.alpha;
        match self.bound {
            DbjBound::Upper => {
                if (2.0 - a) * y < self.th.tau3 {
                    f64::INFINITY
                } else {
                    self.th.tau3 / a
                }
            }
            DbjBound::Lower(LowerCase::One) => {
                if y < self.th.tau_prime {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            DbjBound::Lower(LowerCase::Two) => (2.0 - a) * self.th.tau_prime / a,
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        let a = self.alpha;
        match self.bound {
            DbjBound::Upper => {
                let mut b = vec![self.th.tau3 / (2.0 - a)];
                if self.th.tau2 > 0.0 {
                    b.push(self.th.tau3 / (self.th.tau2 * (2.0 - a)));
                }
                b
            }
            DbjBound::Lower(LowerCase::One) => vec![self.th.tau_prime],
            DbjBound::Lower(LowerCase::Two) => vec![1.0],
        }
    }

    /// Single-relay probability that the relay fails and, unless
    /// `relay_only`, the destination term fails too.
    fn single_relay(&self, relay_only: bool) -> (f64, f64) {
        let ld = self.lambda_rd;
        // Substitute y = -ln(1 - v)/λ_RD so the outer density becomes uniform on [0, 1).
        let to_y = |v: f64| -(-v).ln_1p() / ld;
        let integrand = |v: f64| {
            let y = to_y(v.min(1.0 - f64::EPSILON));
            let mut limit = self.relay_limit(y);
            if !relay_only {
                limit = limit.min(self.dest_limit(y));
            }
            exp_cdf(self.lambda_sr, limit)
        };
        let breaks: Vec<f64> = self
            .breakpoints()
            .into_iter()
            .filter(|y| y.is_finite() && *y > 0.0)
            .map(|y| -(-ld * y).exp_m1())
            .collect();
        integrate(integrand, 0.0, 1.0, &breaks)
    }
}

/// Evaluates an event probability by Monte Carlo with per-chunk
/// counter-based streams; deterministic for fixed `(samples, seed)`.
pub fn oracle_epsilon_mc(
    event: EventSpec,
    links: &LinkParams,
    k: usize,
    params: &OracleParams,
    samples: u64,
    seed: u64,
) -> Result<OracleValue, AnalyticError> {
    check_inputs(links, k)?;
    if samples == 0 {
        return Err(AnalyticError::Unsupported("zero Monte-Carlo samples".into()));
    }
    const CHUNK: u64 = 1 << 14;
    let chunks = samples.div_ceil(CHUNK);
    let base = ChaCha8Rng::seed_from_u64(seed);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = base.clone();
            rng.set_stream(c);
            let n = CHUNK.min(samples - c * CHUNK);
            let mut pairs = vec![(0.0, 0.0); k];
            (0..n)
                .filter(|_| {
                    let gamma_sd = sample_snr(links.lambda_sd, &mut rng);
                    for p in pairs.iter_mut() {
                        *p = (
                            sample_snr(links.lambda_sr, &mut rng),
                            sample_snr(links.lambda_rd, &mut rng),
                        );
                    }
                    event_occurs(event, gamma_sd, &pairs, params)
                })
                .count() as u64
        })
        .sum();
    let p = hits as f64 / samples as f64;
    Ok(OracleValue {
        p,
        error: (p * (1.0 - p) / samples as f64).sqrt(),
        method: OracleMethod::MonteCarlo,
    })
}

/// Indicator of `event` for one draw of every link SNR.
fn event_occurs(event: EventSpec, gamma_sd: f64, pairs: &[(f64, f64)], params: &OracleParams) -> bool {
    let r = params.rate;
    let a = params.alpha;
    let half = |snr: f64| 0.5 * rate_direct(snr);
    let max_of = |f: &dyn Fn(f64, f64) -> f64| {
        pairs.iter().map(|&(s, d)| f(s, d)).fold(f64::NEG_INFINITY, f64::max)
    };
    match event {
        EventSpec::DirectDestFail => rate_direct(gamma_sd) < r,
        EventSpec::DirectRelaysFail => max_of(&|s, _| rate_direct(s)) < r,
        EventSpec::DfDestFail => half(gamma_sd) < r,
        EventSpec::DfRelaysFail => max_of(&|s, _| half(s)) < r,
        EventSpec::AfBothFail(v) | EventSpec::AfOnlyDest(v) => {
            let relays_fail = max_of(&|s, _| half(s)) < r;
            let term = match v {
                AfVariant::Upper => max_of(&|s, d| af_term_lower(s, d)),
                AfVariant::Lower => max_of(&|s, d| af_term_upper(s, d)),
            };
            let dest_fail = half(gamma_sd + term) < r;
            relays_fail && (dest_fail == matches!(event, EventSpec::AfBothFail(_)))
        }
        EventSpec::DbjBothFail(b) | EventSpec::DbjOnlyDest(b) => {
            let (relay_rate, dest_snr): (f64, f64) = match b {
                DbjBound::Upper => (
                    max_of(&|s, d| half(a * s / ((1.0 - a) * d))),
                    max_of(&|s, d| (0.5 * (a * s).min((2.0 - a) * d) - 0.25) / (2.0 - a)),
                ),
                DbjBound::Lower(case) => (
                    max_of(&|s, d| rate_dbj_pair(a, s, d).relay_rate),
                    match case {
                        LowerCase::One => max_of(&|_, d| d),
                        LowerCase::Two => max_of(&|s, _| a * s / (2.0 - a)),
                    },
                ),
            };
            let relays_fail = relay_rate < r;
            let dest_fail = half(dest_snr) < r;
            relays_fail && (dest_fail == matches!(event, EventSpec::DbjBothFail(_)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn links(sd: f64, sr: f64, rd: f64) -> LinkParams {
        LinkParams {
            lambda_sd: sd,
            lambda_sr: sr,
            lambda_rd: rd,
        }
    }

    #[test]
    fn direct_dest_at_half() {
        let params = OracleParams::new(1.0, 1.0);
        let v = oracle_epsilon(EventSpec::DirectDestFail, &links(2f64.ln(), 1.0, 1.0), 1, &params)
            .unwrap();
        assert!((v.p - 0.5).abs() < 1e-13, "{}", v.p);
    }

    #[test]
    fn relays_fail_is_a_power() {
        let params = OracleParams::new(1.0, 1.0);
        let l = links(0.1, 0.3, 0.2);
        let one = oracle_epsilon(EventSpec::DfRelaysFail, &l, 1, &params).unwrap().p;
        let three = oracle_epsilon(EventSpec::DfRelaysFail, &l, 3, &params).unwrap().p;
        assert!((three - one.powi(3)).abs() < 1e-14);
        assert!((one - (1.0 - (-0.9f64).exp())).abs() < 1e-13);
    }

    #[test]
    fn af_events_partition_relay_failure() {
        let params = OracleParams::new(1.0, 1.0);
        let l = links(0.2, 0.1, 0.15);
        for v in [AfVariant::Upper, AfVariant::Lower] {
            let both = oracle_epsilon(EventSpec::AfBothFail(v), &l, 2, &params).unwrap().p;
            let only = oracle_epsilon(EventSpec::AfOnlyDest(v), &l, 2, &params).unwrap().p;
            let all_fail = (1.0 - (-0.1f64 * 3.0).exp()).powi(2);
            assert!((both + only - all_fail).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_zero_relays_and_bad_rates() {
        let params = OracleParams::new(1.0, 1.0);
        assert!(oracle_epsilon(EventSpec::DfDestFail, &links(0.1, 0.1, 0.1), 0, &params).is_err());
        assert!(oracle_epsilon(EventSpec::DfDestFail, &links(0.0, 0.1, 0.1), 1, &params).is_err());
    }

    #[test]
    fn mc_is_deterministic() {
        let params = OracleParams::new(1.0, 0.5);
        let l = links(0.01, 0.02, 0.02);
        let e = EventSpec::DbjBothFail(DbjBound::Upper);
        let a = oracle_epsilon_mc(e, &l, 2, &params, 50_000, 9).unwrap();
        let b = oracle_epsilon_mc(e, &l, 2, &params, 50_000, 9).unwrap();
        assert_eq!(a, b);
    }
}
