//! Seeded Monte-Carlo simulation of the ARQ race between the destination
//! and the colluding relays.
//!
//! Trial `i` of a run with seed `s` draws from ChaCha8 keyed by `s` on stream
//! `i`, so estimates depend only on `(scenario, seed, trials)` and never on
//! how trials are scheduled across threads.

mod race;
mod sweep;

pub use race::{run_packet_trial, run_packet_trial_traced, Network, TrialOutcome, SLOT_CAP};
pub use sweep::{sweep, DeviationRecord, SweepGrid, SweepOutput, SweepRow};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::analytic::AnalyticError;
use crate::channel::{Scenario, ScenarioError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error("non-terminating scenario: destination did not decode within {slots} slots")]
    NonTerminating { slots: u64 },
    #[error("at least one trial is required")]
    ZeroTrials,
    #[error("message length must be even and at least 2, got {0}")]
    PacketCount(u64),
    #[error("sweep grid is empty: axis `{0}` has no values")]
    EmptyGrid(&'static str),
}

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959964;

/// Per-packet intercept frequency with a Wilson 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterceptEstimate {
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub hits: u64,
    pub trials: u64,
    pub seed: u64,
}

impl InterceptEstimate {
    pub fn from_counts(hits: u64, trials: u64, seed: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(hits, trials, Z_95);
        InterceptEstimate {
            p_hat: hits as f64 / trials as f64,
            ci_low,
            ci_high,
            hits,
            trials,
            seed,
        }
    }

    /// Binomial standard error of `p_hat`.
    pub fn std_error(&self) -> f64 {
        (self.p_hat * (1.0 - self.p_hat) / self.trials as f64).sqrt()
    }

    pub fn contains(&self, p: f64) -> bool {
        self.ci_low <= p && p <= self.ci_high
    }
}

/// Wilson score interval for `hits` successes in `n` trials.
pub fn wilson_interval(hits: u64, n: u64, z: f64) -> (f64, f64) {
    let n_f = n as f64;
    let p = hits as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let centre = (p + z2 / (2.0 * n_f)) / denom;
    let half = z / denom * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt();
    // Pin the exact endpoints so the interval always contains p.
    let low = if hits == 0 { 0.0 } else { (centre - half).max(0.0).min(p) };
    let high = if hits == n { 1.0 } else { (centre + half).min(1.0).max(p) };
    (low, high)
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Counts trials for which `hit` returns true, in parallel.
fn count_hits(
    trials: u64,
    seed: u64,
    hit: impl Fn(&mut ChaCha8Rng) -> Result<bool, SimError> + Sync,
) -> Result<u64, SimError> {
    if trials == 0 {
        return Err(SimError::ZeroTrials);
    }
    (0..trials)
        .into_par_iter()
        .map(|i| hit(&mut trial_rng(seed, i)).map(u64::from))
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

/// Fraction of single-packet races the relays win.
pub fn estimate_per_packet(scenario: &Scenario, trials: u64, seed: u64) -> Result<InterceptEstimate, SimError> {
    let net = Network::from_scenario(scenario)?;
    estimate_network(&net, trials, seed)
}

pub fn estimate_network(net: &Network, trials: u64, seed: u64) -> Result<InterceptEstimate, SimError> {
    let hits = count_hits(trials, seed, |rng| Ok(run_packet_trial(net, rng)?.intercepted))?;
    Ok(InterceptEstimate::from_counts(hits, trials, seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageMethod {
    /// `N` races per trial; intercepted only if every packet is.
    Direct,
    /// `p̂₁^N` from a per-packet estimate.
    Lifted,
}

/// Message intercept estimate in the natural-log domain.
///
/// `ln_p_hat = -∞` means no interception was observed; the true value is
/// then below the resolution reported by [`MessageEstimate::ln_resolution`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MessageEstimate {
    pub n: u64,
    pub ln_p_hat: f64,
    pub ln_ci_low: f64,
    pub ln_ci_high: f64,
    pub trials: u64,
    pub seed: u64,
    pub method: MessageMethod,
}

impl MessageEstimate {
    pub fn log10_p_hat(&self) -> f64 {
        self.ln_p_hat / std::f64::consts::LN_10
    }

    pub fn log10_ci(&self) -> (f64, f64) {
        (
            self.ln_ci_low / std::f64::consts::LN_10,
            self.ln_ci_high / std::f64::consts::LN_10,
        )
    }

    /// `ln` of the smallest nonzero value the estimator can report.
    pub fn ln_resolution(&self) -> f64 {
        match self.method {
            MessageMethod::Direct => -(self.trials as f64).ln(),
            MessageMethod::Lifted => -(self.n as f64) * (self.trials as f64).ln(),
        }
    }

    pub fn contains_ln(&self, ln_p: f64) -> bool {
        self.ln_ci_low <= ln_p && ln_p <= self.ln_ci_high
    }
}

fn check_n(n: u64) -> Result<(), SimError> {
    if n < 2 || n % 2 == 1 {
        Err(SimError::PacketCount(n))
    } else {
        Ok(())
    }
}

/// Lifts a per-packet estimate to `N` packets: `p̂₁^N` with CI endpoints `^N`.
pub fn lift(estimate: &InterceptEstimate, n: u64) -> MessageEstimate {
    let n_f = n as f64;
    MessageEstimate {
        n,
        ln_p_hat: n_f * estimate.p_hat.ln(),
        ln_ci_low: n_f * estimate.ci_low.ln(),
        ln_ci_high: n_f * estimate.ci_high.ln(),
        trials: estimate.trials,
        seed: estimate.seed,
        method: MessageMethod::Lifted,
    }
}

/// Message intercept estimate by either method.
pub fn estimate_message(
    scenario: &Scenario,
    n: u64,
    trials: u64,
    seed: u64,
    method: MessageMethod,
) -> Result<MessageEstimate, SimError> {
    check_n(n)?;
    let net = Network::from_scenario(scenario)?;
    match method {
        MessageMethod::Lifted => Ok(lift(&estimate_network(&net, trials, seed)?, n)),
        MessageMethod::Direct => {
            let hits = count_hits(trials, seed, |rng| {
                for _ in 0..n {
                    if !run_packet_trial(&net, rng)?.intercepted {
                        return Ok(false);
                    }
                }
                Ok(true)
            })?;
            let e = InterceptEstimate::from_counts(hits, trials, seed);
            Ok(MessageEstimate {
                n,
                ln_p_hat: e.p_hat.ln(),
                ln_ci_low: e.ci_low.ln(),
                ln_ci_high: e.ci_high.ln(),
                trials,
                seed,
                method: MessageMethod::Direct,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Protocol;

    #[test]
    fn wilson_contains_point_estimate() {
        for (h, n) in [(0, 1), (1, 1), (0, 10), (3, 10), (10, 10), (500, 1000)] {
            let (lo, hi) = wilson_interval(h, n, Z_95);
            let p = h as f64 / n as f64;
            assert!(lo <= p && p <= hi, "{h}/{n}: [{lo}, {hi}]");
            assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        }
        // Textbook value: 3/10 gives [0.1078, 0.6032].
        let (lo, hi) = wilson_interval(3, 10, Z_95);
        assert!((lo - 0.10779).abs() < 1e-4 && (hi - 0.60322).abs() < 1e-4, "{lo} {hi}");
    }

    #[test]
    fn single_trial_is_zero_or_one() {
        let s = Scenario::midpoint(Protocol::Direct, 1);
        let e = estimate_per_packet(&s, 1, 9).unwrap();
        assert!(e.p_hat == 0.0 || e.p_hat == 1.0);
        assert!(e.ci_high - e.ci_low > 0.5);
    }

    #[test]
    fn zero_trials_rejected() {
        let s = Scenario::midpoint(Protocol::Direct, 1);
        assert_eq!(estimate_per_packet(&s, 0, 1).unwrap_err(), SimError::ZeroTrials);
    }

    #[test]
    fn same_seed_same_estimate() {
        let s = Scenario::midpoint(Protocol::Af, 2);
        let a = estimate_per_packet(&s, 2000, 42).unwrap();
        let b = estimate_per_packet(&s, 2000, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn odd_message_rejected() {
        let s = Scenario::midpoint(Protocol::Direct, 1);
        assert_eq!(
            estimate_message(&s, 3, 10, 1, MessageMethod::Lifted).unwrap_err(),
            SimError::PacketCount(3)
        );
    }

    #[test]
    fn no_hits_gives_negative_infinity() {
        let e = InterceptEstimate::from_counts(0, 100, 1);
        let m = lift(&e, 10);
        assert_eq!(m.ln_p_hat, f64::NEG_INFINITY);
        assert!((m.ln_resolution() + 10.0 * 100f64.ln()).abs() < 1e-12);
    }
}
