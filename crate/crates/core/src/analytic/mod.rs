//! Closed-form per-packet and message intercept probabilities.
//!
//! A packet is intercepted when the colluding relays decode it no later than
//! the destination does under ARQ. With per-slot probabilities `ε_{R,D}`
//! (relays and destination both fail) and `ε_{R,D̄}` (relays fail, the
//! destination succeeds), the slot race gives
//! `p₁ = 1 - ε_{R,D̄} / (1 - ε_{R,D})`, and a block of `N` processed packets is
//! intercepted with probability `p₁^N`.
//!
//! Direct transmission and DF have exact forms. AF and DBJ are bracketed by
//! replacing the end-to-end SNR with simpler bounds; those closed forms are
//! cross-checked term by term against [`oracle`] when they are evaluated.

mod binomial;
mod closed_form;
pub mod oracle;

pub use binomial::{binomial, g_prime_sum, g_weighted_sum, MAX_RELAYS};
pub use closed_form::{
    af_eps_both, af_eps_only_dest, af_terms, dbj_eps_exact, dbj_eps_verbatim, dbj_terms,
    per_packet_intercept_af, per_packet_intercept_dbj, per_packet_intercept_df,
    per_packet_intercept_direct, race_intercept, AfTerms, DbjRegime, DbjTerms, LambdaReading,
};
pub use oracle::{
    oracle_epsilon, oracle_epsilon_mc, AfVariant, DbjBound, EventSpec, LowerCase, OracleMethod,
    OracleParams, OracleValue,
};

use serde::Serialize;
use thiserror::Error;

use crate::channel::{derive_link_params, Protocol, Scenario, ScenarioError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("closed forms support at most {MAX_RELAYS} relays, got {0}")]
    TooManyRelays(usize),
    #[error("at least one relay is required")]
    NoRelays,
    #[error("the DBJ lower bound divides by 1 - alpha; alpha = 1 disables jamming")]
    AlphaOne,
    #[error("alpha must lie in (0, 1), got {0}")]
    Alpha(f64),
    #[error("argument {0} must be non-negative")]
    Negative(f64),
    #[error("probability {0} outside [0, 1]")]
    Probability(f64),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("neither receiver can decode (joint failure probability {0}); the packet race never ends")]
    RaceNeverEnds(f64),
}

/// `F(χ) = 1 - e^{-χ}` for `χ >= 0`.
pub fn f_cdf(chi: f64) -> Result<f64, AnalyticError> {
    if chi < 0.0 || chi.is_nan() {
        return Err(AnalyticError::Negative(chi));
    }
    Ok(-(-chi).exp_m1())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    ClosedForm,
    Oracle,
    Simulated,
}

/// Per-packet intercept probability: exact, or a lower/upper bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerPacketIntercept {
    pub exact: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub provenance: Provenance,
}

impl PerPacketIntercept {
    pub fn exact(p: f64, provenance: Provenance) -> Self {
        PerPacketIntercept {
            exact: Some(clamp_unit(p)),
            lower: None,
            upper: None,
            provenance,
        }
    }

    pub fn bounds(lower: f64, upper: f64, provenance: Provenance) -> Self {
        PerPacketIntercept {
            exact: None,
            lower: Some(clamp_unit(lower)),
            upper: Some(clamp_unit(upper)),
            provenance,
        }
    }

    /// `(lower, upper)`, both equal to the exact value when there is one.
    pub fn range(&self) -> (f64, f64) {
        match (self.exact, self.lower, self.upper) {
            (Some(p), _, _) => (p, p),
            (None, Some(lo), Some(hi)) => (lo, hi),
            _ => (0.0, 1.0),
        }
    }
}

fn clamp_unit(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

/// Where the value used for one closed-form term came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum TermSource {
    /// The closed form as transcribed agreed with the oracle.
    Verbatim,
    /// An alternative reading of an ambiguous symbol agreed with the oracle.
    AlternateReading(String),
    /// Replaced by the exact per-relay factorization.
    Exact,
    /// Replaced by the quadrature oracle itself.
    Oracle,
}

/// One closed-form term compared with its defining-event oracle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermCheck {
    pub term: String,
    pub verbatim: f64,
    pub oracle: f64,
    pub used: f64,
    /// `|verbatim - oracle| / |oracle|`.
    pub relative_error: f64,
    pub source: TermSource,
}

impl TermCheck {
    pub fn is_deviation(&self) -> bool {
        self.source != TermSource::Verbatim
    }
}

/// Relative tolerance between a closed form and its quadrature oracle.
pub const ORACLE_RTOL: f64 = 1e-3;

pub(crate) fn agrees(value: f64, oracle: f64) -> bool {
    (value - oracle).abs() <= ORACLE_RTOL * oracle.abs() + f64::MIN_POSITIVE
}

pub(crate) fn relative_error(value: f64, oracle: f64) -> f64 {
    if oracle == 0.0 {
        value.abs()
    } else {
        ((value - oracle) / oracle).abs()
    }
}

/// A per-packet result plus the term-by-term oracle comparison behind it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Analysis {
    pub protocol: Protocol,
    pub intercept: PerPacketIntercept,
    pub checks: Vec<TermCheck>,
}

impl Analysis {
    pub fn deviations(&self) -> impl Iterator<Item = &TermCheck> {
        self.checks.iter().filter(|c| c.is_deviation())
    }
}

/// Closed-form analysis of a homogeneous scenario.
pub fn analyze(scenario: &Scenario) -> Result<Analysis, AnalyticError> {
    let links = derive_link_params(scenario)?;
    let th = scenario.thresholds();
    let k = scenario.k_relays;
    match scenario.protocol {
        Protocol::Direct => Ok(Analysis {
            protocol: Protocol::Direct,
            intercept: per_packet_intercept_direct(&links, k, &th)?,
            checks: Vec::new(),
        }),
        Protocol::Df => Ok(Analysis {
            protocol: Protocol::Df,
            intercept: per_packet_intercept_df(&links, k, &th)?,
            checks: Vec::new(),
        }),
        Protocol::Af => per_packet_intercept_af(&links, k, &th),
        Protocol::Dbj => per_packet_intercept_dbj(&links, k, scenario.alpha, &th),
    }
}

/// Natural-log message intercept probability `N ln p₁`; `-∞` when `p₁ = 0`.
pub fn message_log(p_one: f64, n: u64) -> Result<f64, AnalyticError> {
    if !(0.0..=1.0).contains(&p_one) {
        return Err(AnalyticError::Probability(p_one));
    }
    Ok(if p_one == 0.0 {
        f64::NEG_INFINITY
    } else {
        n as f64 * p_one.ln()
    })
}

/// Message intercept probability in the natural-log domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MessageIntercept {
    pub n: u64,
    pub ln_exact: Option<f64>,
    pub ln_lower: Option<f64>,
    pub ln_upper: Option<f64>,
}

impl MessageIntercept {
    pub fn log10_exact(&self) -> Option<f64> {
        self.ln_exact.map(|x| x / std::f64::consts::LN_10)
    }

    pub fn log10_lower(&self) -> Option<f64> {
        self.ln_lower.map(|x| x / std::f64::consts::LN_10)
    }

    pub fn log10_upper(&self) -> Option<f64> {
        self.ln_upper.map(|x| x / std::f64::consts::LN_10)
    }
}

/// Lifts a per-packet result to an `N`-packet block.
pub fn message_intercept(p: &PerPacketIntercept, n: u64) -> Result<MessageIntercept, AnalyticError> {
    let lift = |x: Option<f64>| x.map(|p| message_log(p, n)).transpose();
    Ok(MessageIntercept {
        n,
        ln_exact: lift(p.exact)?,
        ln_lower: lift(p.lower)?,
        ln_upper: lift(p.upper)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_cdf_values() {
        assert_eq!(f_cdf(0.0).unwrap(), 0.0);
        assert!((f_cdf(2f64.ln()).unwrap() - 0.5).abs() < 1e-15);
        assert!((f_cdf(1e9).unwrap() - 1.0).abs() < 1e-15);
        assert!(f_cdf(-1.0).is_err());
    }

    #[test]
    fn message_log_values() {
        let half = message_log(0.5, 10).unwrap().exp();
        assert!((half - 2f64.powi(-10)).abs() < 1e-18);
        assert_eq!(message_log(1.0, 12345).unwrap(), 0.0);
        let small = message_log(0.99, 1000).unwrap().exp();
        assert!((small - 4.3171247410657e-5).abs() < 1e-15, "{small}");
        assert_eq!(message_log(0.0, 3).unwrap(), f64::NEG_INFINITY);
        assert!(message_log(1.5, 3).is_err());
    }

    #[test]
    fn message_lift_keeps_bounds() {
        let p = PerPacketIntercept::bounds(0.2, 0.4, Provenance::ClosedForm);
        let m = message_intercept(&p, 5).unwrap();
        assert!(m.ln_exact.is_none());
        assert!((m.ln_lower.unwrap() - 5.0 * 0.2f64.ln()).abs() < 1e-14);
        assert!(m.log10_upper().unwrap() > m.log10_lower().unwrap());
    }
}
