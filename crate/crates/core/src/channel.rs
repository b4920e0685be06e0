//! Scenario description, link statistics and instantaneous achievable rates.
//!
//! Every link is block Rayleigh faded, so the received SNR `γ_uv` is
//! exponential with rate `λ_uv = 1 / (ρ σ_uv²)`. Geometry is normalized: the
//! source sits at the origin, the destination at distance 1, and relay `k` on
//! the segment between them at fraction `f_k` from the source. The mean
//! channel power follows a power law, `σ² = d^(-η)`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("alpha must lie in (0, 1], got {0}")]
    Alpha(f64),
    #[error("target rate must be positive and finite, got {0}")]
    Rate(f64),
    #[error("transmit SNR must be finite, got {0} dB")]
    Rho(f64),
    #[error("at least one relay is required")]
    NoRelays,
    #[error("{k} relays but {fractions} relay fractions")]
    FractionCount { k: usize, fractions: usize },
    #[error("relay fraction {0} must lie strictly between 0 and 1")]
    Fraction(f64),
    #[error("path-loss exponent must be positive, got {0}")]
    PathLoss(f64),
    #[error("packet count must be even and at least 2, got {0}")]
    PacketCount(usize),
    #[error("relay fractions differ; closed-form analysis needs identical relay links")]
    HeterogeneousRelays,
    #[error("{protocol:?} requires direct_link_present = {required}")]
    DirectLink { protocol: Protocol, required: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    /// Relays idle; they only eavesdrop at the full-rate link capacity.
    Direct,
    /// Decode-and-forward with best-relay selection.
    Df,
    /// Amplify-and-forward with best-relay selection.
    Af,
    /// Amplify-and-forward without a direct link, destination jams phase I.
    Dbj,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Direct => "direct",
            Protocol::Df => "df",
            Protocol::Af => "af",
            Protocol::Dbj => "dbj",
        }
    }

    /// Whether the protocol is defined with an S-D link.
    pub fn uses_direct_link(self) -> bool {
        !matches!(self, Protocol::Dbj)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ReceiverModel {
    /// Erroneous packets are discarded; each slot stands alone.
    #[default]
    BasicArq,
    /// Receivers accumulate mutual information across retransmissions.
    Harq,
}

impl ReceiverModel {
    pub fn name(self) -> &'static str {
        match self {
            ReceiverModel::BasicArq => "basic-arq",
            ReceiverModel::Harq => "harq",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CollusionModel {
    /// A packet is intercepted when any single relay decodes it.
    #[default]
    PerSlotMax,
    /// The colluders pool the best per-slot relay mutual information.
    Accumulate,
}

impl CollusionModel {
    pub fn name(self) -> &'static str {
        match self {
            CollusionModel::PerSlotMax => "per-slot-max",
            CollusionModel::Accumulate => "accumulate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    pub relay_fractions: Vec<f64>,
    #[serde(default = "default_path_loss")]
    pub path_loss_exponent: f64,
    #[serde(default = "default_true")]
    pub direct_link_present: bool,
}

fn default_path_loss() -> f64 {
    4.0
}

fn default_true() -> bool {
    true
}

impl Geometry {
    /// Source-destination distance; geometry is normalized to it.
    pub const SD_DISTANCE: f64 = 1.0;

    /// `k` relays at the same fraction along the S-D segment.
    pub fn collinear(k: usize, fraction: f64, direct_link_present: bool) -> Self {
        Geometry {
            relay_fractions: vec![fraction; k],
            path_loss_exponent: default_path_loss(),
            direct_link_present,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub protocol: Protocol,
    pub k_relays: usize,
    pub rho_db: f64,
    pub rate_bpcu: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub geometry: Geometry,
    #[serde(default)]
    pub receiver_model: ReceiverModel,
    #[serde(default)]
    pub collusion_model: CollusionModel,
    #[serde(default = "default_packets")]
    pub n_packets: usize,
}

fn default_alpha() -> f64 {
    1.0
}

fn default_packets() -> usize {
    2
}

impl Scenario {
    /// The operating point used throughout the numerical study: ρ = 20 dB,
    /// R = 1 bpcu, relays at the S-D midpoint, η = 4.
    pub fn midpoint(protocol: Protocol, k_relays: usize) -> Self {
        Scenario {
            protocol,
            k_relays,
            rho_db: 20.0,
            rate_bpcu: 1.0,
            alpha: if protocol == Protocol::Dbj { 0.5 } else { 1.0 },
            geometry: Geometry::collinear(k_relays, 0.5, protocol.uses_direct_link()),
            receiver_model: ReceiverModel::BasicArq,
            collusion_model: CollusionModel::PerSlotMax,
            n_packets: 2,
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(ScenarioError::Alpha(self.alpha));
        }
        if !(self.rate_bpcu > 0.0 && self.rate_bpcu.is_finite()) {
            return Err(ScenarioError::Rate(self.rate_bpcu));
        }
        if !self.rho_db.is_finite() {
            return Err(ScenarioError::Rho(self.rho_db));
        }
        if self.k_relays == 0 {
            return Err(ScenarioError::NoRelays);
        }
        if self.geometry.relay_fractions.len() != self.k_relays {
            return Err(ScenarioError::FractionCount {
                k: self.k_relays,
                fractions: self.geometry.relay_fractions.len(),
            });
        }
        if let Some(&f) = self
            .geometry
            .relay_fractions
            .iter()
            .find(|&&f| !(f > 0.0 && f < 1.0))
        {
            return Err(ScenarioError::Fraction(f));
        }
        if !(self.geometry.path_loss_exponent > 0.0 && self.geometry.path_loss_exponent.is_finite()) {
            return Err(ScenarioError::PathLoss(self.geometry.path_loss_exponent));
        }
        if self.n_packets < 2 || self.n_packets % 2 == 1 {
            return Err(ScenarioError::PacketCount(self.n_packets));
        }
        let required = self.protocol.uses_direct_link();
        if self.geometry.direct_link_present != required {
            return Err(ScenarioError::DirectLink {
                protocol: self.protocol,
                required,
            });
        }
        Ok(())
    }

    pub fn rho_linear(&self) -> f64 {
        10f64.powf(self.rho_db / 10.0)
    }

    pub fn thresholds(&self) -> DerivedThresholds {
        DerivedThresholds::new(self.rate_bpcu, self.alpha)
    }

    /// The common relay fraction, if every relay sits at the same place.
    pub fn common_fraction(&self) -> Option<f64> {
        let first = *self.geometry.relay_fractions.first()?;
        self.geometry
            .relay_fractions
            .iter()
            .all(|&f| f == first)
            .then_some(first)
    }
}

/// SNR thresholds implied by the target rate `R` and the DBJ power split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedThresholds {
    /// `2^R - 1`: single-phase decoding threshold.
    pub tau: f64,
    /// `2^{2R} - 1`: two-phase (half-duplex) decoding threshold.
    pub tau_prime: f64,
    /// `2^{2R} - 0.75`: AF lower-SNR threshold after absorbing the 1/4 offset.
    pub tau1: f64,
    /// `(2^{2R} - 1)(1 - α)/(2 - α)`: DBJ relay-ratio threshold.
    pub tau2: f64,
    /// `2[(2^{2R} - 1)(2 - α) + 0.25]`: DBJ destination threshold.
    pub tau3: f64,
}

impl DerivedThresholds {
    pub fn new(rate: f64, alpha: f64) -> Self {
        let tau_prime = (2.0 * rate).exp2() - 1.0;
        DerivedThresholds {
            tau: rate.exp2() - 1.0,
            tau_prime,
            tau1: (2.0 * rate).exp2() - 0.75,
            tau2: tau_prime * (1.0 - alpha) / (2.0 - alpha),
            tau3: 2.0 * (tau_prime * (2.0 - alpha) + 0.25),
        }
    }
}

/// Exponential rates of the link SNRs, identical across relays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkParams {
    pub lambda_sd: f64,
    pub lambda_sr: f64,
    pub lambda_rd: f64,
}

/// Exponential rates for one relay's two links.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelayLink {
    pub lambda_sr: f64,
    pub lambda_rd: f64,
}

/// `λ = 1 / (ρ d^(-η))`.
pub fn lambda_for_distance(rho_linear: f64, distance: f64, eta: f64) -> f64 {
    1.0 / (rho_linear * distance.powf(-eta))
}

/// Common link rates for closed-form analysis.
///
/// Fails unless every relay sits at the same fraction. `lambda_sd` is filled
/// from the S-D distance even when the direct link is absent.
pub fn derive_link_params(scenario: &Scenario) -> Result<LinkParams, ScenarioError> {
    scenario.validate()?;
    let f = scenario
        .common_fraction()
        .ok_or(ScenarioError::HeterogeneousRelays)?;
    let rho = scenario.rho_linear();
    let eta = scenario.geometry.path_loss_exponent;
    Ok(LinkParams {
        lambda_sd: lambda_for_distance(rho, Geometry::SD_DISTANCE, eta),
        lambda_sr: lambda_for_distance(rho, f * Geometry::SD_DISTANCE, eta),
        lambda_rd: lambda_for_distance(rho, (1.0 - f) * Geometry::SD_DISTANCE, eta),
    })
}

/// Per-relay link rates; relays may sit at different fractions.
pub fn derive_relay_links(scenario: &Scenario) -> Result<Vec<RelayLink>, ScenarioError> {
    scenario.validate()?;
    let rho = scenario.rho_linear();
    let eta = scenario.geometry.path_loss_exponent;
    Ok(scenario
        .geometry
        .relay_fractions
        .iter()
        .map(|&f| RelayLink {
            lambda_sr: lambda_for_distance(rho, f, eta),
            lambda_rd: lambda_for_distance(rho, 1.0 - f, eta),
        })
        .collect())
}

/// Inverse-CDF map from a uniform draw in `[0, 1)` to an exponential SNR.
pub fn snr_from_uniform(lambda: f64, u: f64) -> f64 {
    -(-u).ln_1p() / lambda
}

/// One exponential SNR draw with mean `1 / lambda`.
pub fn sample_snr<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> f64 {
    debug_assert!(lambda > 0.0);
    snr_from_uniform(lambda, rng.random::<f64>())
}

pub fn rate_direct(gamma_sd: f64) -> f64 {
    gamma_sd.ln_1p() / std::f64::consts::LN_2
}

/// Relay eavesdropping rate; cooperating relays only see half the channel uses.
pub fn rate_relay_eavesdrop(gamma_sk: f64, cooperative: bool) -> f64 {
    let full = rate_direct(gamma_sk);
    if cooperative {
        0.5 * full
    } else {
        full
    }
}

/// Destination rate under DF given the relay-to-destination SNRs of the
/// relays that decoded in phase I.
pub fn rate_df_dest(gamma_sd: f64, decoder_rd_snrs: &[f64]) -> f64 {
    let best = decoder_rd_snrs.iter().copied().fold(0.0, f64::max);
    0.5 * rate_direct(gamma_sd + best)
}

/// End-to-end SNR contributed by an AF relay.
pub fn af_relay_term(gamma_sk: f64, gamma_kd: f64) -> f64 {
    gamma_sk * gamma_kd / (1.0 + gamma_sk + gamma_kd)
}

/// Lower bound on [`af_relay_term`]: `min/2 - 1/4`. May be negative.
pub fn af_term_lower(gamma_sk: f64, gamma_kd: f64) -> f64 {
    0.5 * gamma_sk.min(gamma_kd) - 0.25
}

/// Upper bound on [`af_relay_term`]: `min`.
pub fn af_term_upper(gamma_sk: f64, gamma_kd: f64) -> f64 {
    gamma_sk.min(gamma_kd)
}

/// Selected relay and destination rate under AF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AfSelection {
    pub rate: f64,
    pub relay: usize,
}

/// Destination rate under AF with the relay maximizing the end-to-end term.
/// Ties go to the lowest index.
pub fn rate_af_dest(gamma_sd: f64, relay_pairs: &[(f64, f64)]) -> Option<AfSelection> {
    let (relay, best) = argmax(relay_pairs.iter().map(|&(s, d)| af_relay_term(s, d)))?;
    Some(AfSelection {
        rate: 0.5 * rate_direct(gamma_sd + best),
        relay,
    })
}

/// Relay eavesdropping rate and destination SNR term for one relay under DBJ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbjPair {
    pub relay_rate: f64,
    pub dest_term: f64,
}

pub fn rate_dbj_pair(alpha: f64, gamma_sk: f64, gamma_kd: f64) -> DbjPair {
    let relay_snr = alpha * gamma_sk / (1.0 + (1.0 - alpha) * gamma_kd);
    DbjPair {
        relay_rate: 0.5 * rate_direct(relay_snr),
        dest_term: alpha * gamma_sk * gamma_kd / (1.0 + alpha * gamma_sk + (2.0 - alpha) * gamma_kd),
    }
}

/// Destination rate under DBJ from the per-relay terms of [`rate_dbj_pair`].
pub fn rate_dbj_dest(dest_terms: &[f64]) -> Option<AfSelection> {
    let (relay, best) = argmax(dest_terms.iter().copied())?;
    Some(AfSelection {
        rate: 0.5 * rate_direct(best),
        relay,
    })
}

/// Index and value of the first maximum.
pub(crate) fn argmax(values: impl Iterator<Item = f64>) -> Option<(usize, f64)> {
    values.enumerate().fold(None, |best, (i, v)| match best {
        Some((_, b)) if b >= v => best,
        _ => Some((i, v)),
    })
}
