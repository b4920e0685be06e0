use rand::Rng;
use serde::Serialize;

use super::SimError;
use crate::channel::{
    argmax, derive_relay_links, rate_af_dest, rate_dbj_dest, rate_dbj_pair, rate_df_dest,
    rate_direct, rate_relay_eavesdrop, sample_snr, CollusionModel, Protocol, ReceiverModel,
    RelayLink, Scenario,
};

/// Upper limit on slots in one packet race.
pub const SLOT_CAP: u64 = 1_000_000;

/// Everything a packet race needs, resolved from a [`Scenario`] once.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub protocol: Protocol,
    pub rate: f64,
    pub alpha: f64,
    /// `None` when there is no S-D link.
    pub lambda_sd: Option<f64>,
    pub relays: Vec<RelayLink>,
    pub receiver: ReceiverModel,
    pub collusion: CollusionModel,
}

impl Network {
    pub fn from_scenario(scenario: &Scenario) -> Result<Self, SimError> {
        let relays = derive_relay_links(scenario)?;
        let rho = scenario.rho_linear();
        let eta = scenario.geometry.path_loss_exponent;
        let lambda_sd = scenario.geometry.direct_link_present.then(|| {
            crate::channel::lambda_for_distance(rho, crate::channel::Geometry::SD_DISTANCE, eta)
        });
        Ok(Network {
            protocol: scenario.protocol,
            rate: scenario.rate_bpcu,
            alpha: scenario.alpha,
            lambda_sd,
            relays,
            receiver: scenario.receiver_model,
            collusion: scenario.collusion_model,
        })
    }
}

/// Result of one packet race.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialOutcome {
    /// Slot in which the destination first decodes.
    pub slots_to_dest: u64,
    pub intercepted: bool,
    /// First slot in which the colluding relays decode, if no later than `slots_to_dest`.
    pub slots_to_intercept: Option<u64>,
    /// Relay used by the destination in each slot; `None` when none forwards.
    /// Only filled by [`run_packet_trial_traced`].
    pub selected_relay_trace: Vec<Option<usize>>,
}

/// Per-race receiver state.
struct Race<'a> {
    net: &'a Network,
    dest_acc: f64,
    relay_acc: Vec<f64>,
    pooled_acc: f64,
    gs: Vec<f64>,
    gd: Vec<f64>,
    relay_rates: Vec<f64>,
}

impl<'a> Race<'a> {
    fn new(net: &'a Network) -> Self {
        let k = net.relays.len();
        Race {
            net,
            dest_acc: 0.0,
            relay_acc: vec![0.0; k],
            pooled_acc: 0.0,
            gs: vec![0.0; k],
            gd: vec![0.0; k],
            relay_rates: vec![0.0; k],
        }
    }

    fn harq(&self) -> bool {
        self.net.receiver == ReceiverModel::Harq
    }

    /// Whether relay `k` on its own holds the packet after this slot's rate.
    fn relay_decodes(&self, k: usize) -> bool {
        let own = if self.harq() { self.relay_acc[k] } else { 0.0 };
        own + self.relay_rates[k] >= self.net.rate
    }

    /// One slot: returns `(dest_success, relays_success, selected_relay)`.
    fn slot<R: Rng + ?Sized>(&mut self, rng: &mut R) -> (bool, bool, Option<usize>) {
        let net = self.net;
        let gamma_sd = net.lambda_sd.map_or(0.0, |l| sample_snr(l, rng));
        for (k, link) in net.relays.iter().enumerate() {
            self.gs[k] = sample_snr(link.lambda_sr, rng);
            self.gd[k] = sample_snr(link.lambda_rd, rng);
        }
        for k in 0..net.relays.len() {
            self.relay_rates[k] = match net.protocol {
                Protocol::Direct => rate_relay_eavesdrop(self.gs[k], false),
                Protocol::Df | Protocol::Af => rate_relay_eavesdrop(self.gs[k], true),
                Protocol::Dbj => rate_dbj_pair(net.alpha, self.gs[k], self.gd[k]).relay_rate,
            };
        }

        let (dest_rate, selected) = match net.protocol {
            Protocol::Direct => (rate_direct(gamma_sd), None),
            Protocol::Df => {
                let decoders: Vec<usize> =
                    (0..net.relays.len()).filter(|&k| self.relay_decodes(k)).collect();
                let rd: Vec<f64> = decoders.iter().map(|&k| self.gd[k]).collect();
                let selected = argmax(rd.iter().copied()).map(|(i, _)| decoders[i]);
                (rate_df_dest(gamma_sd, &rd), selected)
            }
            Protocol::Af => {
                let pairs: Vec<(f64, f64)> =
                    self.gs.iter().copied().zip(self.gd.iter().copied()).collect();
                let sel = rate_af_dest(gamma_sd, &pairs).expect("at least one relay");
                (sel.rate, Some(sel.relay))
            }
            Protocol::Dbj => {
                let terms: Vec<f64> = self
                    .gs
                    .iter()
                    .zip(&self.gd)
                    .map(|(&s, &d)| rate_dbj_pair(net.alpha, s, d).dest_term)
                    .collect();
                let sel = rate_dbj_dest(&terms).expect("at least one relay");
                (sel.rate, Some(sel.relay))
            }
        };

        let dest_success = if self.harq() {
            self.dest_acc += dest_rate;
            self.dest_acc >= net.rate
        } else {
            dest_rate >= net.rate
        };

        let relays_success = match net.collusion {
            CollusionModel::Accumulate => {
                self.pooled_acc += self.relay_rates.iter().copied().fold(0.0, f64::max);
                self.pooled_acc >= net.rate
            }
            CollusionModel::PerSlotMax => (0..net.relays.len()).any(|k| self.relay_decodes(k)),
        };
        if self.harq() {
            for (acc, r) in self.relay_acc.iter_mut().zip(&self.relay_rates) {
                *acc += r;
            }
        }
        (dest_success, relays_success, selected)
    }
}

fn race<R: Rng + ?Sized>(
    net: &Network,
    rng: &mut R,
    mut trace: Option<&mut Vec<Option<usize>>>,
) -> Result<TrialOutcome, SimError> {
    let mut state = Race::new(net);
    let mut intercept_at = None;
    for slot in 1..=SLOT_CAP {
        let (dest, relays, selected) = state.slot(rng);
        if let Some(t) = trace.as_deref_mut() {
            t.push(selected);
        }
        if relays && intercept_at.is_none() {
            intercept_at = Some(slot);
        }
        if dest {
            return Ok(TrialOutcome {
                slots_to_dest: slot,
                intercepted: intercept_at.is_some(),
                slots_to_intercept: intercept_at,
                selected_relay_trace: Vec::new(),
            });
        }
    }
    Err(SimError::NonTerminating { slots: SLOT_CAP })
}

/// Runs one packet race until the destination decodes.
///
/// Each slot draws fresh fading for every link: S-D first (when present),
/// then `(S-k, k-D)` per relay in index order.
pub fn run_packet_trial<R: Rng + ?Sized>(net: &Network, rng: &mut R) -> Result<TrialOutcome, SimError> {
    race(net, rng, None)
}

/// [`run_packet_trial`] that also records the per-slot relay selection.
pub fn run_packet_trial_traced<R: Rng + ?Sized>(
    net: &Network,
    rng: &mut R,
) -> Result<TrialOutcome, SimError> {
    let mut trace = Vec::new();
    let mut outcome = race(net, rng, Some(&mut trace))?;
    outcome.selected_relay_trace = trace;
    Ok(outcome)
}
