use serde::Deserialize;

use crate::channel::{CollusionModel, Protocol, ReceiverModel, Scenario};
use crate::simulator::SweepGrid;

/// Top-level TOML document. Unknown keys are rejected.
///
/// ```toml
/// [scenario]
/// protocol = "dbj"
/// k_relays = 2
/// rho_db = 20.0
/// rate_bpcu = 1.0
/// alpha = 0.5
///
/// [scenario.geometry]
/// relay_fractions = [0.5, 0.5]
/// direct_link_present = false
///
/// [run]
/// trials = 100000
/// seed = 7
/// n_values = [2, 10, 100, 1000]
///
/// [sweep]
/// fractions = [0.2, 0.4, 0.6, 0.8]
/// ```
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub scenario: Scenario,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    /// Message lengths; defaults to the scenario's `n_packets`.
    pub n_values: Option<Vec<u64>>,
}

fn default_trials() -> u64 {
    100_000
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            trials: default_trials(),
            seed: 0,
            n_values: None,
        }
    }
}

/// Sweep axes. A missing axis holds the scenario's own value.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub protocols: Option<Vec<Protocol>>,
    pub relays: Option<Vec<usize>>,
    pub n_values: Option<Vec<u64>>,
    pub fractions: Option<Vec<f64>>,
    pub alphas: Option<Vec<f64>>,
    pub receivers: Option<Vec<ReceiverModel>>,
    pub collusions: Option<Vec<CollusionModel>>,
    /// Skip Monte Carlo and emit analytic columns only.
    #[serde(default)]
    pub analytic_only: bool,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn n_values(&self) -> Vec<u64> {
        self.run
            .n_values
            .clone()
            .unwrap_or_else(|| vec![self.scenario.n_packets as u64])
    }

    /// The sweep grid; `trials` is `None` for analytic-only sweeps.
    pub fn grid(&self, trials: u64, seed: u64) -> SweepGrid {
        let s = &self.scenario;
        let sw = &self.sweep;
        let base = SweepGrid::single(s, self.n_values(), Some(trials), seed);
        SweepGrid {
            protocols: sw.protocols.clone().unwrap_or(base.protocols.clone()),
            relays: sw.relays.clone().unwrap_or(base.relays.clone()),
            n_values: sw.n_values.clone().unwrap_or(base.n_values.clone()),
            fractions: sw.fractions.clone().unwrap_or(base.fractions.clone()),
            alphas: sw.alphas.clone().unwrap_or(base.alphas.clone()),
            receivers: sw.receivers.clone().unwrap_or(base.receivers.clone()),
            collusions: sw.collusions.clone().unwrap_or(base.collusions.clone()),
            trials: (!sw.analytic_only).then_some(trials),
            ..base
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[scenario]
protocol = "df"
k_relays = 1
rho_db = 20.0
rate_bpcu = 1.0
[scenario.geometry]
relay_fractions = [0.5]
"#;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = ConfigFile::parse(MINIMAL).unwrap();
        assert_eq!(c.scenario.alpha, 1.0);
        assert_eq!(c.scenario.receiver_model, ReceiverModel::BasicArq);
        assert_eq!(c.run.trials, 100_000);
        assert_eq!(c.n_values(), vec![2]);
        assert!(c.scenario.geometry.direct_link_present);
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = MINIMAL.replace("rate_bpcu", "rate");
        assert!(ConfigFile::parse(&bad).is_err());
        let extra = format!("{MINIMAL}\n[run]\ntrails = 5\n");
        assert!(ConfigFile::parse(&extra).is_err());
    }

    #[test]
    fn sweep_axes_default_to_scenario() {
        let text = format!("{MINIMAL}\n[sweep]\nrelays = [1, 2, 3]\nprotocols = [\"direct\", \"df\"]\n");
        let c = ConfigFile::parse(&text).unwrap();
        let g = c.grid(10, 3);
        assert_eq!(g.relays, vec![1, 2, 3]);
        assert_eq!(g.fractions, vec![0.5]);
        assert_eq!(g.protocols, vec![Protocol::Direct, Protocol::Df]);
        assert_eq!(g.trials, Some(10));
    }
}
