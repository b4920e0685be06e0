use serde::Serialize;

use super::{estimate_network, lift, InterceptEstimate, Network, SimError};
use crate::analytic::{analyze, message_intercept, Analysis, TermCheck};
use crate::channel::{CollusionModel, Geometry, Protocol, ReceiverModel, Scenario};

/// Cartesian grid of scenario axes around a base scenario.
///
/// The alpha axis only applies to DBJ; other protocols run at `alpha = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub base: Scenario,
    pub protocols: Vec<Protocol>,
    pub relays: Vec<usize>,
    pub n_values: Vec<u64>,
    pub fractions: Vec<f64>,
    pub alphas: Vec<f64>,
    pub receivers: Vec<ReceiverModel>,
    pub collusions: Vec<CollusionModel>,
    /// Monte-Carlo trials per point; `None` for analytic-only rows.
    pub trials: Option<u64>,
    pub seed: u64,
}

impl SweepGrid {
    /// A one-point grid at `scenario`.
    pub fn single(scenario: &Scenario, n_values: Vec<u64>, trials: Option<u64>, seed: u64) -> Self {
        SweepGrid {
            base: scenario.clone(),
            protocols: vec![scenario.protocol],
            relays: vec![scenario.k_relays],
            n_values,
            fractions: vec![scenario.common_fraction().unwrap_or(0.5)],
            alphas: vec![scenario.alpha],
            receivers: vec![scenario.receiver_model],
            collusions: vec![scenario.collusion_model],
            trials,
            seed,
        }
    }

    fn check(&self) -> Result<(), SimError> {
        let axes = [
            ("protocols", self.protocols.is_empty()),
            ("relays", self.relays.is_empty()),
            ("n_values", self.n_values.is_empty()),
            ("fractions", self.fractions.is_empty()),
            ("alphas", self.alphas.is_empty()),
            ("receivers", self.receivers.is_empty()),
            ("collusions", self.collusions.is_empty()),
        ];
        if let Some((name, _)) = axes.iter().find(|(_, empty)| *empty) {
            return Err(SimError::EmptyGrid(name));
        }
        if self.trials == Some(0) {
            return Err(SimError::ZeroTrials);
        }
        for &n in &self.n_values {
            super::check_n(n)?;
        }
        Ok(())
    }

    /// Scenario points in row order, before expanding over `N`.
    fn points(&self) -> Vec<Scenario> {
        let mut out = Vec::new();
        for &protocol in &self.protocols {
            let alphas: &[f64] = if protocol == Protocol::Dbj { &self.alphas } else { &[1.0] };
            for &k in &self.relays {
                for &f in &self.fractions {
                    for &alpha in alphas {
                        for &receiver_model in &self.receivers {
                            for &collusion_model in &self.collusions {
                                out.push(Scenario {
                                    protocol,
                                    k_relays: k,
                                    alpha,
                                    geometry: Geometry {
                                        relay_fractions: vec![f; k],
                                        path_loss_exponent: self.base.geometry.path_loss_exponent,
                                        direct_link_present: protocol.uses_direct_link(),
                                    },
                                    receiver_model,
                                    collusion_model,
                                    ..self.base.clone()
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// One `(point, N)` row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub protocol: Protocol,
    pub k: usize,
    pub n: u64,
    pub f: f64,
    pub alpha: f64,
    pub receiver: ReceiverModel,
    pub collusion: CollusionModel,
    pub p1_analytic: Option<f64>,
    pub p1_lower: Option<f64>,
    pub p1_upper: Option<f64>,
    pub p1_sim: Option<InterceptEstimate>,
    /// Exact value, or the upper bound for bracketed protocols.
    pub log10_pi_analytic: Option<f64>,
    pub log10_pi_analytic_lower: Option<f64>,
    pub log10_pi_sim: Option<f64>,
    pub log10_pi_sim_ci: Option<(f64, f64)>,
    pub seed: u64,
}

/// A closed-form term that did not match its oracle, tagged with its point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationRecord {
    pub protocol: Protocol,
    pub k: usize,
    pub f: f64,
    pub alpha: f64,
    #[serde(flatten)]
    pub check: TermCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub deviations: Vec<DeviationRecord>,
}

fn point_rows(
    grid: &SweepGrid,
    scenario: &Scenario,
    analysis: &Analysis,
    sim: Option<InterceptEstimate>,
) -> Result<Vec<SweepRow>, SimError> {
    let f = scenario.common_fraction().expect("grid points share one fraction");
    grid.n_values
        .iter()
        .map(|&n| {
            let analytic = message_intercept(&analysis.intercept, n)?;
            let lifted = sim.map(|e| lift(&e, n));
            Ok(SweepRow {
                protocol: scenario.protocol,
                k: scenario.k_relays,
                n,
                f,
                alpha: scenario.alpha,
                receiver: scenario.receiver_model,
                collusion: scenario.collusion_model,
                p1_analytic: analysis.intercept.exact,
                p1_lower: analysis.intercept.lower,
                p1_upper: analysis.intercept.upper,
                p1_sim: sim,
                log10_pi_analytic: analytic.log10_exact().or(analytic.log10_upper()),
                log10_pi_analytic_lower: analytic.log10_lower(),
                log10_pi_sim: lifted.map(|m| m.log10_p_hat()),
                log10_pi_sim_ci: lifted.map(|m| m.log10_ci()),
                seed: grid.seed,
            })
        })
        .collect()
}

/// Evaluates every grid point in deterministic row order: protocol, K, f,
/// alpha, receiver, collusion, then N.
///
/// Every point is simulated with the grid seed, so neighbouring rows share
/// random numbers and each row can be reproduced alone.
pub fn sweep(grid: &SweepGrid) -> Result<SweepOutput, SimError> {
    grid.check()?;
    let mut rows = Vec::new();
    let mut deviations = Vec::new();
    for scenario in grid.points() {
        let analysis = analyze(&scenario)?;
        let f = scenario.common_fraction().expect("grid points share one fraction");
        deviations.extend(analysis.deviations().map(|c| DeviationRecord {
            protocol: scenario.protocol,
            k: scenario.k_relays,
            f,
            alpha: scenario.alpha,
            check: c.clone(),
        }));
        let sim = match grid.trials {
            Some(t) => Some(estimate_network(&Network::from_scenario(&scenario)?, t, grid.seed)?),
            None => None,
        };
        rows.extend(point_rows(grid, &scenario, &analysis, sim)?);
    }
    Ok(SweepOutput { rows, deviations })
}
