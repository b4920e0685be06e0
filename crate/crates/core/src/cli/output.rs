use serde::Serialize;

use crate::simulator::{DeviationRecord, SweepRow};

/// Linear probabilities below this are written as 0 with `underflow = true`.
pub const UNDERFLOW: f64 = 1e-300;

pub const CSV_COLUMNS: [&str; 18] = [
    "protocol",
    "K",
    "N",
    "f",
    "alpha",
    "receiver",
    "collusion",
    "p1_analytic",
    "p1_lower",
    "p1_upper",
    "p1_sim",
    "ci_low",
    "ci_high",
    "log10_PI_analytic",
    "log10_PI_sim",
    "trials",
    "seed",
    "underflow",
];

/// Flat output record shared by CSV and JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputRow {
    pub protocol: &'static str,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n: u64,
    pub f: f64,
    pub alpha: f64,
    pub receiver: &'static str,
    pub collusion: &'static str,
    pub p1_analytic: Option<f64>,
    pub p1_lower: Option<f64>,
    pub p1_upper: Option<f64>,
    pub p1_sim: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    #[serde(rename = "log10_PI_analytic")]
    pub log10_pi_analytic: Option<f64>,
    #[serde(rename = "log10_PI_sim")]
    pub log10_pi_sim: Option<f64>,
    pub trials: Option<u64>,
    pub seed: u64,
    pub underflow: bool,
}

impl OutputRow {
    pub fn from_sweep(row: &SweepRow) -> Self {
        let mut underflow = false;
        let mut linear = |p: Option<f64>| {
            p.map(|p| {
                if p > 0.0 && p < UNDERFLOW {
                    underflow = true;
                    0.0
                } else {
                    p
                }
            })
        };
        let sim = row.p1_sim;
        OutputRow {
            protocol: row.protocol.name(),
            k: row.k,
            n: row.n,
            f: row.f,
            alpha: row.alpha,
            receiver: row.receiver.name(),
            collusion: row.collusion.name(),
            p1_analytic: linear(row.p1_analytic),
            p1_lower: linear(row.p1_lower),
            p1_upper: linear(row.p1_upper),
            p1_sim: linear(sim.map(|e| e.p_hat)),
            ci_low: linear(sim.map(|e| e.ci_low)),
            ci_high: linear(sim.map(|e| e.ci_high)),
            log10_pi_analytic: row.log10_pi_analytic,
            log10_pi_sim: row.log10_pi_sim,
            trials: sim.map(|e| e.trials),
            seed: row.seed,
            underflow,
        }
    }

    fn csv_fields(&self) -> Vec<String> {
        let num = |x: Option<f64>| match x {
            None => String::new(),
            Some(v) if v == f64::NEG_INFINITY => "-inf".to_string(),
            Some(v) => format!("{v}"),
        };
        vec![
            self.protocol.to_string(),
            self.k.to_string(),
            self.n.to_string(),
            format!("{}", self.f),
            format!("{}", self.alpha),
            self.receiver.to_string(),
            self.collusion.to_string(),
            num(self.p1_analytic),
            num(self.p1_lower),
            num(self.p1_upper),
            num(self.p1_sim),
            num(self.ci_low),
            num(self.ci_high),
            num(self.log10_pi_analytic),
            num(self.log10_pi_sim),
            self.trials.map(|t| t.to_string()).unwrap_or_default(),
            self.seed.to_string(),
            self.underflow.to_string(),
        ]
    }
}

pub fn to_csv(rows: &[OutputRow]) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS)?;
    for row in rows {
        w.write_record(row.csv_fields())?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

/// `-∞` and other non-finite values become `null`.
fn finite(row: &OutputRow) -> OutputRow {
    let keep = |x: Option<f64>| x.filter(|v| v.is_finite());
    OutputRow {
        log10_pi_analytic: keep(row.log10_pi_analytic),
        log10_pi_sim: keep(row.log10_pi_sim),
        ..row.clone()
    }
}

#[derive(Serialize)]
struct JsonDocument<'a> {
    rows: Vec<OutputRow>,
    deviations: &'a [DeviationRecord],
}

pub fn to_json(rows: &[OutputRow], deviations: &[DeviationRecord]) -> serde_json::Result<Vec<u8>> {
    let doc = JsonDocument {
        rows: rows.iter().map(finite).collect(),
        deviations,
    };
    let mut out = serde_json::to_vec_pretty(&doc)?;
    out.push(b'\n');
    Ok(out)
}

pub fn deviations_json(deviations: &[DeviationRecord]) -> serde_json::Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(deviations)?;
    out.push(b'\n');
    Ok(out)
}
