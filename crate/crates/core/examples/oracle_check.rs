//! One slot-event probability three ways: closed form, quadrature and Monte Carlo.

use relaysec::analytic::{af_eps_both, oracle_epsilon, oracle_epsilon_mc, AfVariant, EventSpec, OracleParams};
use relaysec::channel::LinkParams;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let links = LinkParams { lambda_sd: 0.5, lambda_sr: 0.2, lambda_rd: 0.1 };
    let params = OracleParams::new(1.0, 1.0);
    let event = EventSpec::AfBothFail(AfVariant::Upper);
    for k in [1, 2, 3] {
        let closed = af_eps_both(&links, k, &params.thresholds, AfVariant::Upper);
        let quad = oracle_epsilon(event, &links, k, &params)?;
        let mc = oracle_epsilon_mc(event, &links, k, &params, 400_000, 1)?;
        println!(
            "K={k}: closed {closed:.6}  quadrature {:.6}  Monte Carlo {:.6} +/- {:.6}",
            quad.p, mc.p, mc.error
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
