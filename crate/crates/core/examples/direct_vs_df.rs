//! Relays as pure eavesdroppers versus relays that cooperate under DF.

use relaysec::analytic::analyze;
use relaysec::channel::{Protocol, Scenario};
use relaysec::simulator::estimate_per_packet;

const TRIALS: u64 = 200_000;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>7} {:>2} {:>12} {:>12} {:>24}", "proto", "K", "analytic", "simulated", "95% CI");
    for protocol in [Protocol::Direct, Protocol::Df] {
        for k in 1..=3 {
            let s = Scenario::midpoint(protocol, k);
            let p = analyze(&s)?.intercept.exact.expect("exact form");
            let e = estimate_per_packet(&s, TRIALS, 1)?;
            println!(
                "{:>7} {k:>2} {p:>12.6} {:>12.6} [{:.6}, {:.6}]",
                protocol.name(),
                e.p_hat,
                e.ci_low,
                e.ci_high
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
