//! Basic ARQ versus HARQ receivers, and relays that pool mutual information.

use relaysec::channel::{CollusionModel, Geometry, Protocol, ReceiverModel, Scenario};
use relaysec::simulator::{estimate_per_packet, lift};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut s = Scenario::midpoint(Protocol::Dbj, 2);
    s.rho_db = 7.0;
    s.alpha = 0.2;
    s.geometry = Geometry::collinear(2, 0.6, false);
    for receiver in [ReceiverModel::BasicArq, ReceiverModel::Harq] {
        for collusion in [CollusionModel::PerSlotMax, CollusionModel::Accumulate] {
            s.receiver_model = receiver;
            s.collusion_model = collusion;
            let e = estimate_per_packet(&s, 200_000, 6)?;
            println!(
                "{:>9} / {:<12} p1 = {:.5} [{:.5}, {:.5}]  log10 P_I(N=100) = {:.2}",
                receiver.name(),
                collusion.name(),
                e.p_hat,
                e.ci_low,
                e.ci_high,
                lift(&e, 100).log10_p_hat()
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
