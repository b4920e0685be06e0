//! Message intercept probability decays geometrically in the block size.

use relaysec::analytic::{analyze, message_intercept};
use relaysec::channel::{Protocol, Scenario};
use relaysec::simulator::{estimate_message, estimate_per_packet, lift, MessageMethod};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let s = Scenario::midpoint(Protocol::Dbj, 2);
    let a = analyze(&s)?;
    let per_packet = estimate_per_packet(&s, 100_000, 4)?;
    println!("{:>5} {:>14} {:>14} {:>14}", "N", "log10 upper", "log10 lower", "log10 sim");
    for n in [2, 10, 100, 1000] {
        let m = message_intercept(&a.intercept, n)?;
        let sim = lift(&per_packet, n);
        println!(
            "{n:>5} {:>14.4} {:>14.4} {:>14.4}",
            m.log10_upper().unwrap(),
            m.log10_lower().unwrap(),
            sim.log10_p_hat()
        );
    }
    let direct = estimate_message(&s, 2, 100_000, 4, MessageMethod::Direct)?;
    println!("N=2 by direct simulation: log10 {:.4}", direct.log10_p_hat());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
