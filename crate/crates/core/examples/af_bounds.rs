//! AF intercept bracket, the oracle check behind each term, and a
//! simulated estimate that should land inside the bracket.

use relaysec::analytic::analyze;
use relaysec::channel::{Geometry, Protocol, Scenario};
use relaysec::simulator::estimate_per_packet;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut s = Scenario::midpoint(Protocol::Af, 1);
    s.rho_db = 10.0;
    s.geometry = Geometry::collinear(1, 0.7, true);
    let a = analyze(&s)?;
    for c in &a.checks {
        println!("{:<24} closed form {:.6e} oracle {:.6e} ({:?})", c.term, c.verbatim, c.oracle, c.source);
    }
    let (lo, hi) = a.intercept.range();
    let e = estimate_per_packet(&s, 200_000, 3)?;
    println!("p1 in [{lo:.5}, {hi:.5}], simulated {:.5} [{:.5}, {:.5}]", e.p_hat, e.ci_low, e.ci_high);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
