//! DBJ bounds across both jamming regimes and both lower-bound cases, with
//! the terms that had to be corrected against the oracle.

use relaysec::analytic::{analyze, dbj_terms};
use relaysec::channel::{derive_link_params, Geometry, Protocol, Scenario};
use relaysec::simulator::estimate_per_packet;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for (alpha, f) in [(0.2, 0.3), (0.8, 0.3), (0.5, 0.5), (0.8, 0.5)] {
        let mut s = Scenario::midpoint(Protocol::Dbj, 2);
        s.alpha = alpha;
        s.geometry = Geometry::collinear(2, f, false);
        let terms = dbj_terms(&derive_link_params(&s)?, 2, alpha, &s.thresholds());
        let a = analyze(&s)?;
        let (lo, hi) = a.intercept.range();
        let e = estimate_per_packet(&s, 50_000, 2)?;
        println!(
            "alpha={alpha} f={f} {:?}/{:?}: p1 in [{lo:.5}, {hi:.5}], simulated {:.5}",
            terms.regime, terms.lower_case, e.p_hat
        );
        for c in a.deviations() {
            println!("    {} rel.err {:.2e} -> {:?}", c.term, c.relative_error, c.source);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
