//! Security degrades as the relays move toward the source (DBJ, K = 2, N = 1000).

use relaysec::channel::{Protocol, Scenario};
use relaysec::simulator::{sweep, SweepGrid};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let s = Scenario::midpoint(Protocol::Dbj, 2);
    let grid = SweepGrid {
        fractions: vec![0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2],
        ..SweepGrid::single(&s, vec![1000], Some(50_000), 8)
    };
    for row in sweep(&grid)?.rows {
        println!(
            "f = {:.1}: log10 P_I analytic upper {:>10.3}, simulated {:>10.3}",
            row.f,
            row.log10_pi_analytic.unwrap(),
            row.log10_pi_sim.unwrap()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
