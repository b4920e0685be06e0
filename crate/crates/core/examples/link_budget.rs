//! Link rates and decoding thresholds for relays placed along the S-D line.

use relaysec::channel::{derive_link_params, Geometry, Protocol, Scenario};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut s = Scenario::midpoint(Protocol::Df, 1);
    let th = s.thresholds();
    println!("R = {} bpcu: tau = {}, tau' = {}, tau1 = {}", s.rate_bpcu, th.tau, th.tau_prime, th.tau1);
    println!("{:>5} {:>12} {:>12} {:>12}", "f", "lambda_SD", "lambda_SR", "lambda_RD");
    for f in [0.2, 0.4, 0.5, 0.6, 0.8] {
        s.geometry = Geometry::collinear(1, f, true);
        let l = derive_link_params(&s)?;
        println!("{f:>5} {:>12.3e} {:>12.3e} {:>12.3e}", l.lambda_sd, l.lambda_sr, l.lambda_rd);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
