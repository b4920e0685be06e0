use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use relaysec::analytic::analyze;
use relaysec::channel::{
    CollusionModel, Geometry, Protocol, ReceiverModel, RelayLink, Scenario,
};
use relaysec::simulator::{
    estimate_message, estimate_network, estimate_per_packet, run_packet_trial, MessageMethod,
    Network,
};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn scenario(protocol: Protocol, k: usize, rho_db: f64, f: f64) -> Scenario {
    let mut s = Scenario::midpoint(protocol, k);
    s.rho_db = rho_db;
    s.geometry = Geometry::collinear(k, f, protocol.uses_direct_link());
    s
}

#[test]
fn destination_slot_count_is_geometric() {
    // Rate 1 gives tau = 1, so each slot succeeds with probability e^{-ln 2} = 1/2.
    let net = Network {
        protocol: Protocol::Direct,
        rate: 1.0,
        alpha: 1.0,
        lambda_sd: Some(std::f64::consts::LN_2),
        relays: vec![RelayLink { lambda_sr: 1e9, lambda_rd: 1e9 }],
        receiver: ReceiverModel::BasicArq,
        collusion: CollusionModel::PerSlotMax,
    };
    const TRIALS: u64 = 100_000;
    const BINS: usize = 12;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut counts = [0u64; BINS];
    for _ in 0..TRIALS {
        let t = run_packet_trial(&net, &mut rng).unwrap().slots_to_dest as usize;
        counts[(t - 1).min(BINS - 1)] += 1;
    }
    let stat: f64 = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let p = if i + 1 < BINS { 0.5f64.powi(i as i32 + 1) } else { 0.5f64.powi(BINS as i32 - 1) };
            let e = p * TRIALS as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    let p_value = 1.0 - ChiSquared::new((BINS - 1) as f64).unwrap().cdf(stat);
    assert!(p_value > 0.01, "chi-square {stat}, p = {p_value}, counts {counts:?}");
}

#[test]
fn direct_and_lifted_message_estimates_agree() {
    let s = scenario(Protocol::Df, 1, 5.0, 0.5);
    let direct = estimate_message(&s, 2, 200_000, 5, MessageMethod::Direct).unwrap();
    let lifted = estimate_message(&s, 2, 200_000, 6, MessageMethod::Lifted).unwrap();
    assert!(
        direct.ln_ci_low <= lifted.ln_ci_high && lifted.ln_ci_low <= direct.ln_ci_high,
        "direct {direct:?} vs lifted {lifted:?}"
    );
    let p1 = analyze(&s).unwrap().intercept.exact.unwrap();
    assert!(direct.contains_ln(2.0 * p1.ln()) || lifted.contains_ln(2.0 * p1.ln()));
}

#[test]
fn estimates_do_not_depend_on_thread_count() {
    let s = scenario(Protocol::Af, 3, 10.0, 0.4);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate_per_packet(&s, 50_000, 99).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn df_matches_closed_form_within_three_sigma() {
    for (k, rho, f) in [(1, 20.0, 0.5), (2, 10.0, 0.3), (3, 5.0, 0.7)] {
        let s = scenario(Protocol::Df, k, rho, f);
        let p = analyze(&s).unwrap().intercept.exact.unwrap();
        let est = estimate_per_packet(&s, 200_000, 11).unwrap();
        let sigma = (p * (1.0 - p) / est.trials as f64).sqrt().max(1.0 / est.trials as f64);
        assert!((est.p_hat - p).abs() < 3.0 * sigma, "K={k}: sim {} vs {p}", est.p_hat);
    }
}

#[test]
fn af_estimate_lies_within_bounds() {
    for (k, rho, f) in [(1, 20.0, 0.5), (2, 10.0, 0.3), (3, 5.0, 0.7)] {
        let s = scenario(Protocol::Af, k, rho, f);
        let (lo, hi) = analyze(&s).unwrap().intercept.range();
        let est = estimate_per_packet(&s, 200_000, 12).unwrap();
        assert!(est.ci_high >= lo && est.ci_low <= hi, "K={k}: {est:?} vs [{lo}, {hi}]");
    }
}

#[test]
fn harq_never_hurts_the_destination() {
    let mut s = scenario(Protocol::Dbj, 2, 7.0, 0.6);
    s.alpha = 0.2;
    let basic = Network::from_scenario(&s).unwrap();
    s.receiver_model = ReceiverModel::Harq;
    let harq = Network::from_scenario(&s).unwrap();
    let mut rb = ChaCha8Rng::seed_from_u64(3);
    let mut rh = ChaCha8Rng::seed_from_u64(3);
    let mean = |net: &Network, rng: &mut ChaCha8Rng| {
        (0..20_000).map(|_| run_packet_trial(net, rng).unwrap().slots_to_dest as f64).sum::<f64>() / 20_000.0
    };
    assert!(mean(&harq, &mut rh) <= mean(&basic, &mut rb));
    assert!(estimate_network(&harq, 1000, 1).is_ok());
}
