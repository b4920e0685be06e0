// Each example is compiled as a module and its `run_example` executed.

#[path = "../examples/af_bounds.rs"]
mod af_bounds;
#[path = "../examples/alpha_sweep.rs"]
mod alpha_sweep;
#[path = "../examples/codec_round_trip.rs"]
mod codec_round_trip;
#[path = "../examples/dbj_bounds.rs"]
mod dbj_bounds;
#[path = "../examples/direct_vs_df.rs"]
mod direct_vs_df;
#[path = "../examples/harq_accumulation.rs"]
mod harq_accumulation;
#[path = "../examples/link_budget.rs"]
mod link_budget;
#[path = "../examples/message_decay.rs"]
mod message_decay;
#[path = "../examples/oracle_check.rs"]
mod oracle_check;
#[path = "../examples/relay_location_sweep.rs"]
mod relay_location_sweep;

#[test]
fn af_bounds_runs() {
    af_bounds::run_example().unwrap();
}

#[test]
fn alpha_sweep_runs() {
    alpha_sweep::run_example().unwrap();
}

#[test]
fn codec_round_trip_runs() {
    codec_round_trip::run_example().unwrap();
}

#[test]
fn dbj_bounds_runs() {
    dbj_bounds::run_example().unwrap();
}

#[test]
fn direct_vs_df_runs() {
    direct_vs_df::run_example().unwrap();
}

#[test]
fn harq_accumulation_runs() {
    harq_accumulation::run_example().unwrap();
}

#[test]
fn link_budget_runs() {
    link_budget::run_example().unwrap();
}

#[test]
fn message_decay_runs() {
    message_decay::run_example().unwrap();
}

#[test]
fn oracle_check_runs() {
    oracle_check::run_example().unwrap();
}

#[test]
fn relay_location_sweep_runs() {
    relay_location_sweep::run_example().unwrap();
}
