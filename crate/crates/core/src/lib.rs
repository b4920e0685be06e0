//! XOR self-encryption of packet blocks and intercept-probability analysis
//! for relay networks with untrusted, colluding relays.
//!
//! - [`codec`]: the XOR encoder/decoder and the GF(2) recoverability check.
//! - [`channel`]: Rayleigh-fading link model, geometry and rate formulas.
//! - [`analytic`]: closed-form intercept probabilities with quadrature oracles.
//! - [`simulator`]: Monte-Carlo ARQ/HARQ packet races.
//! - [`cli`]: the `relaysec` command-line front end.

pub mod analytic;
pub mod channel;
pub mod cli;
pub mod codec;
pub mod simulator;
