//! Rainbow beamforming for wideband LEO satellite uplink.
//!
//! A joint phase-time array (JPTA) on the satellite combines a true time delay
//! and a phase shifter per element. Instead of fighting beam squint, the
//! delays are chosen so that every OFDM subcarrier points at a different spot
//! of the coverage area, and the whole area is illuminated in a single time
//! slot with one RF chain.
//!
//! The crate is organised as follows:
//!
//! * [`geometry`] places users on a curved Earth and maps directions into the
//!   UV plane.
//! * [`channel`] holds the frequency plan, URA array responses, the link
//!   budget and the Rician channel.
//! * [`beamformer`] builds frequency-direction mappings and runs the
//!   alternating/decomposition optimizer for the JPTA delays and phases.
//! * [`allocation`] implements water-filling, the greedy joint subcarrier and
//!   power allocator, MaxCH and an exhaustive-search reference.
//! * [`evaluation`] contains the beam-hopping and beam-sharing baselines, 3 dB
//!   footprints and the Monte-Carlo scenario runner.
//! * [`cli`] parses scenario configuration files and drives the experiments
//!   behind the `rainbowbf` binary.
//!
//! Runnable walkthroughs for each capability live in the crate's `examples/`
//! directory.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allocation;
pub mod beamformer;
pub mod channel;
pub mod cli;
mod error;
pub mod evaluation;
pub mod geometry;
pub mod rng;

pub use error::{Error, Result};

/// Complex sample type used throughout the crate.
pub type Complex = num_complex::Complex64;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Converts decibels to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear power ratio to decibels.
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Converts dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}
