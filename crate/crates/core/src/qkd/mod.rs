//! One-decoy BB84: detection statistics, finite-key bounds and secret key rate.

mod bounds;
mod params;
mod pipeline;
mod rate;
mod stats;

pub use bounds::{one_decoy_bounds, one_decoy_bounds_with, DecoyBounds, DeviationBound, Hoeffding};
pub use params::{DecoyParams, CALIBRATED_INSERTION_LOSS_DB, CALIBRATED_MISALIGNMENT};
pub use pipeline::{
    block_pulses, calibrate_insertion_loss, calibrate_misalignment, calibrate_operating_point, skr_pipeline,
    skr_pipeline_with, OperatingPoint, SkrReport,
};
pub use rate::{binary_entropy, ec_leakage, finite_key_rate, FiniteKeyInputs, SkrResult};
pub use stats::{expected_statistics, gains, simulate_session, simulate_session_tagged, SessionTally, TaggedSession};
