//! Noise, key-rate, allocation, DSP and energy models for quantum-secured
//! coherent links over multicore fiber.

pub mod dsp;
pub mod energy;
pub mod error;
pub mod link;
pub mod planner;
pub mod qkd;
pub mod scenario;
pub mod seed;
pub mod units;

pub use error::{Error, Result};
