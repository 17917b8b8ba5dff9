//! Core and wavelength allocation over multicore fiber.

mod allocate;
mod curves;
mod plan;

pub use allocate::{optimize_allocation, score_plan, AllocationScore};
pub use curves::{compare_sdm_dwdm, skr_vs_distance, ComparisonOptions, CurvePoint, SdmDwdmCurves};
pub use plan::{ChannelPlan, MultiplexMode};
