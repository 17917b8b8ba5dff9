//! Scenario files, command dispatch and tabular output.

mod config;
mod run;
mod sweep;
mod table;

pub use config::{
    load_scenario, save_scenario, AllocationSection, CalibrationSection, CurvesSection, DspSection, EnergySection,
    FiberConfig, NoiseSection, Scenario, SkrSection, SweepSection,
};
pub use run::{constellation_table, dsp, run_dsp_with_constellation, run_scenario, Command};
pub use sweep::set_path;
pub use table::{emit_csv, format_number, Cell, ResultTable};
