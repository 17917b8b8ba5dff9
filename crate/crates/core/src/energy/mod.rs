//! Transceiver energy per information bit and capacity-versus-power comparison.

mod compare;
mod table;

pub use compare::{scheme_comparison, SchemeComparison, SchemeFit, SchemePoint};
pub use table::{ConverterSpec, EnergyTable};
