use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CarrierRole {
    Quantum,
    LocalOscillator,
    ClassicalSignal,
}

impl CarrierRole {
    /// LO and data carriers both scatter into the quantum core.
    pub fn is_classical(self) -> bool {
        !matches!(self, CarrierRole::Quantum)
    }
}

/// One optical carrier placed on a core of the fiber.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpticalCarrier {
    pub wavelength_nm: f64,
    pub power_dbm: f64,
    pub core_index: usize,
    pub role: CarrierRole,
}

impl OpticalCarrier {
    pub fn new(role: CarrierRole, core_index: usize, wavelength_nm: f64, power_dbm: f64) -> Self {
        Self {
            wavelength_nm,
            power_dbm,
            core_index,
            role,
        }
    }

    pub fn validate(&self, core_count: usize) -> Result<()> {
        if !(self.wavelength_nm > 0.0) {
            return Err(Error::invalid(
                "wavelength_nm",
                format!("must be > 0, got {}", self.wavelength_nm),
            ));
        }
        if self.core_index >= core_count {
            return Err(Error::invalid(
                "core_index",
                format!("{} outside 0..{core_count}", self.core_index),
            ));
        }
        Ok(())
    }
}

/// Telecom band a wavelength falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    O,
    E,
    S,
    C,
    L,
    Other,
}

impl Band {
    pub fn of(wavelength_nm: f64) -> Self {
        match wavelength_nm {
            w if (1260.0..1360.0).contains(&w) => Band::O,
            w if (1360.0..1460.0).contains(&w) => Band::E,
            w if (1460.0..1530.0).contains(&w) => Band::S,
            w if (1530.0..1565.0).contains(&w) => Band::C,
            w if (1565.0..1625.0).contains(&w) => Band::L,
            _ => Band::Other,
        }
    }
}
