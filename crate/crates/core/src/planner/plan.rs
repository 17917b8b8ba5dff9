use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::{CarrierRole, FiberSpec, OpticalCarrier};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiplexMode {
    /// Space-division: the quantum channel has a core to itself.
    #[default]
    Sdm,
    /// Wavelength-division: classical carriers may share the quantum core.
    Dwdm,
}

/// Placement of quantum, LO and data carriers over the cores of a fiber.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelPlan {
    pub carriers: Vec<OpticalCarrier>,
    #[serde(default)]
    pub mode: MultiplexMode,
    /// Grid spacing used when a classical carrier sits on the quantum wavelength in DWDM mode.
    #[serde(default = "default_spacing")]
    pub channel_spacing_ghz: f64,
}

fn default_spacing() -> f64 {
    100.0
}

impl ChannelPlan {
    pub fn new(carriers: Vec<OpticalCarrier>, mode: MultiplexMode) -> Self {
        Self {
            carriers,
            mode,
            channel_spacing_ghz: default_spacing(),
        }
    }

    /// A lone quantum carrier on `core` at 1550 nm.
    pub fn quantum_only(core: usize) -> Self {
        Self::new(
            vec![OpticalCarrier::new(CarrierRole::Quantum, core, 1550.0, -60.0)],
            MultiplexMode::Sdm,
        )
    }

    /// Seven-core coexistence layout: quantum on outer core 1, LO on the opposite outer core 4,
    /// and the data signal split over the other five cores.
    pub fn seven_core_coexistence(data_dbm_per_core: f64, lo_dbm: f64) -> Self {
        let mut carriers = vec![
            OpticalCarrier::new(CarrierRole::Quantum, 1, 1550.0, -60.0),
            OpticalCarrier::new(CarrierRole::LocalOscillator, 4, 1550.0, lo_dbm),
        ];
        for core in [0, 2, 3, 5, 6] {
            carriers.push(OpticalCarrier::new(
                CarrierRole::ClassicalSignal,
                core,
                1550.0,
                data_dbm_per_core,
            ));
        }
        Self::new(carriers, MultiplexMode::Sdm)
    }

    pub fn quantum(&self) -> Result<&OpticalCarrier> {
        let mut q = self.carriers.iter().filter(|c| c.role == CarrierRole::Quantum);
        match (q.next(), q.next()) {
            (Some(c), None) => Ok(c),
            (None, _) => Err(Error::Plan("plan has no quantum carrier".into())),
            (Some(_), Some(_)) => Err(Error::Plan("plan has more than one quantum carrier".into())),
        }
    }

    pub fn classical(&self) -> impl Iterator<Item = &OpticalCarrier> {
        self.carriers.iter().filter(|c| c.role.is_classical())
    }

    pub fn validate(&self, fiber: &FiberSpec) -> Result<()> {
        let q = self.quantum()?;
        for c in &self.carriers {
            c.validate(fiber.core_count)
                .map_err(|e| Error::Plan(format!("carrier on core {}: {e}", c.core_index)))?;
        }
        if self.mode == MultiplexMode::Sdm {
            if let Some(c) = self.classical().find(|c| c.core_index == q.core_index) {
                return Err(Error::Plan(format!(
                    "SDM plan puts a {:?} carrier on quantum core {}",
                    c.role, c.core_index
                )));
            }
        }
        if !(self.channel_spacing_ghz >= 0.0) {
            return Err(Error::Plan("channel_spacing_ghz must be >= 0".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coexistence_layout_is_valid() {
        let fb = FiberSpec::seven_core(3.5);
        let p = ChannelPlan::seven_core_coexistence(-7.0, 0.0);
        p.validate(&fb).unwrap();
        assert_eq!(p.quantum().unwrap().core_index, 1);
        assert_eq!(p.classical().count(), 6);
    }

    #[test]
    fn sdm_forbids_shared_quantum_core() {
        let fb = FiberSpec::seven_core(3.5);
        let mut p = ChannelPlan::quantum_only(1);
        p.carriers
            .push(OpticalCarrier::new(CarrierRole::ClassicalSignal, 1, 1310.0, 0.0));
        assert!(matches!(p.validate(&fb), Err(Error::Plan(_))));
        p.mode = MultiplexMode::Dwdm;
        p.validate(&fb).unwrap();
    }

    #[test]
    fn bad_core_index() {
        let fb = FiberSpec::seven_core(3.5);
        let p = ChannelPlan::quantum_only(9);
        assert!(matches!(p.validate(&fb), Err(Error::Plan(_))));
    }
}
