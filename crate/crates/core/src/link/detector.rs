use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::db_to_ratio;

/// Gated single-photon detector together with its lumped receiver optics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorSpec {
    /// Detector quantum efficiency.
    pub efficiency: f64,
    pub dark_rate_hz: f64,
    /// Gate width T_d in seconds.
    pub gate_width_s: f64,
    /// Intrinsic dark-count probability per gate.
    pub p_dc: f64,
    /// Receiver filter bandwidth Δλ applied to broadband Raman noise.
    pub filter_bw_nm: f64,
    /// Center wavelength of the receiver passband.
    pub wavelength_nm: f64,
    /// Lumped receiver insertion loss (coupler, decoder, filter) in dB.
    pub insertion_loss_db: f64,
}

impl DetectorSpec {
    /// Builds a detector whose per-gate dark probability is `dark_rate_hz * gate_width_s`.
    pub fn derived(efficiency: f64, dark_rate_hz: f64, gate_width_s: f64) -> Self {
        Self {
            efficiency,
            dark_rate_hz,
            gate_width_s,
            p_dc: dark_rate_hz * gate_width_s,
            filter_bw_nm: 0.8,
            wavelength_nm: 1550.0,
            insertion_loss_db: 3.0,
        }
    }

    /// InGaAs gated detector used in the coexistence link: 5.25 % efficiency, 600 Hz dark rate, 1 ns gate.
    pub fn ingaas_gated() -> Self {
        Self::derived(0.0525, 600.0, 1e-9)
    }

    /// Operating point of the dark-count-vs-launch-power measurement: p_dc fixed at 6e-6 per gate and
    /// no extra receiver loss, so that η_R equals the detector efficiency.
    pub fn dark_count_bench() -> Self {
        Self {
            p_dc: 6e-6,
            insertion_loss_db: 0.0,
            ..Self::ingaas_gated()
        }
    }

    /// Receiver transmittance (insertion loss only).
    pub fn receiver_transmittance(&self) -> f64 {
        db_to_ratio(-self.insertion_loss_db)
    }

    /// End-to-end single-photon transmittance from the fiber output to a click.
    pub fn eta_r(&self) -> f64 {
        self.efficiency * self.receiver_transmittance()
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::invalid(
                "efficiency",
                format!("{} not in [0, 1]", self.efficiency),
            ));
        }
        if !(0.0..=1.0).contains(&self.p_dc) {
            return Err(Error::invalid("p_dc", format!("{} not in [0, 1]", self.p_dc)));
        }
        if !(self.dark_rate_hz >= 0.0) {
            return Err(Error::invalid("dark_rate_hz", "must be >= 0"));
        }
        if !(self.gate_width_s > 0.0) {
            return Err(Error::invalid("gate_width_s", "must be > 0"));
        }
        if !(self.filter_bw_nm > 0.0) {
            return Err(Error::invalid(
                "filter_bw_nm",
                format!("must be > 0, got {}", self.filter_bw_nm),
            ));
        }
        if !(self.wavelength_nm > 0.0) {
            return Err(Error::invalid("wavelength_nm", "must be > 0"));
        }
        if !(self.insertion_loss_db >= 0.0) {
            return Err(Error::invalid("insertion_loss_db", "must be >= 0"));
        }
        Ok(())
    }
}

impl Default for DetectorSpec {
    fn default() -> Self {
        Self::ingaas_gated()
    }
}
