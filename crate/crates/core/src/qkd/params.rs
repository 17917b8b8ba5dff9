use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Misalignment error that reproduces a 1.27% Z-basis QBER at 3.5 km with the seven-core
/// coexistence preset and the 1.17 dB receiver loss of [`CALIBRATED_INSERTION_LOSS_DB`].
pub const CALIBRATED_MISALIGNMENT: f64 = 0.01266;

/// Lumped receiver insertion loss that brings the 3.5 km key rate to 229.2 kb/s.
pub const CALIBRATED_INSERTION_LOSS_DB: f64 = 1.17;

/// One-decoy BB84 source, basis and post-processing settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecoyParams {
    pub mu: f64,
    pub nu: f64,
    /// Probability of sending the signal intensity μ.
    pub p_mu: f64,
    pub p_z_alice: f64,
    /// Bob's Z probability; a balanced passive splitter fixes it at 0.5.
    pub p_z_bob: f64,
    pub rep_rate_hz: f64,
    pub e_misalign: f64,
    pub f_ec: f64,
    pub eps_sec: f64,
    pub eps_cor: f64,
    /// Target number of sifted Z detections per block.
    pub block_n_z: f64,
}

impl Default for DecoyParams {
    fn default() -> Self {
        Self {
            mu: 0.523,
            nu: 0.131,
            p_mu: 0.798,
            p_z_alice: 0.898,
            p_z_bob: 0.5,
            rep_rate_hz: 100e6,
            e_misalign: CALIBRATED_MISALIGNMENT,
            f_ec: 1.16,
            eps_sec: 1e-9,
            eps_cor: 1e-15,
            block_n_z: 1e8,
        }
    }
}

fn open_unit(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must lie in (0, 1), got {v}")))
    }
}

impl DecoyParams {
    pub fn p_nu(&self) -> f64 {
        1.0 - self.p_mu
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0) {
            return Err(Error::invalid("nu", format!("must be > 0, got {}", self.nu)));
        }
        if !(self.nu < self.mu) {
            return Err(Error::Parameter(format!(
                "decoy intensity nu = {} must be below mu = {}",
                self.nu, self.mu
            )));
        }
        open_unit("p_mu", self.p_mu)?;
        open_unit("p_z_alice", self.p_z_alice)?;
        open_unit("p_z_bob", self.p_z_bob)?;
        open_unit("eps_sec", self.eps_sec)?;
        open_unit("eps_cor", self.eps_cor)?;
        if !(0.0..0.5).contains(&self.e_misalign) {
            return Err(Error::invalid(
                "e_misalign",
                format!("must lie in [0, 0.5), got {}", self.e_misalign),
            ));
        }
        if !(self.rep_rate_hz > 0.0 && self.rep_rate_hz.is_finite()) {
            return Err(Error::invalid("rep_rate_hz", "must be positive"));
        }
        if !(self.f_ec >= 1.0) {
            return Err(Error::invalid("f_ec", format!("must be >= 1, got {}", self.f_ec)));
        }
        if !(self.block_n_z >= 1.0 && self.block_n_z.is_finite()) {
            return Err(Error::invalid("block_n_z", "must be >= 1"));
        }
        Ok(())
    }
}
