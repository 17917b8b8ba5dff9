//! Closed-form channel physics for classical/quantum coexistence over multicore fiber:
//! inter-core crosstalk, four-wave mixing, spontaneous Raman scattering (inter-core and
//! same-fiber) and the conversion of noise power into detector background clicks.

mod carrier;
mod detector;
mod fiber;
pub mod fwm;
mod noise;
pub mod raman;

pub use carrier::{Band, CarrierRole, OpticalCarrier};
pub use detector::DetectorSpec;
pub use fiber::{Adjacency, CouplingOverride, FiberSpec};
pub use fwm::{fwm_efficiency, fwm_peak_power, phase_mismatch_from_spacing, FwmMode};
pub use noise::{
    adjusted_dark_count, calibrate_filter_bandwidth, total_noise, total_noise_with, FilterCalibration, NoiseBudget,
    NoiseOptions,
};
pub use raman::{backward_icsrs, forward_icsrs, same_fiber_srs, SrsDirection};

use crate::error::{Error, Result};
use crate::units::{PLANCK, SPEED_OF_LIGHT};

/// Single-photon energy hc/λ in joules.
pub fn photon_energy(wavelength_nm: f64) -> Result<f64> {
    if !(wavelength_nm > 0.0) {
        return Err(Error::Domain(format!("wavelength must be > 0 nm, got {wavelength_nm}")));
    }
    Ok(PLANCK * SPEED_OF_LIGHT / (wavelength_nm * 1e-9))
}

/// Inter-core crosstalk as a linear power ratio, h·L.
pub fn icxt_ratio(h_per_km: f64, length_km: f64) -> Result<f64> {
    if h_per_km < 0.0 || length_km < 0.0 {
        return Err(Error::Domain("coupling and length must be >= 0".into()));
    }
    Ok(h_per_km * length_km)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::ratio_to_db;

    #[test]
    fn photon_energies() {
        let e1550 = photon_energy(1550.0).unwrap();
        assert!(((e1550 - 1.281_577_972_354_147_5e-19) / e1550).abs() < 1e-14);
        assert!((e1550 - 1.282e-19).abs() < 1e-22);
        let e1310 = photon_energy(1310.0).unwrap();
        assert!(((e1310 - 1.516_370_883_319_793e-19) / e1310).abs() < 1e-14);
        assert_eq!(photon_energy(775.0).unwrap(), 2.0 * e1550);
        assert!(photon_energy(0.0).is_err());
        assert!(photon_energy(-1.0).is_err());
    }

    #[test]
    fn crosstalk() {
        let x = icxt_ratio(7e-7, 3.5).unwrap();
        assert!((x - 2.45e-6).abs() < 1e-20);
        assert!((ratio_to_db(x) + 56.1).abs() < 0.05);
        assert_eq!(icxt_ratio(1.0, 0.0).unwrap(), 0.0);
        let x = icxt_ratio(7e-7, 100.0).unwrap();
        assert!((x - 7e-5).abs() < 1e-18);
        assert!((ratio_to_db(x) + 41.5).abs() < 0.05);
    }
}
