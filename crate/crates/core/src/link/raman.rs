//! Spontaneous Raman noise: inter-core (ICSRS) and same-fiber (SRS).

use serde::{Deserialize, Serialize};

use super::FiberSpec;
use crate::error::{Error, Result};

/// Propagation direction of the scattered light relative to the pump.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SrsDirection {
    Forward,
    Backward,
}

/// ∫₀ᴸ e^{xz} dz, switching to a series when |x·L| is tiny.
fn exp_integral(x: f64, length: f64) -> f64 {
    let xl = x * length;
    if xl.abs() < 1e-6 {
        length * (1.0 + xl / 2.0 + xl * xl / 6.0 + xl * xl * xl / 24.0)
    } else {
        xl.exp_m1() / x
    }
}

fn check_inputs(p0_w: f64, filter_bw_nm: f64) -> Result<()> {
    if !(p0_w >= 0.0) {
        return Err(Error::Domain(format!("pump power must be >= 0, got {p0_w}")));
    }
    if !(filter_bw_nm >= 0.0) {
        return Err(Error::Domain(format!(
            "filter bandwidth must be >= 0, got {filter_bw_nm}"
        )));
    }
    Ok(())
}

/// Forward inter-core Raman power reaching the quantum core, W.
///
/// η is per nm of receiver bandwidth, so the result is scaled by `filter_bw_nm`.
pub fn forward_icsrs(p0_w: f64, fiber: &FiberSpec, filter_bw_nm: f64) -> Result<f64> {
    forward_icsrs_with_coupling(p0_w, fiber, fiber.coupling, filter_bw_nm)
}

/// Backward inter-core Raman power reaching the quantum core, W.
pub fn backward_icsrs(p0_w: f64, fiber: &FiberSpec, filter_bw_nm: f64) -> Result<f64> {
    backward_icsrs_with_coupling(p0_w, fiber, fiber.coupling, filter_bw_nm)
}

pub fn forward_icsrs_with_coupling(p0_w: f64, fiber: &FiberSpec, coupling: f64, filter_bw_nm: f64) -> Result<f64> {
    check_inputs(p0_w, filter_bw_nm)?;
    let l = fiber.length_km;
    let d = fiber.alpha_q - fiber.alpha_c;
    let bracket = exp_integral(d, l) - exp_integral(d - 2.0 * coupling, l);
    Ok((p0_w * fiber.raman_efficiency * filter_bw_nm * (-fiber.alpha_q * l).exp() * bracket).max(0.0))
}

pub fn backward_icsrs_with_coupling(p0_w: f64, fiber: &FiberSpec, coupling: f64, filter_bw_nm: f64) -> Result<f64> {
    check_inputs(p0_w, filter_bw_nm)?;
    let l = fiber.length_km;
    let s = fiber.alpha_q + fiber.alpha_c;
    // {(e^{-(s+2h)L} - 1)/(s+2h) - (e^{-sL} - 1)/s} = ∫e^{-sz}dz - ∫e^{-(s+2h)z}dz
    let bracket = exp_integral(-s, l) - exp_integral(-(s + 2.0 * coupling), l);
    Ok((p0_w * fiber.raman_efficiency * filter_bw_nm * bracket).max(0.0))
}

/// Same-fiber Raman noise from a pump co-propagating (forward) or counter-propagating (backward)
/// with the probe, W.
///
/// With equal attenuations this reduces to P₀ηΔλ·L·e^{-αL} (forward) and
/// P₀ηΔλ·(1 − e^{-2αL})/(2α) (backward).
pub fn same_fiber_srs(
    p0_w: f64,
    alpha_pump: f64,
    alpha_probe: f64,
    raman_efficiency: f64,
    filter_bw_nm: f64,
    length_km: f64,
    direction: SrsDirection,
) -> Result<f64> {
    check_inputs(p0_w, filter_bw_nm)?;
    if alpha_pump < 0.0 || alpha_probe < 0.0 || raman_efficiency < 0.0 || length_km < 0.0 {
        return Err(Error::Domain("SRS coefficients and length must be >= 0".into()));
    }
    let scale = p0_w * raman_efficiency * filter_bw_nm;
    let l = length_km;
    let v = match direction {
        SrsDirection::Forward => scale * (-alpha_probe * l).exp() * exp_integral(alpha_probe - alpha_pump, l),
        SrsDirection::Backward => scale * exp_integral(-(alpha_pump + alpha_probe), l),
    };
    Ok(v.max(0.0))
}
