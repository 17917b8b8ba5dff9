//! Four-wave-mixing power and efficiency.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the phase-matching efficiency is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FwmMode {
    /// Full efficiency including the sin² beat term.
    #[default]
    Exact,
    /// Envelope α²/(α²+Δβ²) only; the oscillatory term is dropped.
    PeakEnvelope,
}

/// Phase mismatch |β₂|(2πΔf)² in 1/km for a channel spacing in GHz.
pub fn phase_mismatch_from_spacing(beta2_ps2_per_km: f64, spacing_ghz: f64) -> f64 {
    let omega = 2.0 * PI * spacing_ghz * 1e9; // rad/s
    beta2_ps2_per_km.abs() * 1e-24 * omega * omega
}

/// FWM efficiency η(α, Δβ, z).
pub fn fwm_efficiency(alpha_per_km: f64, delta_beta_per_km: f64, z_km: f64) -> Result<f64> {
    fwm_efficiency_mode(alpha_per_km, delta_beta_per_km, z_km, FwmMode::Exact)
}

pub fn fwm_efficiency_mode(alpha: f64, delta_beta: f64, z_km: f64, mode: FwmMode) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("fwm attenuation must be > 0, got {alpha}")));
    }
    if !(z_km > 0.0) {
        return Err(Error::Domain(format!(
            "fwm efficiency undefined at z = {z_km} km (vanishing loss term)"
        )));
    }
    let a2 = alpha * alpha;
    let envelope = a2 / (a2 + delta_beta * delta_beta);
    if mode == FwmMode::PeakEnvelope {
        return Ok(envelope);
    }
    let loss = -(-alpha * z_km).exp_m1(); // 1 - e^{-αz}
    let beat = (delta_beta * z_km / 2.0).sin();
    Ok(envelope * (1.0 + 4.0 * (-alpha * z_km).exp() * beat * beat / (loss * loss)))
}

/// Peak FWM product power in W.
///
/// `gamma` in 1/(W·km), `alpha` in 1/km. The degeneracy factor is 3 for a degenerate
/// product (i = j) and 6 otherwise.
#[allow(clippy::too_many_arguments)]
pub fn fwm_peak_power(
    p_i_w: f64,
    p_j_w: f64,
    p_k_w: f64,
    gamma: f64,
    alpha: f64,
    z_km: f64,
    degenerate: bool,
    delta_beta: f64,
    mode: FwmMode,
) -> Result<f64> {
    if p_i_w < 0.0 || p_j_w < 0.0 || p_k_w < 0.0 {
        return Err(Error::Domain("fwm input powers must be >= 0".into()));
    }
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("fwm attenuation must be > 0, got {alpha}")));
    }
    if z_km <= 0.0 {
        return Ok(0.0);
    }
    let d = if degenerate { 3.0 } else { 6.0 };
    let eta = fwm_efficiency_mode(alpha, delta_beta, z_km, mode)?;
    let loss = -(-alpha * z_km).exp_m1();
    Ok(
        eta * d * d * gamma * gamma * p_i_w * p_j_w * p_k_w * (-alpha * z_km).exp() * loss * loss
            / (9.0 * alpha * alpha),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn matched_phase_gives_unit_efficiency() {
        for z in [0.01, 1.0, 3.5, 50.0, 300.0] {
            assert!((fwm_efficiency(0.046, 0.0, z).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_length_is_domain_error() {
        assert!(matches!(fwm_efficiency(0.046, 1.0, 0.0), Err(Error::Domain(_))));
        assert_eq!(
            fwm_peak_power(1e-3, 1e-3, 1e-3, 1.3, 0.046, 0.0, true, 1.0, FwmMode::Exact).unwrap(),
            0.0
        );
    }

    #[test]
    fn long_fiber_tends_to_envelope() {
        // 50-digit reference at z = 100 km.
        let eta = fwm_efficiency(0.046, 8.6, 100.0).unwrap();
        assert!(rel(eta, 2.878_572_241_906_024e-5) < 1e-10);
        let env = fwm_efficiency_mode(0.046, 8.6, 100.0, FwmMode::PeakEnvelope).unwrap();
        assert!(rel(env, 2.86e-5) < 2e-3);
    }

    #[test]
    fn spacing_to_mismatch() {
        assert_eq!(phase_mismatch_from_spacing(21.7, 0.0), 0.0);
        let db = phase_mismatch_from_spacing(21.7, 100.0);
        assert!(rel(db, 8.566_816_620_145_563) < 1e-12);
        // Dimensional cross-check: ps²/km · (rad/ps)² = 1/km with Δω in rad/ps.
        let omega_rad_per_ps = 2.0 * PI * 100e9 * 1e-12;
        assert!(rel(db, 21.7 * omega_rad_per_ps * omega_rad_per_ps) < 1e-12);
        assert!(rel(phase_mismatch_from_spacing(21.7, 200.0), 4.0 * db) < 1e-12);
    }

    #[test]
    fn peak_power_matches_high_precision_reference() {
        let db = phase_mismatch_from_spacing(21.7, 100.0);
        let p = fwm_peak_power(1e-3, 1e-3, 1e-3, 1.3, 0.046, 3.5, true, db, FwmMode::Exact).unwrap();
        assert!(rel(p, 2.919_335_971_504_007_3e-11) < 1e-12, "{p:e}");
        let p = fwm_peak_power(1e-3, 2e-3, 3e-3, 1.3, 0.046, 3.5, false, db, FwmMode::Exact).unwrap();
        assert!(rel(p, 7.006_406_331_609_617e-10) < 1e-12, "{p:e}");
        let p = fwm_peak_power(1e-3, 1e-3, 1e-3, 1.3, 0.046, 3.5, true, 0.0, FwmMode::Exact).unwrap();
        assert!(rel(p, 1.503_550_016_886_052_3e-8) < 1e-12, "{p:e}");
    }

    #[test]
    fn zero_input_power() {
        let p = fwm_peak_power(0.0, 1e-3, 1e-3, 1.3, 0.046, 3.5, true, 1.0, FwmMode::Exact).unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn envelope_falls_as_fourth_power_of_spacing() {
        let pts: Vec<(f64, f64)> = (0..=20)
            .map(|i| {
                let f = 100.0 * 10f64.powf(i as f64 / 20.0);
                let db = phase_mismatch_from_spacing(21.7, f);
                let e = fwm_efficiency_mode(0.046, db, 3.5, FwmMode::PeakEnvelope).unwrap();
                (f.log10(), e.log10())
            })
            .collect();
        for w in pts.windows(2) {
            let slope = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            assert!((slope + 4.0).abs() < 0.01, "local slope {slope}");
        }
    }

    proptest! {
        #[test]
        fn permutation_symmetric(a in 0.0f64..1e-2, b in 0.0f64..1e-2, c in 0.0f64..1e-2,
                                 z in 0.1f64..100.0, db in 0.0f64..50.0) {
            let f = |x, y, w| fwm_peak_power(x, y, w, 1.3, 0.046, z, false, db, FwmMode::Exact).unwrap();
            let base = f(a, b, c);
            for p in [f(b, a, c), f(c, b, a), f(a, c, b), f(b, c, a), f(c, a, b)] {
                prop_assert!((p - base).abs() <= 1e-12 * base.abs().max(1e-300));
            }
            prop_assert!(base >= 0.0);
        }

        #[test]
        fn efficiency_nonnegative(alpha in 1e-3f64..1.0, db in -100.0f64..100.0, z in 1e-3f64..500.0) {
            prop_assert!(fwm_efficiency(alpha, db, z).unwrap() >= 0.0);
        }
    }
}
