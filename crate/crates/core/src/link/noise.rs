use serde::{Deserialize, Serialize};

use super::fwm::{fwm_peak_power, phase_mismatch_from_spacing, FwmMode};
use super::raman::{backward_icsrs_with_coupling, forward_icsrs_with_coupling, same_fiber_srs, SrsDirection};
use super::{icxt_ratio, photon_energy, Band, DetectorSpec, FiberSpec};
use crate::error::{Error, Result};
use crate::planner::ChannelPlan;
use crate::units::{dbm_to_w, w_to_dbm, wavelength_to_hz};

/// In-band noise reaching the quantum receiver and the resulting background click probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseBudget {
    /// Forward Raman (inter-core, plus same-core SRS for carriers sharing the quantum core), W.
    pub p_f_icsrs_w: f64,
    /// Backward Raman, W.
    pub p_b_icsrs_w: f64,
    pub p_fwm_w: f64,
    /// Largest crosstalk ratio h·L from any classical core into the quantum core.
    pub icxt_ratio: f64,
    pub p_total_w: f64,
    pub p_total_dbm: f64,
    /// Background click probability per gate, dark counts included.
    pub p_r_per_gate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseOptions {
    pub fwm_mode: FwmMode,
}

/// Background click probability per gate from a noise power P:
/// p_R = P·T_d/(2ε)·η_R + p_dc.
pub fn adjusted_dark_count(p_icsrs_w: f64, detector: &DetectorSpec, eta_r: f64) -> Result<f64> {
    if p_icsrs_w < 0.0 || !(0.0..=1.0).contains(&eta_r) {
        return Err(Error::Domain(format!(
            "noise power must be >= 0 and eta_r in [0, 1] (got {p_icsrs_w}, {eta_r})"
        )));
    }
    let eps = photon_energy(detector.wavelength_nm)?;
    let p = p_icsrs_w * detector.gate_width_s / (2.0 * eps) * eta_r + detector.p_dc;
    if p > 1.0 {
        return Err(Error::Saturation(p));
    }
    Ok(p)
}

pub fn total_noise(plan: &ChannelPlan, fiber: &FiberSpec, detector: &DetectorSpec) -> Result<NoiseBudget> {
    total_noise_with(plan, fiber, detector, &NoiseOptions::default())
}

pub fn total_noise_with(
    plan: &ChannelPlan,
    fiber: &FiberSpec,
    detector: &DetectorSpec,
    opts: &NoiseOptions,
) -> Result<NoiseBudget> {
    fiber.validate()?;
    detector.validate()?;
    plan.validate(fiber)?;
    let quantum = plan.quantum()?;
    let bw = detector.filter_bw_nm;
    let l = fiber.length_km;

    let (mut fwd, mut bwd, mut fwm, mut icxt) = (0.0, 0.0, 0.0, 0.0f64);
    for c in plan.carriers.iter().filter(|c| c.role.is_classical()) {
        let p0 = dbm_to_w(c.power_dbm);
        if c.core_index == quantum.core_index {
            let srs = |dir| same_fiber_srs(p0, fiber.alpha_c, fiber.alpha_q, fiber.raman_efficiency, bw, l, dir);
            fwd += srs(SrsDirection::Forward)?;
            bwd += srs(SrsDirection::Backward)?;
            let same_band = Band::of(c.wavelength_nm) == Band::of(quantum.wavelength_nm)
                && Band::of(c.wavelength_nm) != Band::Other;
            if same_band && l > 0.0 {
                let mut spacing_ghz =
                    (wavelength_to_hz(c.wavelength_nm) - wavelength_to_hz(quantum.wavelength_nm)).abs() / 1e9;
                if spacing_ghz < 1e-6 {
                    spacing_ghz = plan.channel_spacing_ghz;
                }
                let db = phase_mismatch_from_spacing(fiber.beta2_ps2_per_km, spacing_ghz);
                fwm += fwm_peak_power(p0, p0, p0, fiber.gamma_nl, fiber.alpha_c, l, true, db, opts.fwm_mode)?;
            }
        } else {
            let h = fiber.coupling_between(c.core_index, quantum.core_index);
            if h > 0.0 {
                fwd += forward_icsrs_with_coupling(p0, fiber, h, bw)?;
                bwd += backward_icsrs_with_coupling(p0, fiber, h, bw)?;
                icxt = icxt.max(icxt_ratio(h, l)?);
            }
        }
    }
    let total = fwd + bwd + fwm;
    let p_r = adjusted_dark_count(total, detector, detector.eta_r())?;
    Ok(NoiseBudget {
        p_f_icsrs_w: fwd,
        p_b_icsrs_w: bwd,
        p_fwm_w: fwm,
        icxt_ratio: icxt,
        p_total_w: total,
        p_total_dbm: w_to_dbm(total),
        p_r_per_gate: p_r,
    })
}

/// Receiver bandwidth chosen to make the total noise hit a target, and what it achieved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterCalibration {
    pub filter_bw_nm: f64,
    pub budget: NoiseBudget,
    /// The exact solution fell outside the allowed range and was clamped.
    pub clamped: bool,
}

/// Solves for the receiver filter bandwidth in `[min_nm, max_nm]` at which the total noise equals
/// `target_dbm`. Raman noise scales linearly with the bandwidth and FWM does not depend on it,
/// so two evaluations fix the line exactly.
pub fn calibrate_filter_bandwidth(
    target_dbm: f64,
    plan: &ChannelPlan,
    fiber: &FiberSpec,
    detector: &DetectorSpec,
    min_nm: f64,
    max_nm: f64,
) -> Result<FilterCalibration> {
    if !(min_nm > 0.0 && max_nm >= min_nm) {
        return Err(Error::invalid(
            "filter range",
            format!("need 0 < min <= max, got [{min_nm}, {max_nm}]"),
        ));
    }
    let at = |bw: f64| {
        total_noise(
            plan,
            fiber,
            &DetectorSpec {
                filter_bw_nm: bw,
                ..detector.clone()
            },
        )
    };
    let p1 = at(1.0)?.p_total_w;
    let p2 = at(2.0)?.p_total_w;
    let slope = p2 - p1;
    if !(slope > 0.0) {
        return Err(Error::Domain("noise does not depend on the filter bandwidth".into()));
    }
    let exact = (dbm_to_w(target_dbm) - (p1 - slope)) / slope;
    let bw = exact.clamp(min_nm, max_nm);
    Ok(FilterCalibration {
        filter_bw_nm: bw,
        budget: at(bw)?,
        clamped: bw != exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link::{CarrierRole, OpticalCarrier};
    use crate::planner::MultiplexMode;

    fn plan_with(classical: &[(usize, f64)]) -> ChannelPlan {
        let mut carriers = vec![OpticalCarrier::new(CarrierRole::Quantum, 1, 1550.0, -60.0)];
        carriers.extend(
            classical
                .iter()
                .map(|&(core, p)| OpticalCarrier::new(CarrierRole::ClassicalSignal, core, 1550.0, p)),
        );
        ChannelPlan::new(carriers, MultiplexMode::Sdm)
    }

    #[test]
    fn eq1_hand_arithmetic() {
        let d = DetectorSpec::dark_count_bench();
        assert_eq!(adjusted_dark_count(0.0, &d, 0.0525).unwrap(), 6e-6);
        let p = adjusted_dark_count(5.13e-15, &d, 0.0525).unwrap();
        assert!((p - 7.050_755_419_528_916e-6).abs() < 1e-15, "{p:e}");
        let p2 = adjusted_dark_count(2.0 * 5.13e-15, &d, 0.0525).unwrap();
        assert!(((p2 - 6e-6) - 2.0 * (p - 6e-6)).abs() < 1e-18);
    }

    #[test]
    fn saturation_is_an_error() {
        let d = DetectorSpec::dark_count_bench();
        assert!(matches!(adjusted_dark_count(1e-3, &d, 1.0), Err(Error::Saturation(_))));
    }

    #[test]
    fn empty_plan_is_dark_floor() {
        let fb = FiberSpec::seven_core(3.5);
        let d = DetectorSpec::default();
        let nb = total_noise(&plan_with(&[]), &fb, &d).unwrap();
        assert_eq!(nb.p_total_w, 0.0);
        assert_eq!(nb.p_r_per_gate, d.p_dc);
        assert_eq!(nb.p_total_dbm, f64::NEG_INFINITY);
    }

    #[test]
    fn linear_and_additive_over_carriers() {
        let mut fb = FiberSpec::seven_core(3.5);
        let d = DetectorSpec::default();
        // every core adjacent to the quantum core for this check
        fb.coupling_overrides = [3, 4, 5]
            .iter()
            .map(|&b| crate::link::CouplingOverride {
                a: 1,
                b,
                coupling: 7e-7,
            })
            .collect();
        let single = total_noise(&plan_with(&[(0, 0.0)]), &fb, &d).unwrap();
        let six = total_noise(
            &plan_with(&[(0, 0.0), (2, 0.0), (3, 0.0), (4, 0.0), (5, 0.0), (6, 0.0)]),
            &fb,
            &d,
        )
        .unwrap();
        assert!(((six.p_total_w - 6.0 * single.p_total_w) / six.p_total_w).abs() < 1e-12);
        let doubled = total_noise(&plan_with(&[(0, 3.0102999566398116)]), &fb, &d).unwrap();
        assert!(((doubled.p_total_w - 2.0 * single.p_total_w) / doubled.p_total_w).abs() < 1e-12);
        assert!((single.p_total_w - (single.p_f_icsrs_w + single.p_b_icsrs_w + single.p_fwm_w)).abs() == 0.0);
    }

    #[test]
    fn non_adjacent_core_is_silent_by_default() {
        let fb = FiberSpec::seven_core(3.5);
        let nb = total_noise(&plan_with(&[(4, 10.0)]), &fb, &DetectorSpec::default()).unwrap();
        assert_eq!(nb.p_total_w, 0.0);
        assert_eq!(nb.icxt_ratio, 0.0);
    }

    #[test]
    fn dwdm_same_core_adds_srs_and_in_band_fwm() {
        let fb = FiberSpec::seven_core(3.5);
        let d = DetectorSpec::default();
        let mut plan = plan_with(&[]);
        plan.mode = MultiplexMode::Dwdm;
        plan.channel_spacing_ghz = 100.0;
        plan.carriers
            .push(OpticalCarrier::new(CarrierRole::ClassicalSignal, 1, 1550.8, 0.0));
        let nb = total_noise(&plan, &fb, &d).unwrap();
        assert!(nb.p_fwm_w > 0.0 && nb.p_f_icsrs_w > 0.0 && nb.p_b_icsrs_w > 0.0);
        plan.carriers[1].wavelength_nm = 1310.0;
        let nb = total_noise(&plan, &fb, &d).unwrap();
        assert_eq!(nb.p_fwm_w, 0.0);
    }

    #[test]
    fn dbm_field_consistent() {
        let fb = FiberSpec::seven_core(3.5);
        let nb = total_noise(&plan_with(&[(0, 2.04)]), &fb, &DetectorSpec::default()).unwrap();
        assert!(((dbm_to_w(nb.p_total_dbm) - nb.p_total_w) / nb.p_total_w).abs() < 1e-9);
    }

    #[test]
    fn plan_errors() {
        let fb = FiberSpec::seven_core(3.5);
        let d = DetectorSpec::default();
        let mut plan = plan_with(&[(0, 0.0)]);
        plan.carriers[0].role = CarrierRole::ClassicalSignal;
        assert!(matches!(total_noise(&plan, &fb, &d), Err(Error::Plan(_))));
        let mut plan = plan_with(&[]);
        plan.carriers
            .push(OpticalCarrier::new(CarrierRole::Quantum, 2, 1550.0, -60.0));
        assert!(matches!(total_noise(&plan, &fb, &d), Err(Error::Plan(_))));
    }

    #[test]
    fn filter_calibration_hits_reachable_targets() {
        let fb = FiberSpec::seven_core(3.5);
        let d = DetectorSpec::dark_count_bench();
        let plan = plan_with(&[(0, 2.04)]);
        let per_nm = total_noise(
            &plan,
            &fb,
            &DetectorSpec {
                filter_bw_nm: 1.0,
                ..d.clone()
            },
        )
        .unwrap();
        let target = per_nm.p_total_dbm + 10.0 * 1.5f64.log10();
        let c = calibrate_filter_bandwidth(target, &plan, &fb, &d, 0.1, 2.0).unwrap();
        assert!((c.filter_bw_nm - 1.5).abs() < 1e-9);
        assert!((c.budget.p_total_dbm - target).abs() < 1e-9);
        assert!(!c.clamped);
        let c = calibrate_filter_bandwidth(-100.0, &plan, &fb, &d, 0.1, 2.0).unwrap();
        assert!(c.clamped && c.filter_bw_nm == 2.0);
        assert!(calibrate_filter_bandwidth(-100.0, &plan_with(&[]), &fb, &d, 0.1, 2.0).is_err());
    }
}
