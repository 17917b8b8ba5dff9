use serde::{Deserialize, Serialize};

use super::{optimize_allocation, ChannelPlan, MultiplexMode};
use crate::error::{Error, Result};
use crate::link::{CarrierRole, DetectorSpec, FiberSpec, OpticalCarrier};
use crate::qkd::{skr_pipeline, DecoyParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub distance_km: f64,
    pub skr_bps: f64,
    pub qber: f64,
    pub p_r_per_gate: f64,
    /// Background noise saturated the detector; the point carries no key.
    pub saturated: bool,
}

/// Key rate of a fixed plan at each distance, with the fiber length scaled to match.
pub fn skr_vs_distance(
    plan: &ChannelPlan,
    fiber_template: &FiberSpec,
    detector: &DetectorSpec,
    decoy: &DecoyParams,
    distances_km: &[f64],
) -> Result<Vec<CurvePoint>> {
    if distances_km.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::invalid("distances_km", "must be sorted ascending"));
    }
    distances_km
        .iter()
        .map(|&d| match skr_pipeline(d, plan, fiber_template, detector, decoy) {
            Ok(r) => Ok(CurvePoint {
                distance_km: d,
                skr_bps: r.skr_bps(),
                qber: r.qber(),
                p_r_per_gate: r.noise.p_r_per_gate,
                saturated: false,
            }),
            Err(e) if matches!(e.root(), Error::Saturation(_)) => Ok(CurvePoint {
                distance_km: d,
                skr_bps: 0.0,
                qber: 0.5,
                p_r_per_gate: 1.0,
                saturated: true,
            }),
            Err(e) => Err(e),
        })
        .collect()
}

/// Settings for the SDM versus DWDM comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ComparisonOptions {
    /// Receiver acceptance bandwidth when no optical filter is fitted, nm.
    pub unfiltered_bw_nm: f64,
    pub dwdm_classical_nm: f64,
    /// Attenuation seen by the O-band classical carrier, 1/km.
    pub dwdm_alpha_c: f64,
}

impl Default for ComparisonOptions {
    fn default() -> Self {
        Self {
            unfiltered_bw_nm: 20.0,
            dwdm_classical_nm: 1310.0,
            dwdm_alpha_c: 0.093,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdmDwdmCurves {
    /// Best seven-core placement for one classical carrier.
    pub sdm: Vec<CurvePoint>,
    /// Classical carrier forced onto a core adjacent to the quantum core.
    pub sdm_adjacent: Vec<CurvePoint>,
    /// Classical and quantum carriers sharing a single-mode fiber.
    pub dwdm: Vec<CurvePoint>,
    pub sdm_plan: ChannelPlan,
    pub sdm_adjacent_plan: ChannelPlan,
    pub dwdm_plan: ChannelPlan,
}

/// Key rate versus distance for one classical carrier at `launch_dbm`, carried either in
/// another core of `fiber` or on the same single-mode fiber at 1310 nm.
pub fn compare_sdm_dwdm(
    fiber: &FiberSpec,
    detector: &DetectorSpec,
    decoy: &DecoyParams,
    launch_dbm: f64,
    distances_km: &[f64],
    opts: &ComparisonOptions,
) -> Result<SdmDwdmCurves> {
    let det = DetectorSpec {
        filter_bw_nm: opts.unfiltered_bw_nm,
        ..detector.clone()
    };
    let sdm_plan = optimize_allocation(fiber, &det, decoy, &[launch_dbm])
        .map_err(|e| e.in_stage("allocation"))?
        .plan;

    let q = sdm_plan.quantum()?.core_index;
    let near = fiber
        .adjacency
        .neighbors(q)
        .next()
        .ok_or_else(|| Error::Plan(format!("quantum core {q} has no neighbours")))?;
    let mut sdm_adjacent_plan = ChannelPlan::quantum_only(q);
    sdm_adjacent_plan.carriers.push(OpticalCarrier::new(
        CarrierRole::ClassicalSignal,
        near,
        1550.0,
        launch_dbm,
    ));

    let mut ssmf = FiberSpec::ssmf(fiber.length_km);
    ssmf.alpha_q = fiber.alpha_q;
    ssmf.alpha_c = opts.dwdm_alpha_c;
    ssmf.raman_efficiency = fiber.raman_efficiency;
    let dwdm_plan = ChannelPlan::new(
        vec![
            OpticalCarrier::new(CarrierRole::Quantum, 0, 1550.0, -60.0),
            OpticalCarrier::new(CarrierRole::ClassicalSignal, 0, opts.dwdm_classical_nm, launch_dbm),
        ],
        MultiplexMode::Dwdm,
    );

    Ok(SdmDwdmCurves {
        sdm: skr_vs_distance(&sdm_plan, fiber, &det, decoy, distances_km).map_err(|e| e.in_stage("sdm"))?,
        sdm_adjacent: skr_vs_distance(&sdm_adjacent_plan, fiber, &det, decoy, distances_km)
            .map_err(|e| e.in_stage("sdm_adjacent"))?,
        dwdm: skr_vs_distance(&dwdm_plan, &ssmf, &det, decoy, distances_km).map_err(|e| e.in_stage("dwdm"))?,
        sdm_plan,
        sdm_adjacent_plan,
        dwdm_plan,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qkd::CALIBRATED_INSERTION_LOSS_DB;

    fn env() -> (FiberSpec, DetectorSpec, DecoyParams) {
        let det = DetectorSpec {
            insertion_loss_db: CALIBRATED_INSERTION_LOSS_DB,
            ..DetectorSpec::ingaas_gated()
        };
        (FiberSpec::seven_core(3.5), det, DecoyParams::default())
    }

    fn monotone(c: &[CurvePoint]) -> bool {
        c.windows(2).all(|w| w[1].skr_bps <= w[0].skr_bps)
    }

    #[test]
    fn distance_curve_shape() {
        let (fb, det, decoy) = env();
        let c = skr_vs_distance(
            &ChannelPlan::quantum_only(1),
            &fb,
            &det,
            &decoy,
            &[3.5, 50.0, 100.0, 150.0],
        )
        .unwrap();
        assert!(c.iter().all(|p| p.skr_bps > 0.0));
        assert!(monotone(&c));
        assert!(skr_vs_distance(&ChannelPlan::quantum_only(1), &fb, &det, &decoy, &[50.0, 3.5]).is_err());
    }

    #[test]
    fn zero_distance_is_the_lossless_point() {
        let (fb, det, decoy) = env();
        let c = skr_vs_distance(&ChannelPlan::quantum_only(1), &fb, &det, &decoy, &[0.0]).unwrap();
        let r = skr_pipeline(0.0, &ChannelPlan::quantum_only(1), &fb.with_length(0.0), &det, &decoy).unwrap();
        assert_eq!(c[0].skr_bps, r.skr_bps());
        assert!(
            c[0].skr_bps
                >= skr_vs_distance(&ChannelPlan::quantum_only(1), &fb, &det, &decoy, &[1.0]).unwrap()[0].skr_bps
        );
    }

    #[test]
    fn sdm_dominates_dwdm_at_ten_dbm() {
        let (fb, det, decoy) = env();
        let d = [3.5, 25.0, 50.0, 100.0, 150.0];
        let c = compare_sdm_dwdm(&fb, &det, &decoy, 10.0, &d, &ComparisonOptions::default()).unwrap();
        for (s, w) in c.sdm.iter().zip(&c.dwdm) {
            assert!(s.skr_bps >= w.skr_bps);
            assert!(s.skr_bps > 0.0);
        }
        assert!(monotone(&c.sdm) && monotone(&c.dwdm) && monotone(&c.sdm_adjacent));
        assert!(c.sdm_adjacent[0].skr_bps < c.sdm[0].skr_bps);
    }

    #[test]
    fn vanishing_launch_converges_to_dark_count_curve() {
        let (fb, det, decoy) = env();
        let d = [3.5, 50.0, 100.0, 150.0];
        let c = compare_sdm_dwdm(&fb, &det, &decoy, -200.0, &d, &ComparisonOptions::default()).unwrap();
        let quiet_det = DetectorSpec {
            filter_bw_nm: 20.0,
            ..det.clone()
        };
        let floor = skr_vs_distance(&ChannelPlan::quantum_only(1), &fb, &quiet_det, &decoy, &d).unwrap();
        for ((a, b), f) in c.sdm.iter().zip(&c.dwdm).zip(&floor) {
            assert!((a.skr_bps - f.skr_bps).abs() <= 1e-9 * f.skr_bps);
            assert!(
                (b.skr_bps - f.skr_bps).abs() <= 1e-6 * f.skr_bps,
                "{} vs {}",
                b.skr_bps,
                f.skr_bps
            );
        }
    }

    #[test]
    fn dwdm_rate_falls_with_launch_power() {
        let (fb, det, decoy) = env();
        let mut prev = f64::INFINITY;
        for launch in [-80.0, -70.0, -60.0, -50.0, -40.0, -30.0, 0.0, 10.0] {
            let c = compare_sdm_dwdm(&fb, &det, &decoy, launch, &[25.0], &ComparisonOptions::default()).unwrap();
            assert!(c.dwdm[0].skr_bps <= prev, "{launch} dBm");
            prev = c.dwdm[0].skr_bps;
        }
        assert_eq!(prev, 0.0);
    }
}
