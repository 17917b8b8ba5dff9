use serde::{Deserialize, Serialize};

use super::{
    ec_leakage, expected_statistics, finite_key_rate, gains, one_decoy_bounds, DecoyBounds, DecoyParams,
    FiniteKeyInputs, SessionTally, SkrResult,
};
use crate::error::{Error, Result};
use crate::link::{total_noise_with, DetectorSpec, FiberSpec, NoiseBudget, NoiseOptions};
use crate::planner::ChannelPlan;

/// Everything the pipeline computed on the way to the key rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkrReport {
    pub distance_km: f64,
    /// Fiber transmittance times receiver insertion loss.
    pub channel_transmittance: f64,
    pub noise: NoiseBudget,
    pub tally: SessionTally,
    pub bounds: DecoyBounds,
    pub result: SkrResult,
}

impl SkrReport {
    pub fn skr_bps(&self) -> f64 {
        self.result.skr_bps
    }

    pub fn qber(&self) -> f64 {
        self.result.qber
    }
}

/// Pulses needed for the expected number of sifted Z detections to reach the block size.
pub fn block_pulses(params: &DecoyParams, eta: f64, p_r: f64) -> Result<u64> {
    let (q_mu, _) = gains(params.mu, eta, p_r, params.e_misalign);
    let (q_nu, _) = gains(params.nu, eta, p_r, params.e_misalign);
    let per_pulse = params.p_z_alice * params.p_z_bob * (params.p_mu * q_mu + params.p_nu() * q_nu);
    if !(per_pulse > 0.0) {
        return Err(Error::Domain(
            "no detections expected: channel and background are both zero".into(),
        ));
    }
    let pulses = (params.block_n_z / per_pulse).ceil();
    if pulses > 1e18 {
        return Err(Error::Domain(format!("block needs {pulses:e} pulses")));
    }
    Ok(pulses as u64)
}

/// Noise → background clicks → expected statistics → decoy bounds → finite-key rate, at `distance_km`.
pub fn skr_pipeline(
    distance_km: f64,
    plan: &ChannelPlan,
    fiber: &FiberSpec,
    detector: &DetectorSpec,
    params: &DecoyParams,
) -> Result<SkrReport> {
    skr_pipeline_with(distance_km, plan, fiber, detector, params, &NoiseOptions::default())
}

pub fn skr_pipeline_with(
    distance_km: f64,
    plan: &ChannelPlan,
    fiber: &FiberSpec,
    detector: &DetectorSpec,
    params: &DecoyParams,
    opts: &NoiseOptions,
) -> Result<SkrReport> {
    if !(distance_km >= 0.0 && distance_km.is_finite()) {
        return Err(Error::invalid(
            "distance_km",
            format!("must be >= 0, got {distance_km}"),
        ));
    }
    params.validate().map_err(|e| e.in_stage("decoy"))?;
    let fb = fiber.with_length(distance_km);
    let noise = total_noise_with(plan, &fb, detector, opts).map_err(|e| e.in_stage("noise"))?;
    let p_r = noise.p_r_per_gate;
    let channel = (-fb.alpha_q * distance_km).exp() * detector.receiver_transmittance();

    let tally = block_pulses(params, channel * detector.efficiency, p_r)
        .and_then(|n| expected_statistics(params, channel, detector.efficiency, p_r, n))
        .map_err(|e| e.in_stage("statistics"))?;
    let bounds = one_decoy_bounds(&tally, params).map_err(|e| e.in_stage("bounds"))?;
    let n_z = tally.n_z() as f64;
    let leak = ec_leakage(n_z, tally.qber_z(), params.f_ec).map_err(|e| e.in_stage("rate"))?;
    let inputs = FiniteKeyInputs {
        s_z0_lower: bounds.s_z0_lower,
        s_z1_lower: bounds.s_z1_lower,
        phi_z_upper: bounds.phi_z_upper,
        leak_ec: leak,
        eps_sec: params.eps_sec,
        eps_cor: params.eps_cor,
        duration_s: tally.duration_s,
        n_z,
        m_z: tally.m_z() as f64,
    };
    let result = finite_key_rate(&inputs).map_err(|e| e.in_stage("rate"))?;
    Ok(SkrReport {
        distance_km,
        channel_transmittance: channel,
        noise,
        tally,
        bounds,
        result,
    })
}

/// Find the root of a monotone function on [lo, hi] by bisection.
fn bisect(mut lo: f64, mut hi: f64, mut f: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Convergence(format!(
            "target not bracketed on [{lo}, {hi}] (residuals {f_lo:e}, {f_hi:e})"
        )));
    }
    let rising = f_hi > f_lo;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let v = f(mid)?;
        if (v > 0.0) == rising {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Misalignment error that makes the model Z-basis QBER hit `target_qber`.
pub fn calibrate_misalignment(
    target_qber: f64,
    distance_km: f64,
    plan: &ChannelPlan,
    fiber: &FiberSpec,
    detector: &DetectorSpec,
    params: &DecoyParams,
) -> Result<f64> {
    bisect(0.0, 0.45, |e| {
        let p = DecoyParams {
            e_misalign: e,
            ..*params
        };
        Ok(skr_pipeline(distance_km, plan, fiber, detector, &p)?.qber() - target_qber)
    })
    .map_err(|e| e.in_stage("calibrate_misalignment"))
}

/// Receiver insertion loss in [0, `max_db`] that makes the key rate hit `target_skr_bps`.
pub fn calibrate_insertion_loss(
    target_skr_bps: f64,
    max_db: f64,
    distance_km: f64,
    plan: &ChannelPlan,
    fiber: &FiberSpec,
    detector: &DetectorSpec,
    params: &DecoyParams,
) -> Result<f64> {
    bisect(0.0, max_db, |il| {
        let d = DetectorSpec {
            insertion_loss_db: il,
            ..detector.clone()
        };
        Ok(skr_pipeline(distance_km, plan, fiber, &d, params)?.skr_bps() - target_skr_bps)
    })
    .map_err(|e| e.in_stage("calibrate_insertion_loss"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub e_misalign: f64,
    pub insertion_loss_db: f64,
    pub report: SkrReport,
}

/// Jointly fit misalignment to a QBER and insertion loss to a key rate.
///
/// The two knobs interact only weakly, so alternating one-dimensional fits settles in a few rounds.
#[allow(clippy::too_many_arguments)]
pub fn calibrate_operating_point(
    target_skr_bps: f64,
    target_qber: f64,
    max_insertion_loss_db: f64,
    distance_km: f64,
    plan: &ChannelPlan,
    fiber: &FiberSpec,
    detector: &DetectorSpec,
    params: &DecoyParams,
) -> Result<OperatingPoint> {
    let mut p = *params;
    let mut d = detector.clone();
    for _ in 0..6 {
        p.e_misalign = calibrate_misalignment(target_qber, distance_km, plan, fiber, &d, &p)?;
        d.insertion_loss_db =
            calibrate_insertion_loss(target_skr_bps, max_insertion_loss_db, distance_km, plan, fiber, &d, &p)?;
    }
    let report = skr_pipeline(distance_km, plan, fiber, &d, &p)?;
    Ok(OperatingPoint {
        e_misalign: p.e_misalign,
        insertion_loss_db: d.insertion_loss_db,
        report,
    })
}
