use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{convolve, rrc_taps, Interpolator, WaveformQuad};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimingConfig {
    /// Proportional gain on the normalized Gardner error, samples per unit error.
    pub kp: f64,
    /// Integral gain.
    pub ki: f64,
    /// Symbols left out of the timing fit while the loop pulls in.
    pub warmup_symbols: usize,
    /// Matched filter span used for the detector copy.
    pub mf_span: usize,
    /// Below this total drift and phase error, in samples, the input passes through untouched.
    pub gate_samples: f64,
    /// Largest tolerated scatter of the strobe times about the fitted clock, in samples.
    pub max_residual_std: f64,
}

impl Default for TimingConfig {
    fn default() -> Self {
        Self {
            kp: 0.02,
            ki: 2e-5,
            warmup_symbols: 1024,
            mf_span: 64,
            gate_samples: 0.01,
            max_residual_std: 0.4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    /// Sampling clock error implied by the fitted symbol period.
    pub estimated_ppm: f64,
    /// Fitted symbol period, input samples.
    pub period_samples: f64,
    /// Fitted timing error of the first symbol, input samples.
    pub phase_samples: f64,
    /// RMS scatter of the loop's strobe times about the fitted clock, samples.
    pub residual_std_samples: f64,
    pub symbols_tracked: usize,
    /// The estimate was within the gate, so the waveform was not resampled.
    pub bypassed: bool,
}

/// Gardner detector on a matched-filtered copy, driven by a proportional-integral loop.
///
/// The loop's strobe times are fitted to a straight line and the original waveform is
/// resampled once on the fitted clock, so the returned stream has exactly the nominal
/// samples per symbol.
pub fn clock_recovery(wave: &WaveformQuad, cfg: &TimingConfig) -> Result<(WaveformQuad, TimingReport)> {
    wave.check()?;
    let sps = wave.samples_per_symbol;
    if sps < 2.0 || sps.fract() != 0.0 {
        return Err(Error::invalid(
            "samples_per_symbol",
            format!("clock recovery needs an integer >= 2, got {sps}"),
        ));
    }
    if !(cfg.kp > 0.0 && cfg.ki >= 0.0) {
        return Err(Error::invalid("timing gains", "kp must be > 0 and ki >= 0"));
    }
    let h = rrc_taps(wave.rolloff, sps as usize, cfg.mf_span)?;
    let delay = ((h.len() - 1) / 2) as f64;
    let mx = convolve(&wave.pol(0), &h);
    let my = convolve(&wave.pol(1), &h);
    let power = mx.iter().chain(&my).map(|z| z.norm_sqr()).sum::<f64>() / mx.len().max(1) as f64;
    if !(power > 0.0) {
        return Err(Error::Domain("no signal power for timing recovery".into()));
    }
    let interp = Interpolator::default();
    let sample = |pos: f64| [interp.at(&mx, pos), interp.at(&my, pos)];
    let ted = |t: f64, period: f64| {
        let (cur, prev, mid) = (sample(t), sample(t - period), sample(t - period / 2.0));
        (0..2).map(|p| (mid[p].conj() * (cur[p] - prev[p])).re).sum::<f64>() / power
    };

    let end = (wave.len() as f64) + delay - sps;
    let mut t = wave.symbol_start + delay + sps;
    let mut v = 0.0;
    let mut strobes = Vec::new();
    while t < end {
        // Neighbours are taken one nominal period back rather than at the previous strobe;
        // reusing the previous strobe couples the loop's own correction into the error.
        let e = ted(t, sps + v);
        strobes.push(t);
        // Positive error: strobes are late.
        v -= cfg.ki * e;
        t += sps + v - cfg.kp * e;
    }

    let fit: Vec<(f64, f64)> = strobes
        .iter()
        .enumerate()
        .skip(cfg.warmup_symbols)
        .map(|(k, &t)| (k as f64, t))
        .collect();
    if fit.len() < 64 {
        return Err(Error::Length(format!(
            "{} symbols are too few to fit the clock",
            strobes.len()
        )));
    }
    let n = fit.len() as f64;
    let (mk, mt) = fit.iter().fold((0.0, 0.0), |a, &(k, t)| (a.0 + k / n, a.1 + t / n));
    let skk: f64 = fit.iter().map(|&(k, _)| (k - mk).powi(2)).sum();
    let skt: f64 = fit.iter().map(|&(k, t)| (k - mk) * (t - mt)).sum();
    let mut b = skt / skk;
    let mut c0 = mt - b * mk;
    let resid = (fit.iter().map(|&(k, t)| (t - c0 - b * k).powi(2)).sum::<f64>() / n).sqrt();
    if !resid.is_finite() || !b.is_finite() || resid > cfg.max_residual_std || (b / sps - 1.0).abs() > 0.01 {
        return Err(Error::Convergence(format!(
            "timing loop did not lock: strobe scatter {resid:.3} samples, period {b:.6}"
        )));
    }

    // The closed loop leaves a pattern-dependent bias proportional to its gain. Averaging
    // the detector open-loop along the fitted clock, segment by segment, removes it.
    let n_sym = strobes.len();
    let mean_error = |c0: f64, b: f64, ks: std::ops::Range<usize>| {
        let len = ks.len() as f64;
        ks.map(|k| ted(c0 + b * k as f64, b)).sum::<f64>() / len
    };
    let probe = 0.05;
    let slope = (mean_error(c0 + probe, b, 0..n_sym) - mean_error(c0 - probe, b, 0..n_sym)) / (2.0 * probe);
    if !(slope > 0.0) {
        return Err(Error::Convergence("timing detector has no usable error slope".into()));
    }
    let segments = 8;
    let seg = n_sym / segments;
    for _ in 0..2 {
        let pts: Vec<(f64, f64)> = (0..segments)
            .map(|j| {
                let ks = j * seg..(j + 1) * seg;
                let centre = (ks.start + ks.end) as f64 / 2.0;
                (centre, -mean_error(c0, b, ks) / slope)
            })
            .collect();
        let m = pts.len() as f64;
        let (mx_, my_) = pts.iter().fold((0.0, 0.0), |a, &(x, y)| (a.0 + x / m, a.1 + y / m));
        let sxx: f64 = pts.iter().map(|&(x, _)| (x - mx_).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|&(x, y)| (x - mx_) * (y - my_)).sum();
        let db = sxy / sxx;
        c0 += my_ - db * mx_;
        b += db;
    }

    // Strobe k sits on symbol k + 1.
    let first = c0 - b - delay;
    let report = TimingReport {
        estimated_ppm: (sps / b - 1.0) * 1e6,
        period_samples: b,
        phase_samples: first - wave.symbol_start,
        residual_std_samples: resid,
        symbols_tracked: strobes.len(),
        bypassed: false,
    };
    let drift = (b - sps).abs() * strobes.len() as f64;
    if drift < cfg.gate_samples && report.phase_samples.abs() < cfg.gate_samples {
        return Ok((
            wave.clone(),
            TimingReport {
                bypassed: true,
                ..report
            },
        ));
    }

    // Output grid: one sample every b/sps, aligned so that symbol centres land on it.
    let step = b / sps;
    let j = (first / b).floor().max(0.0);
    let phi = first - j * b;
    let n_out = ((wave.len() as f64 - 1.0 - phi) / step).floor() as usize + 1;
    let re = |x: Vec<Complex64>| interp.resample(&x, phi, step, n_out);
    let mut out = wave.with_pols(&re(wave.pol(0)), &re(wave.pol(1)))?;
    out.symbol_start = j * sps;
    Ok((out, report))
}
