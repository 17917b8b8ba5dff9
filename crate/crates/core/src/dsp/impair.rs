use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Interpolator, WaveformQuad};
use crate::error::{Error, Result};
use crate::seed::derive_seed;

/// Channel and transceiver impairments applied to a transmitted waveform.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ImpairmentSpec {
    /// Es/N0 in dB; `None` adds no noise.
    pub snr_db: Option<f64>,
    /// Combined laser linewidth, Hz.
    pub linewidth_hz: f64,
    pub freq_offset_hz: f64,
    /// Receiver sampling clock error, ppm (positive: receiver samples slower).
    pub clock_offset_ppm: f64,
    pub pol_rotation_rad: f64,
    /// Delay of each quadrature rail relative to its in-phase rail, samples.
    pub iq_skew_samples: f64,
}

impl ImpairmentSpec {
    pub fn validate(&self, wave: &WaveformQuad) -> Result<()> {
        if let Some(s) = self.snr_db {
            if !s.is_finite() {
                return Err(Error::invalid("snr_db", "must be finite"));
            }
        }
        if !(self.linewidth_hz >= 0.0) {
            return Err(Error::invalid("linewidth_hz", "must be >= 0"));
        }
        if !(self.freq_offset_hz.abs() < wave.sample_rate_hz / 2.0) {
            return Err(Error::invalid("freq_offset_hz", "must stay below half the sample rate"));
        }
        if !self.pol_rotation_rad.is_finite() || !self.iq_skew_samples.is_finite() {
            return Err(Error::invalid("impairments", "rotation and skew must be finite"));
        }
        let stretch = 1.0 + self.clock_offset_ppm * 1e-6;
        if !(stretch > 0.0) || wave.samples_per_symbol / stretch < 1.0 + wave.rolloff {
            return Err(Error::Domain(format!(
                "clock offset of {} ppm aliases a {}-sample-per-symbol signal",
                self.clock_offset_ppm, wave.samples_per_symbol
            )));
        }
        Ok(())
    }
}

/// Rotation, phase noise, frequency offset, clock offset, IQ skew and AWGN, in that order.
pub fn apply_impairments(wave: &WaveformQuad, spec: &ImpairmentSpec, seed: u64) -> Result<WaveformQuad> {
    wave.check()?;
    spec.validate(wave)?;
    let mut x = wave.pol(0);
    let mut y = wave.pol(1);

    if spec.pol_rotation_rad != 0.0 {
        let (s, c) = spec.pol_rotation_rad.sin_cos();
        for (a, b) in x.iter_mut().zip(y.iter_mut()) {
            let (xa, yb) = (*a, *b);
            *a = xa * c - yb * s;
            *b = xa * s + yb * c;
        }
    }

    let ts = 1.0 / wave.sample_rate_hz;
    if spec.linewidth_hz > 0.0 {
        let sd = (2.0 * std::f64::consts::PI * spec.linewidth_hz * ts).sqrt();
        let normal = Normal::new(0.0, sd).map_err(|e| Error::Domain(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "impair.phase_noise"));
        let mut phase = 0.0;
        for (a, b) in x.iter_mut().zip(y.iter_mut()) {
            phase += normal.sample(&mut rng);
            let r = Complex64::from_polar(1.0, phase);
            *a *= r;
            *b *= r;
        }
    }

    if spec.freq_offset_hz != 0.0 {
        let w = 2.0 * std::f64::consts::PI * spec.freq_offset_hz * ts;
        for (n, (a, b)) in x.iter_mut().zip(y.iter_mut()).enumerate() {
            let r = Complex64::from_polar(1.0, w * n as f64);
            *a *= r;
            *b *= r;
        }
    }

    let mut symbol_start = wave.symbol_start;
    let interp = Interpolator::default();
    if spec.clock_offset_ppm != 0.0 {
        let stretch = 1.0 + spec.clock_offset_ppm * 1e-6;
        let n_out = ((x.len().saturating_sub(1)) as f64 / stretch).floor() as usize + 1;
        x = interp.resample(&x, 0.0, stretch, n_out);
        y = interp.resample(&y, 0.0, stretch, n_out);
        symbol_start /= stretch;
    }

    if spec.iq_skew_samples != 0.0 {
        let skew = |s: &mut Vec<Complex64>| {
            let q: Vec<Complex64> = s.iter().map(|z| Complex64::new(z.im, 0.0)).collect();
            for (n, z) in s.iter_mut().enumerate() {
                z.im = interp.at(&q, n as f64 - spec.iq_skew_samples).re;
            }
        };
        skew(&mut x);
        skew(&mut y);
    }

    if let Some(snr_db) = spec.snr_db {
        let snr = 10f64.powf(snr_db / 10.0);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "impair.awgn"));
        for s in [&mut x, &mut y] {
            let p = s.iter().map(|z| z.norm_sqr()).sum::<f64>() / s.len().max(1) as f64;
            let var = wave.samples_per_symbol * p / snr;
            if var == 0.0 {
                continue;
            }
            let normal = Normal::new(0.0, (var / 2.0).sqrt()).map_err(|e| Error::Domain(e.to_string()))?;
            for z in s.iter_mut() {
                *z += Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
            }
        }
    }

    let mut out = wave.with_pols(&x, &y)?;
    out.symbol_start = symbol_start;
    Ok(out)
}
