use num_complex::Complex64;

use super::{convolve, rrc_taps, Interpolator, WaveformQuad};
use crate::error::{Error, Result};

/// Root-raised-cosine matched filter, then resampling to `sps_out` samples per symbol.
///
/// The output starts at the centre of the input's first symbol, so sample `m·sps_out` is symbol m.
pub fn matched_filter_downsample(
    wave: &WaveformQuad,
    rolloff: f64,
    sps_in: usize,
    sps_out: usize,
    span_symbols: usize,
) -> Result<WaveformQuad> {
    wave.check()?;
    if sps_out < 1 || sps_in < 1 {
        return Err(Error::invalid("sps_out", "samples per symbol must be >= 1"));
    }
    if (wave.samples_per_symbol - sps_in as f64).abs() > 1e-12 {
        return Err(Error::invalid(
            "sps_in",
            format!(
                "waveform carries {} samples per symbol, not {sps_in}",
                wave.samples_per_symbol
            ),
        ));
    }
    let h = rrc_taps(rolloff, sps_in, span_symbols)?;
    let delay = ((h.len() - 1) / 2) as f64;
    let start = wave.symbol_start + delay;
    let step = sps_in as f64 / sps_out as f64;
    let filter = |x: Vec<Complex64>| -> Vec<Complex64> {
        let y = convolve(&x, &h);
        let last = y.len() as f64 - 1.0 - delay;
        if last < start {
            return Vec::new();
        }
        let n_out = ((last - start) / step).floor() as usize + 1;
        Interpolator::default().resample(&y, start, step, n_out)
    };
    let x = filter(wave.pol(0));
    let y = filter(wave.pol(1));
    let mut out = WaveformQuad::from_pols(
        &x,
        &y,
        wave.sample_rate_hz * sps_out as f64 / sps_in as f64,
        sps_out as f64,
        0.0,
        rolloff,
    )?;
    out.check()?;
    out.symbol_start = 0.0;
    Ok(out)
}
