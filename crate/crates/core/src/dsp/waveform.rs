use num_complex::Complex64;

use super::{convolve, rrc_taps, SymbolFrame};
use crate::error::{Error, Result};

/// Four real sample rails (X in-phase/quadrature, Y in-phase/quadrature).
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformQuad {
    pub xi: Vec<f64>,
    pub xq: Vec<f64>,
    pub yi: Vec<f64>,
    pub yq: Vec<f64>,
    pub sample_rate_hz: f64,
    pub samples_per_symbol: f64,
    /// Sample index of the first symbol's centre, in this stream's own sample grid.
    pub symbol_start: f64,
    /// Excess bandwidth of the pulse shape; sets the aliasing limit for resampling.
    pub rolloff: f64,
}

impl WaveformQuad {
    pub fn from_pols(
        x: &[Complex64],
        y: &[Complex64],
        sample_rate_hz: f64,
        samples_per_symbol: f64,
        symbol_start: f64,
        rolloff: f64,
    ) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Length(format!(
                "polarization streams differ: {} vs {}",
                x.len(),
                y.len()
            )));
        }
        Ok(Self {
            xi: x.iter().map(|z| z.re).collect(),
            xq: x.iter().map(|z| z.im).collect(),
            yi: y.iter().map(|z| z.re).collect(),
            yq: y.iter().map(|z| z.im).collect(),
            sample_rate_hz,
            samples_per_symbol,
            symbol_start,
            rolloff,
        })
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    pub fn pol(&self, p: usize) -> Vec<Complex64> {
        let (i, q) = if p == 0 {
            (&self.xi, &self.xq)
        } else {
            (&self.yi, &self.yq)
        };
        i.iter().zip(q).map(|(&a, &b)| Complex64::new(a, b)).collect()
    }

    pub fn rails(&self) -> [&Vec<f64>; 4] {
        [&self.xi, &self.xq, &self.yi, &self.yq]
    }

    /// Same metadata, new samples.
    pub fn with_pols(&self, x: &[Complex64], y: &[Complex64]) -> Result<Self> {
        Self::from_pols(
            x,
            y,
            self.sample_rate_hz,
            self.samples_per_symbol,
            self.symbol_start,
            self.rolloff,
        )
    }

    pub fn check(&self) -> Result<()> {
        let n = self.xi.len();
        if self.xq.len() != n || self.yi.len() != n || self.yq.len() != n {
            return Err(Error::Length("waveform rails differ in length".into()));
        }
        Ok(())
    }

    /// Mean |z|² per polarization.
    pub fn power(&self) -> [f64; 2] {
        let n = self.len().max(1) as f64;
        [
            self.xi.iter().zip(&self.xq).map(|(a, b)| a * a + b * b).sum::<f64>() / n,
            self.yi.iter().zip(&self.yq).map(|(a, b)| a * a + b * b).sum::<f64>() / n,
        ]
    }
}

/// Upsample each polarization by `sps` and shape it with a root-raised-cosine pulse.
pub fn tx_waveform(
    frame: &SymbolFrame,
    rolloff: f64,
    sps: usize,
    span_symbols: usize,
    baud_hz: f64,
) -> Result<WaveformQuad> {
    if sps < 2 {
        return Err(Error::invalid(
            "sps",
            format!("transmitter needs at least 2 samples per symbol, got {sps}"),
        ));
    }
    let h = rrc_taps(rolloff, sps, span_symbols)?;
    let shape = |s: &[Complex64]| {
        let mut up = vec![Complex64::new(0.0, 0.0); s.len() * sps];
        for (k, &v) in s.iter().enumerate() {
            up[k * sps] = v;
        }
        convolve(&up, &h)
    };
    WaveformQuad::from_pols(
        &shape(&frame.symbols[0]),
        &shape(&frame.symbols[1]),
        baud_hz * sps as f64,
        sps as f64,
        ((h.len() - 1) / 2) as f64,
        rolloff,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::generate_frame;

    fn single_symbol_frame() -> SymbolFrame {
        let mut f = generate_frame(16, 1, 64, 0).unwrap();
        f.symbols = [vec![Complex64::new(1.0, 0.0)], vec![Complex64::new(0.0, 0.0)]];
        f
    }

    #[test]
    fn impulse_gives_the_taps() {
        let w = tx_waveform(&single_symbol_frame(), 0.05, 2, 128, 1e9).unwrap();
        let h = rrc_taps(0.05, 2, 128).unwrap();
        assert_eq!(&w.xi[..h.len()], &h[..]);
        assert!(w.xq.iter().chain(&w.yi).chain(&w.yq).all(|&v| v == 0.0));
        assert_eq!(w.symbol_start, 128.0);
        assert_eq!(w.sample_rate_hz, 2e9);
    }

    #[test]
    fn power_scales_with_symbol_power() {
        let f = generate_frame(16, 512, 64, 4).unwrap();
        let mut g = f.clone();
        for s in g.symbols.iter_mut() {
            s.iter_mut().for_each(|z| *z *= 3.0);
        }
        let a = tx_waveform(&f, 0.05, 2, 32, 1e9).unwrap().power();
        let b = tx_waveform(&g, 0.05, 2, 32, 1e9).unwrap().power();
        for p in 0..2 {
            assert!((b[p] / a[p] - 9.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_single_sample_per_symbol() {
        assert!(tx_waveform(&single_symbol_frame(), 0.05, 1, 16, 1e9).is_err());
    }
}
