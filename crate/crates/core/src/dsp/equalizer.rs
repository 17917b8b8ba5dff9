use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Qam, WaveformQuad};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CmmaConfig {
    /// Taps per real filter; odd.
    pub taps: usize,
    /// Step size of the blind multi-modulus stage.
    pub step_size: f64,
    /// Symbols adapted blindly before the decision-directed pass.
    pub n_train: usize,
    /// Passes over the training symbols. The first half of all training steps uses the
    /// single constant-modulus radius, the rest the nearest ring.
    pub train_passes: usize,
    pub dd_step_size: f64,
    /// First-order phase tracker gain used only to form decisions.
    pub pll_gain: f64,
    /// Decision-directed mean squared error above which the equalizer is reported unconverged.
    pub max_mse: f64,
}

impl Default for CmmaConfig {
    fn default() -> Self {
        Self {
            taps: 21,
            step_size: 1e-3,
            n_train: 4000,
            train_passes: 3,
            dd_step_size: 1e-3,
            pll_gain: 0.1,
            max_mse: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EqualizerOutput {
    pub symbols: [Vec<Complex64>; 2],
    /// Squared L2 norm of each real filter, indexed [output rail][input rail].
    pub tap_energy: [[f64; 4]; 4],
    /// Mean modulus error over the last quarter of training.
    pub train_error: f64,
    /// Mean squared decision error over the second half of the decision-directed pass.
    pub dd_mse: f64,
}

struct Mimo {
    taps: usize,
    // w[out][in][tap]
    w: Vec<f64>,
}

impl Mimo {
    fn identity(taps: usize) -> Self {
        let mut w = vec![0.0; 16 * taps];
        for r in 0..4 {
            w[(r * 4 + r) * taps + taps / 2] = 1.0;
        }
        Self { taps, w }
    }

    fn window(&self, rails: &[Vec<f64>; 4], k: usize, buf: &mut [f64]) {
        let c = self.taps / 2;
        let n = rails[0].len();
        for (s, rail) in rails.iter().enumerate() {
            for j in 0..self.taps {
                let idx = (k + j).checked_sub(c).filter(|&i| i < n);
                buf[s * self.taps + j] = idx.map_or(0.0, |i| rail[i]);
            }
        }
    }

    fn output(&self, u: &[f64], rail: usize) -> f64 {
        let row = &self.w[rail * 4 * self.taps..(rail + 1) * 4 * self.taps];
        row.iter().zip(u).map(|(a, b)| a * b).sum()
    }

    fn pol(&self, u: &[f64], p: usize) -> Complex64 {
        Complex64::new(self.output(u, 2 * p), self.output(u, 2 * p + 1))
    }

    /// Gradient step driving output pol `p` along `-e`.
    fn update(&mut self, u: &[f64], p: usize, e: Complex64, mu: f64) {
        let len = 4 * self.taps;
        for (rail, g) in [(2 * p, e.re), (2 * p + 1, e.im)] {
            let row = &mut self.w[rail * len..(rail + 1) * len];
            row.iter_mut().zip(u).for_each(|(w, x)| *w -= mu * g * x);
        }
    }

    fn finite(&self) -> bool {
        self.w.iter().all(|v| v.is_finite())
    }
}

/// Real-valued 4x4 MIMO equalizer over (XI, XQ, YI, YQ) at one sample per symbol.
///
/// Blind passes over the first `n_train` symbols adapt first with the constant-modulus
/// error, then with the multi-modulus error against the constellation rings. The taps then restart from the first symbol in
/// decision-directed mode, which produces the output.
pub fn cmma_equalize(wave: &WaveformQuad, qam: &Qam, cfg: &CmmaConfig) -> Result<EqualizerOutput> {
    wave.check()?;
    if cfg.taps % 2 == 0 || cfg.taps == 0 {
        return Err(Error::invalid("taps", format!("must be odd, got {}", cfg.taps)));
    }
    if !(cfg.step_size > 0.0 && cfg.dd_step_size > 0.0) {
        return Err(Error::invalid("step_size", "must be > 0"));
    }
    if (wave.samples_per_symbol - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(
            "samples_per_symbol",
            "equalizer runs at one sample per symbol",
        ));
    }
    let n = wave.len();
    if n < cfg.taps {
        return Err(Error::Length(format!("{n} symbols are fewer than {} taps", cfg.taps)));
    }
    let pw = wave.power();
    if !(pw[0] > 0.0 && pw[1] > 0.0) {
        return Err(Error::Domain("a polarization carries no power".into()));
    }
    let gx = pw[0].sqrt().recip();
    let gy = pw[1].sqrt().recip();
    let rails = [
        wave.xi.iter().map(|v| v * gx).collect::<Vec<_>>(),
        wave.xq.iter().map(|v| v * gx).collect(),
        wave.yi.iter().map(|v| v * gy).collect(),
        wave.yq.iter().map(|v| v * gy).collect(),
    ];
    let radii = qam.ring_radii();
    let nearest_ring = |r: f64| {
        radii
            .iter()
            .copied()
            .min_by(|a, b| (a - r).abs().total_cmp(&(b - r).abs()))
            .expect("constellation has rings")
    };

    // Constant-modulus radius for the pre-convergence half of training.
    let pts = qam.points();
    let cma_r2 = pts.iter().map(|p| p.norm_sqr().powi(2)).sum::<f64>() / pts.iter().map(|p| p.norm_sqr()).sum::<f64>();

    let mut eq = Mimo::identity(cfg.taps);
    let mut u = vec![0.0; 4 * cfg.taps];
    let n_train = cfg.n_train.min(n);
    let steps = n_train * cfg.train_passes.max(1);
    let mut tail = (0.0, 0usize);
    for step in 0..steps {
        let k = step % n_train;
        eq.window(&rails, k, &mut u);
        for p in 0..2 {
            let y = eq.pol(&u, p);
            let r2 = y.norm_sqr();
            let target = if step < steps / 2 {
                cma_r2
            } else {
                nearest_ring(r2.sqrt()).powi(2)
            };
            let err = (r2 - target) * y;
            eq.update(&u, p, err, cfg.step_size);
            if step >= steps - n_train / 4 {
                tail.0 += (r2 - target).abs();
                tail.1 += 1;
            }
        }
        if !eq.finite() {
            return Err(Error::Convergence(format!("blind equalizer diverged at symbol {k}")));
        }
    }
    let train_error = if tail.1 > 0 { tail.0 / tail.1 as f64 } else { 0.0 };

    let mut theta = [0.0f64; 2];
    let mut out: [Vec<Complex64>; 2] = [Vec::with_capacity(n), Vec::with_capacity(n)];
    let mut mse = (0.0, 0usize);
    for k in 0..n {
        eq.window(&rails, k, &mut u);
        for p in 0..2 {
            let y = eq.pol(&u, p);
            let rot = Complex64::from_polar(1.0, theta[p]);
            let z = y * rot.conj();
            let d = qam.point(qam.decide(z));
            theta[p] += cfg.pll_gain * (z * d.conj()).im / d.norm_sqr();
            let err = y - d * rot;
            eq.update(&u, p, err, cfg.dd_step_size);
            if k >= n / 2 {
                mse.0 += err.norm_sqr();
                mse.1 += 1;
            }
            out[p].push(y);
        }
    }
    let dd_mse = mse.0 / mse.1.max(1) as f64;
    if !eq.finite() || !dd_mse.is_finite() || dd_mse > cfg.max_mse {
        return Err(Error::Convergence(format!(
            "equalizer did not converge: decision-directed MSE {dd_mse:.3e}"
        )));
    }

    let mut tap_energy = [[0.0; 4]; 4];
    for (r, row) in tap_energy.iter_mut().enumerate() {
        for (s, e) in row.iter_mut().enumerate() {
            let f = &eq.w[(r * 4 + s) * cfg.taps..(r * 4 + s + 1) * cfg.taps];
            *e = f.iter().map(|v| v * v).sum();
        }
    }
    Ok(EqualizerOutput {
        symbols: out,
        tap_energy,
        train_error,
        dd_mse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{generate_frame, resolve_ambiguity, SymbolFrame};

    fn symbol_wave(f: &SymbolFrame, mix: impl Fn(Complex64, Complex64) -> (Complex64, Complex64)) -> WaveformQuad {
        let (x, y): (Vec<_>, Vec<_>) = f.symbols[0].iter().zip(&f.symbols[1]).map(|(&a, &b)| mix(a, b)).unzip();
        WaveformQuad::from_pols(&x, &y, 1e9, 1.0, 0.0, 0.05).unwrap()
    }

    #[test]
    fn identity_channel_keeps_identity_taps() {
        let f = generate_frame(16, 8192, 64, 2).unwrap();
        let out = cmma_equalize(&symbol_wave(&f, |a, b| (a, b)), &f.qam(), &CmmaConfig::default()).unwrap();
        let t = out.tap_energy;
        for r in 0..4 {
            let off: f64 = (0..4).filter(|&s| s != r).map(|s| t[r][s]).sum();
            assert!(off < 0.01 * t[r][r], "{t:?}");
        }
        assert!(out.dd_mse < 1e-4, "{}", out.dd_mse);
        for p in 0..2 {
            for k in 100..8000 {
                assert_eq!(f.qam().decide(out.symbols[p][k]), f.labels[p][k]);
            }
        }
    }

    #[test]
    fn undoes_polarization_rotation() {
        let f = generate_frame(16, 16384, 64, 3).unwrap();
        let (c, s) = (0.5f64.cos(), 0.5f64.sin());
        let w = symbol_wave(&f, |a, b| (a * c - b * s, a * s + b * c));
        let out = cmma_equalize(&w, &f.qam(), &CmmaConfig::default()).unwrap();
        let (aligned, rep) = resolve_ambiguity(&out.symbols, &f, 3).unwrap();
        assert!(rep.lock.iter().all(|&l| l > 0.99), "{rep:?}");
        let qam = f.qam();
        // Blind convergence leaves a constant phase per polarization; the pilots fix it.
        for p in 0..2 {
            let rot: Complex64 = f
                .pilot_positions
                .iter()
                .zip(&f.pilot_values[p])
                .map(|(&k, &v)| aligned[p][k] * v.conj())
                .sum();
            let rot = rot / rot.norm();
            let errors = (8192..16384)
                .filter(|&k| qam.decide(aligned[p][k] * rot.conj()) != f.labels[p][k])
                .count();
            assert_eq!(errors, 0, "pol {p}");
        }
    }

    #[test]
    fn input_checks() {
        let f = generate_frame(16, 1024, 64, 2).unwrap();
        let w = symbol_wave(&f, |a, b| (a, b));
        let q = f.qam();
        assert!(cmma_equalize(
            &w,
            &q,
            &CmmaConfig {
                taps: 20,
                ..Default::default()
            }
        )
        .is_err());
        assert!(cmma_equalize(
            &w,
            &q,
            &CmmaConfig {
                step_size: 0.0,
                ..Default::default()
            }
        )
        .is_err());
        let two = WaveformQuad {
            samples_per_symbol: 2.0,
            ..w.clone()
        };
        assert!(cmma_equalize(&two, &q, &CmmaConfig::default()).is_err());
        let short = WaveformQuad::from_pols(&f.symbols[0][..10], &f.symbols[1][..10], 1e9, 1.0, 0.0, 0.05).unwrap();
        assert!(matches!(
            cmma_equalize(&short, &q, &CmmaConfig::default()),
            Err(Error::Length(_))
        ));
    }

    #[test]
    fn runaway_step_is_reported() {
        let f = generate_frame(16, 4096, 64, 2).unwrap();
        let w = symbol_wave(&f, |a, b| (a, b));
        let cfg = CmmaConfig {
            step_size: 5.0,
            dd_step_size: 5.0,
            ..Default::default()
        };
        assert!(matches!(cmma_equalize(&w, &f.qam(), &cfg), Err(Error::Convergence(_))));
    }
}
