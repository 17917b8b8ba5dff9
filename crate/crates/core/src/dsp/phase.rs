use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SymbolFrame;
use crate::error::{Error, Result};

/// How the equalizer outputs map onto the transmitted polarizations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityReport {
    /// Output pol feeding transmitted pol 0 and 1.
    pub source: [usize; 2],
    pub conjugated: [bool; 2],
    /// Symbol delay applied to each output, read as `out[k + delay]`.
    pub delay: [i32; 2],
    /// Pilot coherence of the chosen mapping, 1 for a perfect match.
    pub lock: [f64; 2],
}

const PILOTS_PER_BLOCK: usize = 8;
const MIN_LOCK: f64 = 0.5;

fn shifted(y: &[Complex64], k: usize, delay: i32, conj: bool) -> Complex64 {
    let v = usize::try_from(k as i64 + delay as i64)
        .ok()
        .and_then(|i| y.get(i))
        .copied()
        .unwrap_or_default();
    if conj {
        v.conj()
    } else {
        v
    }
}

/// Block-wise pilot coherence: insensitive to slow phase drift within a block.
fn coherence(y: &[Complex64], frame: &SymbolFrame, pol: usize, delay: i32, conj: bool) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (pos, vals) in frame
        .pilot_positions
        .chunks(PILOTS_PER_BLOCK)
        .zip(frame.pilot_values[pol].chunks(PILOTS_PER_BLOCK))
    {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&k, &p) in pos.iter().zip(vals) {
            let z = shifted(y, k, delay, conj);
            acc += z * p.conj();
            den += z.norm() * p.norm();
        }
        num += acc.norm();
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Resolve polarization swap, spectral conjugation and small symbol delays against the pilots.
pub fn resolve_ambiguity(
    symbols: &[Vec<Complex64>; 2],
    frame: &SymbolFrame,
    max_delay: i32,
) -> Result<([Vec<Complex64>; 2], AmbiguityReport)> {
    if frame.pilot_positions.is_empty() {
        return Err(Error::invalid("frame", "no pilots to resolve against"));
    }
    let mut best: Option<(f64, AmbiguityReport)> = None;
    for swap in [false, true] {
        let source = if swap { [1, 0] } else { [0, 1] };
        let mut rep = AmbiguityReport {
            source,
            conjugated: [false; 2],
            delay: [0; 2],
            lock: [0.0; 2],
        };
        for pol in 0..2 {
            for conj in [false, true] {
                for d in -max_delay..=max_delay {
                    let c = coherence(&symbols[source[pol]], frame, pol, d, conj);
                    if c > rep.lock[pol] + 1e-12 {
                        rep.lock[pol] = c;
                        rep.conjugated[pol] = conj;
                        rep.delay[pol] = d;
                    }
                }
            }
        }
        let score = rep.lock[0] + rep.lock[1];
        if best.as_ref().is_none_or(|(s, _)| score > *s + 1e-12) {
            best = Some((score, rep));
        }
    }
    let (_, rep) = best.expect("two candidates evaluated");
    if rep.lock.iter().any(|&l| !(l >= MIN_LOCK)) {
        return Err(Error::Convergence(format!(
            "no pilot lock: coherence {:.2} / {:.2}",
            rep.lock[0], rep.lock[1]
        )));
    }
    let n = frame.len();
    let out = [0, 1].map(|pol| {
        (0..n)
            .map(|k| shifted(&symbols[rep.source[pol]], k, rep.delay[pol], rep.conjugated[pol]))
            .collect()
    });
    Ok((out, rep))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhaseConfig {
    /// Half-width in symbols of the decision-directed refinement window; 0 disables it.
    pub dd_half_window: usize,
    /// Decision-directed Kalman smoothing passes after the window stage; 0 disables them.
    pub smoother_passes: usize,
    /// Smooth one phase track shared by both polarizations instead of one per polarization.
    pub joint_polarization: bool,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        Self {
            dd_half_window: 12,
            smoother_passes: 2,
            joint_polarization: true,
        }
    }
}

/// Known pilots where present, hard decisions elsewhere.
fn references(z: &[Complex64], frame: &SymbolFrame, pol: usize) -> Vec<Complex64> {
    let qam = frame.qam();
    let mut pilots = frame.pilot_positions.iter().zip(&frame.pilot_values[pol]).peekable();
    z.iter()
        .enumerate()
        .map(|(k, v)| match pilots.peek() {
            Some((&pk, &pv)) if pk == k => {
                pilots.next();
                pv
            }
            _ => qam.point(qam.decide(*v)),
        })
        .collect()
}

/// Per-symbol random-walk variance implied by the scatter of pilot-to-pilot phase steps.
fn process_noise(ph: &[f64], pos: &[usize], values: &[Complex64], n0: f64) -> f64 {
    const FLOOR: f64 = 1e-12;
    if ph.len() < 3 {
        return FLOOR;
    }
    let steps: Vec<f64> = ph.windows(2).map(|w| w[1] - w[0]).collect();
    let m = steps.len() as f64;
    let mean = steps.iter().sum::<f64>() / m;
    let var = steps.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let pilot_power = values.iter().map(|p| p.norm_sqr()).sum::<f64>() / values.len() as f64;
    let spacing = (pos[pos.len() - 1] - pos[0]) as f64 / m;
    ((var - n0 / pilot_power) / spacing).max(FLOOR)
}

/// Fixed-interval smoother for a random-walk phase seen through noisy per-symbol observations
/// `(phase, variance)`.
fn rts_smooth(obs: &[(f64, f64)], q: f64) -> Vec<f64> {
    let n = obs.len();
    let mut xf = Vec::with_capacity(n);
    let mut pf = Vec::with_capacity(n);
    let (mut x, mut p) = (obs[0].0, obs[0].1);
    for (k, &(o, r)) in obs.iter().enumerate() {
        if k > 0 {
            p += q;
        }
        let g = p / (p + r);
        x += g * (o - x);
        p *= 1.0 - g;
        xf.push(x);
        pf.push(p);
    }
    let mut xs = xf.clone();
    for k in (0..n.saturating_sub(1)).rev() {
        let c = pf[k] / (pf[k] + q);
        xs[k] = xf[k] + c * (xs[k + 1] - xf[k]);
    }
    xs
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTrack {
    /// Unwrapped phase estimate at each pilot, per polarization.
    pub pilot_phase: [Vec<f64>; 2],
    /// Largest difference between an interior pilot's phase and the interpolation of its neighbours, rad.
    pub max_pilot_residual_rad: f64,
    /// RMS of the same residual.
    pub pilot_residual_rms: f64,
    /// Some pilot residual exceeded π/4: the pilot spacing is too coarse for the phase noise
    /// and the interpolated track may have slipped a quadrant.
    pub cycle_slip: bool,
}

fn derotate(y: &[Complex64], theta: &[f64]) -> Vec<Complex64> {
    y.iter()
        .zip(theta)
        .map(|(v, t)| v * Complex64::from_polar(1.0, -t))
        .collect()
}

fn unwrap(phases: &mut [f64]) {
    for i in 1..phases.len() {
        let d = phases[i] - phases[i - 1];
        phases[i] -= (d / (2.0 * PI)).round() * 2.0 * PI;
    }
}

fn interpolate(pos: &[usize], ph: &[f64], n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut seg = 0;
    for k in 0..n {
        while seg + 1 < pos.len() && pos[seg + 1] <= k {
            seg += 1;
        }
        let v = if k <= pos[0] {
            ph[0]
        } else if seg + 1 >= pos.len() {
            ph[pos.len() - 1]
        } else {
            let a = (k - pos[seg]) as f64 / (pos[seg + 1] - pos[seg]) as f64;
            ph[seg] + a * (ph[seg + 1] - ph[seg])
        };
        out.push(v);
    }
    out
}

/// Pilot-aided phase recovery: conjugate products at the pilots, unwrapped and linearly
/// interpolated, then optional decision-directed refinement by a sliding window and by a
/// Kalman smoother over the whole frame.
pub fn pilot_phase_recovery(
    symbols: &[Vec<Complex64>; 2],
    frame: &SymbolFrame,
    cfg: &PhaseConfig,
) -> Result<([Vec<Complex64>; 2], PhaseTrack)> {
    let n = frame.len();
    if symbols[0].len() != n || symbols[1].len() != n {
        return Err(Error::Length(format!(
            "{} / {} symbols against a frame of {n}",
            symbols[0].len(),
            symbols[1].len()
        )));
    }
    if frame.pilot_positions.is_empty() {
        return Err(Error::invalid("frame", "pilot phase recovery needs pilots"));
    }
    let mut track = PhaseTrack {
        pilot_phase: Default::default(),
        max_pilot_residual_rad: 0.0,
        pilot_residual_rms: 0.0,
        cycle_slip: false,
    };
    let mut resid = (0.0, 0usize);
    let mut thetas: [Vec<f64>; 2] = Default::default();
    let mut scaled: [Vec<Complex64>; 2] = Default::default();
    for pol in 0..2 {
        let y = &symbols[pol];
        let mut ph: Vec<f64> = frame
            .pilot_positions
            .iter()
            .zip(&frame.pilot_values[pol])
            .map(|(&k, &p)| (y[k] * p.conj()).arg())
            .collect();
        unwrap(&mut ph);
        for (i, w) in ph.windows(3).enumerate() {
            let (a, b, c) = (
                frame.pilot_positions[i],
                frame.pilot_positions[i + 1],
                frame.pilot_positions[i + 2],
            );
            let predicted = w[0] + (w[2] - w[0]) * (b - a) as f64 / (c - a) as f64;
            let d = w[1] - predicted;
            let d = d - (d / (2.0 * PI)).round() * 2.0 * PI;
            track.max_pilot_residual_rad = track.max_pilot_residual_rad.max(d.abs());
            resid.0 += d * d;
            resid.1 += 1;
        }
        let mut theta = interpolate(&frame.pilot_positions, &ph, n);

        // Amplitude from the pilots, each projected on the phase its neighbours predict.
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..ph.len() {
            let guess = match (i.checked_sub(1), ph.get(i + 1)) {
                (Some(a), Some(b)) => 0.5 * (ph[a] + b),
                (Some(a), None) => ph[a],
                (None, Some(b)) => *b,
                (None, None) => ph[i],
            };
            let p = frame.pilot_values[pol][i];
            num += p.norm_sqr();
            den += (y[frame.pilot_positions[i]] * p.conj() * Complex64::from_polar(1.0, -guess)).re;
        }
        let g = if den > 0.0 { num / den } else { 1.0 };
        scaled[pol] = y.iter().map(|v| v * g).collect();
        let y = &scaled[pol];

        let w = cfg.dd_half_window;
        if w > 0 {
            let z = derotate(y, &theta);
            let c: Vec<Complex64> = z
                .iter()
                .zip(references(&z, frame, pol))
                .map(|(v, r)| v * r.conj())
                .collect();
            let mut prefix = Vec::with_capacity(n + 1);
            prefix.push(Complex64::new(0.0, 0.0));
            for v in &c {
                prefix.push(prefix.last().copied().unwrap_or_default() + v);
            }
            for (k, t) in theta.iter_mut().enumerate() {
                let s = prefix[(k + w + 1).min(n)] - prefix[k.saturating_sub(w)];
                if s.norm() > 0.0 {
                    *t += s.arg();
                }
            }
        }
        thetas[pol] = theta;
        track.pilot_phase[pol] = ph;
    }

    for _ in 0..cfg.smoother_passes {
        let mut obs: [Vec<(f64, f64)>; 2] = Default::default();
        let mut q = [0.0; 2];
        for pol in 0..2 {
            let z = derotate(&scaled[pol], &thetas[pol]);
            let refs = references(&z, frame, pol);
            let n0 = (z.iter().zip(&refs).map(|(v, r)| (v - r).norm_sqr()).sum::<f64>() / n as f64).max(1e-12);
            q[pol] = process_noise(
                &track.pilot_phase[pol],
                &frame.pilot_positions,
                &frame.pilot_values[pol],
                n0,
            );
            obs[pol] = z
                .iter()
                .zip(&refs)
                .zip(&thetas[pol])
                .map(|((v, r), t)| {
                    let res = (v * r.conj()).arg();
                    let var = n0 / (2.0 * r.norm_sqr().max(1e-12));
                    // Huber weighting: residuals far outside the noise are mostly wrong decisions.
                    let k2 = res * res / (4.0 * var);
                    (t + res, if k2 > 1.0 { var * k2.sqrt() } else { var })
                })
                .collect();
        }
        if cfg.joint_polarization {
            // Both polarizations see the same laser phase up to a fixed offset.
            let offset = thetas[0]
                .iter()
                .zip(&thetas[1])
                .map(|(a, b)| Complex64::from_polar(1.0, b - a))
                .sum::<Complex64>()
                .arg();
            let merged: Vec<(f64, f64)> = obs[0]
                .iter()
                .zip(&obs[1])
                .map(|(&(o0, r0), &(o1, r1))| {
                    let d = o1 - offset - o0;
                    let o1 = o1 - offset - (d / (2.0 * PI)).round() * 2.0 * PI;
                    let r = 1.0 / (1.0 / r0 + 1.0 / r1);
                    ((o0 / r0 + o1 / r1) * r, r)
                })
                .collect();
            let common = rts_smooth(&merged, 0.5 * (q[0] + q[1]));
            thetas[1] = common.iter().map(|t| t + offset).collect();
            thetas[0] = common;
        } else {
            for pol in 0..2 {
                thetas[pol] = rts_smooth(&obs[pol], q[pol]);
            }
        }
    }
    let out = [0, 1].map(|pol| derotate(&scaled[pol], &thetas[pol]));
    track.cycle_slip = track.max_pilot_residual_rad > FRAC_PI_4;
    if resid.1 > 0 {
        track.pilot_residual_rms = (resid.0 / resid.1 as f64).sqrt();
    }
    // Isolated slips only raise the flag; a track that cannot predict its own pilots has no lock.
    if track.pilot_residual_rms > FRAC_PI_4 {
        return Err(Error::Convergence(format!(
            "pilot phase track incoherent: neighbour residual {:.2} rad",
            track.pilot_residual_rms
        )));
    }
    Ok((out, track))
}
