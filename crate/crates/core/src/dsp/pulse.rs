use num_complex::Complex64;

use crate::error::{Error, Result};

/// Unit-energy root-raised-cosine taps spanning `span_symbols` symbols (span·sps + 1 taps).
pub fn rrc_taps(rolloff: f64, samples_per_symbol: usize, span_symbols: usize) -> Result<Vec<f64>> {
    if !(rolloff > 0.0 && rolloff <= 1.0) {
        return Err(Error::invalid("rolloff", format!("must lie in (0, 1], got {rolloff}")));
    }
    if samples_per_symbol == 0 || span_symbols == 0 || span_symbols % 2 != 0 {
        return Err(Error::invalid(
            "span_symbols",
            "must be even and positive, with sps >= 1",
        ));
    }
    let b = rolloff;
    let pi = std::f64::consts::PI;
    let half = (span_symbols * samples_per_symbol / 2) as i64;
    let mut h: Vec<f64> = (-half..=half)
        .map(|n| {
            let t = n as f64 / samples_per_symbol as f64;
            if n == 0 {
                1.0 - b + 4.0 * b / pi
            } else if (1.0 - (4.0 * b * t).powi(2)).abs() < 1e-10 {
                b / 2f64.sqrt()
                    * ((1.0 + 2.0 / pi) * (pi / (4.0 * b)).sin() + (1.0 - 2.0 / pi) * (pi / (4.0 * b)).cos())
            } else {
                ((pi * t * (1.0 - b)).sin() + 4.0 * b * t * (pi * t * (1.0 + b)).cos())
                    / (pi * t * (1.0 - (4.0 * b * t).powi(2)))
            }
        })
        .collect();
    let e = h.iter().map(|v| v * v).sum::<f64>().sqrt();
    h.iter_mut().for_each(|v| *v /= e);
    Ok(h)
}

/// Full linear convolution of a complex stream with real taps.
pub fn convolve(x: &[Complex64], h: &[f64]) -> Vec<Complex64> {
    if x.is_empty() || h.is_empty() {
        return Vec::new();
    }
    let mut y = vec![Complex64::new(0.0, 0.0); x.len() + h.len() - 1];
    for (i, &xi) in x.iter().enumerate() {
        if xi.re == 0.0 && xi.im == 0.0 {
            continue;
        }
        for (yj, &hj) in y[i..i + h.len()].iter_mut().zip(h) {
            *yj += xi * hj;
        }
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real_conv(a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &h) in b.iter().enumerate() {
                y[i + j] += x * h;
            }
        }
        y
    }

    #[test]
    fn unit_energy_and_symmetric() {
        for (b, sps, span) in [(0.05, 2, 128), (0.25, 4, 16), (1.0, 2, 8)] {
            let h = rrc_taps(b, sps, span).unwrap();
            assert_eq!(h.len(), sps * span + 1);
            assert!((h.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-9);
            for i in 0..h.len() / 2 {
                assert!((h[i] - h[h.len() - 1 - i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn singular_points_match_limits() {
        // β = 0.25, sps = 4 puts t = 1/(4β) = 1 exactly on a tap; compare against nearby evaluations.
        let h = rrc_taps(0.25, 4, 16).unwrap();
        let c = h.len() / 2;
        let near = rrc_taps(0.25, 4000, 16).unwrap();
        let cn = near.len() / 2;
        let scale = h[c] / near[cn];
        assert!((h[c + 4] - near[cn + 4000 + 1] * scale).abs() < 1e-3);
        assert!(h.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn cascade_is_nyquist() {
        let h = rrc_taps(0.05, 2, 128).unwrap();
        let g = real_conv(&h, &h);
        let c = g.len() / 2;
        let peak = g[c];
        let worst = (1..c / 2)
            .map(|k| g[c + 2 * k].abs().max(g[c - 2 * k].abs()))
            .fold(0.0, f64::max);
        assert!(worst / peak < 1e-3, "{worst}");
        assert!((peak - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(rrc_taps(0.0, 2, 16).is_err());
        assert!(rrc_taps(0.5, 2, 15).is_err());
    }

    #[test]
    fn convolution_identity() {
        let x: Vec<Complex64> = (0..5).map(|i| Complex64::new(i as f64, -(i as f64))).collect();
        assert_eq!(convolve(&x, &[1.0]), x);
        assert!(convolve(&[], &[1.0]).is_empty());
    }
}
