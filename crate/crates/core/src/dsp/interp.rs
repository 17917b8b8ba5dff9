use num_complex::Complex64;

use crate::error::{Error, Result};

/// Zeroth-order modified Bessel function of the first kind.
fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Kaiser-windowed sinc fractional-delay interpolator stored as a polyphase table.
///
/// Coefficients for a fractional position between two table phases are blended linearly.
#[derive(Debug, Clone)]
pub struct Interpolator {
    half: usize,
    phases: usize,
    // (phases + 1) rows of 2·half taps; row r is for fraction r / phases.
    table: Vec<f64>,
}

impl Default for Interpolator {
    fn default() -> Self {
        Self::new(32, 1024, 10.0)
    }
}

impl Interpolator {
    pub fn new(half: usize, phases: usize, kaiser_beta: f64) -> Self {
        let width = 2 * half;
        let norm = bessel_i0(kaiser_beta);
        let mut table = Vec::with_capacity((phases + 1) * width);
        for r in 0..=phases {
            let f = r as f64 / phases as f64;
            for j in 0..width {
                // Tap j multiplies sample n0 + j + 1 - half; its distance from the target is d.
                let d = f - (j as f64 + 1.0 - half as f64);
                let sinc = if d == 0.0 {
                    1.0
                } else {
                    (std::f64::consts::PI * d).sin() / (std::f64::consts::PI * d)
                };
                let u = d / half as f64;
                let w = if u.abs() >= 1.0 {
                    0.0
                } else {
                    bessel_i0(kaiser_beta * (1.0 - u * u).sqrt()) / norm
                };
                table.push(sinc * w);
            }
        }
        Self { half, phases, table }
    }

    /// Value of the band-limited stream `x` at fractional index `pos`; samples outside are zero.
    pub fn at(&self, x: &[Complex64], pos: f64) -> Complex64 {
        let n0 = pos.floor();
        let frac = pos - n0;
        let n0 = n0 as i64;
        if frac == 0.0 {
            return usize::try_from(n0)
                .ok()
                .and_then(|i| x.get(i))
                .copied()
                .unwrap_or_default();
        }
        let width = 2 * self.half;
        let p = frac * self.phases as f64;
        let r = (p.floor() as usize).min(self.phases - 1);
        let a = p - r as f64;
        let lo = &self.table[r * width..(r + 1) * width];
        let hi = &self.table[(r + 1) * width..(r + 2) * width];
        let first = n0 + 1 - self.half as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..width {
            let idx = first + j as i64;
            if idx < 0 || idx as usize >= x.len() {
                continue;
            }
            let c = lo[j] + a * (hi[j] - lo[j]);
            acc += x[idx as usize] * c;
        }
        acc
    }

    /// Samples at `start + m·step` for m = 0..n_out.
    pub fn resample(&self, x: &[Complex64], start: f64, step: f64, n_out: usize) -> Vec<Complex64> {
        (0..n_out).map(|m| self.at(x, start + m as f64 * step)).collect()
    }
}

/// Change the sample rate by `up/down`, keeping the first sample's time fixed.
pub fn resample_rational(x: &[Complex64], up: u32, down: u32) -> Result<Vec<Complex64>> {
    if up == 0 || down == 0 {
        return Err(Error::invalid("resample ratio", "up and down must be positive"));
    }
    if x.is_empty() {
        return Ok(Vec::new());
    }
    let n_out = ((x.len() - 1) as u64 * up as u64 / down as u64) as usize + 1;
    let it = Interpolator::default();
    // Positions from exact integer ratios, so shared instants hit the input samples exactly.
    Ok((0..n_out as u64)
        .map(|m| {
            let num = m * down as u64;
            it.at(x, (num / up as u64) as f64 + (num % up as u64) as f64 / up as f64)
        })
        .collect())
}
