use num_complex::Complex64;

use crate::error::{Error, Result};

/// Gray-labelled square QAM with unit average power.
///
/// A label packs the Gray-coded in-phase level in the high bits and the quadrature level in the low bits.
#[derive(Debug, Clone, PartialEq)]
pub struct Qam {
    order: u32,
    levels: u32,
    half_bits: u32,
    scale: f64,
}

fn gray(i: u32) -> u32 {
    i ^ (i >> 1)
}

fn inverse_gray(mut g: u32) -> u32 {
    let mut i = g;
    while g > 0 {
        g >>= 1;
        i ^= g;
    }
    i
}

impl Qam {
    pub fn new(order: u32) -> Result<Self> {
        let half_bits = match order {
            4 => 1,
            16 => 2,
            64 => 3,
            _ => {
                return Err(Error::invalid(
                    "order",
                    format!("QAM order must be 4, 16 or 64, got {order}"),
                ))
            }
        };
        let levels = 1 << half_bits;
        Ok(Self {
            order,
            levels,
            half_bits,
            scale: (2.0 * (order as f64 - 1.0) / 3.0).sqrt(),
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn bits_per_symbol(&self) -> u32 {
        2 * self.half_bits
    }

    fn level_amplitude(&self, i: u32) -> f64 {
        (2.0 * i as f64 - (self.levels as f64 - 1.0)) / self.scale
    }

    fn nearest_level(&self, x: f64) -> u32 {
        let i = ((x * self.scale + self.levels as f64 - 1.0) / 2.0).round();
        i.clamp(0.0, self.levels as f64 - 1.0) as u32
    }

    pub fn point(&self, label: u32) -> Complex64 {
        let mask = self.levels - 1;
        let i = inverse_gray(label >> self.half_bits);
        let q = inverse_gray(label & mask);
        Complex64::new(self.level_amplitude(i), self.level_amplitude(q))
    }

    /// Minimum-distance decision, returned as a label.
    pub fn decide(&self, z: Complex64) -> u32 {
        (gray(self.nearest_level(z.re)) << self.half_bits) | gray(self.nearest_level(z.im))
    }

    pub fn points(&self) -> Vec<Complex64> {
        (0..self.order).map(|l| self.point(l)).collect()
    }

    /// Label of the corner point in the given quadrant (0: +,+  1: -,+  2: -,-  3: +,-).
    pub fn corner(&self, quadrant: u32) -> u32 {
        let top = self.levels - 1;
        let (i, q) = match quadrant % 4 {
            0 => (top, top),
            1 => (0, top),
            2 => (0, 0),
            _ => (top, 0),
        };
        (gray(i) << self.half_bits) | gray(q)
    }

    /// Distinct magnitudes of the constellation points, ascending.
    pub fn ring_radii(&self) -> Vec<f64> {
        let mut r: Vec<f64> = self.points().iter().map(|p| p.norm()).collect();
        r.sort_by(f64::total_cmp);
        r.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        r
    }
}
