use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Qam;
use crate::error::{Error, Result};
use crate::seed::derive_seed;

/// Dual-polarization symbol frame with periodic pilots.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolFrame {
    pub order: u32,
    /// Gray labels per polarization, pilots included.
    pub labels: [Vec<u32>; 2],
    pub symbols: [Vec<Complex64>; 2],
    pub pilot_positions: Vec<usize>,
    /// Pilot symbols per polarization, one per pilot position.
    pub pilot_values: [Vec<Complex64>; 2],
    pub seed: u64,
}

impl SymbolFrame {
    pub fn len(&self) -> usize {
        self.symbols[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn qam(&self) -> Qam {
        Qam::new(self.order).expect("frame order was validated at construction")
    }

    pub fn is_pilot(&self, k: usize) -> bool {
        self.pilot_positions.binary_search(&k).is_ok()
    }
}

/// Uniform Gray-mapped symbols with pilots every `pilot_spacing` symbols.
///
/// Pilots are corner points whose quadrant follows a seeded pseudo-random sequence,
/// different on each polarization.
pub fn generate_frame(order: u32, n_symbols: usize, pilot_spacing: usize, seed: u64) -> Result<SymbolFrame> {
    let qam = Qam::new(order)?;
    if pilot_spacing < 2 {
        return Err(Error::invalid(
            "pilot_spacing",
            format!("must be >= 2, got {pilot_spacing}"),
        ));
    }
    let pilot_positions: Vec<usize> = (0..n_symbols).step_by(pilot_spacing).collect();
    let mut labels: [Vec<u32>; 2] = Default::default();
    let mut pilot_values: [Vec<Complex64>; 2] = Default::default();
    for pol in 0..2 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("frame.data.{pol}")));
        labels[pol] = (0..n_symbols).map(|_| rng.random_range(0..order)).collect();
        let mut prng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("frame.pilots.{pol}")));
        for &k in &pilot_positions {
            let l = qam.corner(prng.random_range(0..4));
            labels[pol][k] = l;
            pilot_values[pol].push(qam.point(l));
        }
    }
    let symbols = [0, 1].map(|p| labels[p].iter().map(|&l| qam.point(l)).collect());
    Ok(SymbolFrame {
        order,
        labels,
        symbols,
        pilot_positions,
        pilot_values,
        seed,
    })
}
