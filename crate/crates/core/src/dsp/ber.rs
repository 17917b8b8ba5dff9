use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SymbolFrame;
use crate::error::{Error, Result};

/// Hard-decision FEC threshold the pre-FEC BER is checked against.
pub const PRE_FEC_THRESHOLD: f64 = 3.8e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstellationPoint {
    pub stage: String,
    pub pol: usize,
    pub i: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerReport {
    pub bit_errors: u64,
    pub bits: u64,
    pub ber: f64,
    pub pre_fec_ok: bool,
    /// RMS error vector relative to the RMS of the transmitted data symbols.
    pub evm_percent: f64,
    pub constellation_dump: Option<Vec<ConstellationPoint>>,
}

/// Minimum-distance decisions on the data symbols, compared bit by bit with the frame.
pub fn ber_count(symbols: &[Vec<Complex64>; 2], frame: &SymbolFrame) -> Result<BerReport> {
    let n = frame.len();
    for s in symbols {
        if s.len() != n {
            return Err(Error::Length(format!(
                "{} received symbols against a frame of {n}",
                s.len()
            )));
        }
    }
    let qam = frame.qam();
    let mut bit_errors = 0u64;
    let mut bits = 0u64;
    let mut err_pow = 0.0;
    let mut ref_pow = 0.0;
    for pol in 0..2 {
        let mut pilots = frame.pilot_positions.iter().peekable();
        for (k, (&z, &label)) in symbols[pol].iter().zip(&frame.labels[pol]).enumerate() {
            if pilots.peek() == Some(&&k) {
                pilots.next();
                continue;
            }
            bit_errors += (qam.decide(z) ^ label).count_ones() as u64;
            bits += qam.bits_per_symbol() as u64;
            let s = frame.symbols[pol][k];
            err_pow += (z - s).norm_sqr();
            ref_pow += s.norm_sqr();
        }
    }
    let ber = if bits > 0 { bit_errors as f64 / bits as f64 } else { 0.0 };
    Ok(BerReport {
        bit_errors,
        bits,
        ber,
        pre_fec_ok: ber <= PRE_FEC_THRESHOLD,
        evm_percent: if ref_pow > 0.0 {
            100.0 * (err_pow / ref_pow).sqrt()
        } else {
            0.0
        },
        constellation_dump: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::generate_frame;

    #[test]
    fn identical_streams() {
        let f = generate_frame(16, 1000, 64, 1).unwrap();
        let r = ber_count(&f.symbols, &f).unwrap();
        assert_eq!(r.bit_errors, 0);
        assert_eq!(r.bits, 2 * 4 * (1000 - f.pilot_positions.len() as u64));
        assert_eq!(r.evm_percent, 0.0);
        assert!(r.pre_fec_ok);
    }

    #[test]
    fn adjacent_decision_costs_one_bit() {
        let f = generate_frame(16, 100, 64, 1).unwrap();
        let q = f.qam();
        let mut s = f.symbols.clone();
        let k = 5;
        let p = s[0][k];
        let step = 2.0 / 10f64.sqrt();
        // Move to the horizontally adjacent point, inward if at the edge.
        let dx = if p.re > 0.0 { -step } else { step };
        s[0][k] = p + Complex64::new(dx, 0.0);
        assert_ne!(q.decide(s[0][k]), f.labels[0][k]);
        let r = ber_count(&s, &f).unwrap();
        assert_eq!(r.bit_errors, 1);
    }

    #[test]
    fn pilots_are_not_counted() {
        let f = generate_frame(16, 200, 4, 1).unwrap();
        let mut s = f.symbols.clone();
        for &k in &f.pilot_positions {
            s[0][k] = -s[0][k];
        }
        assert_eq!(ber_count(&s, &f).unwrap().bit_errors, 0);
    }

    #[test]
    fn length_mismatch() {
        let f = generate_frame(16, 100, 64, 1).unwrap();
        let s = [f.symbols[0][..99].to_vec(), f.symbols[1].clone()];
        assert!(matches!(ber_count(&s, &f), Err(Error::Length(_))));
    }
}
