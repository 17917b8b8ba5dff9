use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shannon binary entropy in bits.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("binary entropy needs x in [0, 1], got {x}")));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-x * x.log2() - (1.0 - x) * (1.0 - x).log2())
}

/// Bits disclosed by error correction: f_EC · n · h(Q).
pub fn ec_leakage(n_bits: f64, qber: f64, f_ec: f64) -> Result<f64> {
    if !(f_ec >= 1.0) {
        return Err(Error::invalid("f_ec", format!("must be >= 1, got {f_ec}")));
    }
    if !(n_bits >= 0.0) {
        return Err(Error::invalid("n_bits", "must be >= 0"));
    }
    Ok(f_ec * n_bits * binary_entropy(qber)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteKeyInputs {
    pub s_z0_lower: f64,
    pub s_z1_lower: f64,
    pub phi_z_upper: f64,
    pub leak_ec: f64,
    pub eps_sec: f64,
    pub eps_cor: f64,
    pub duration_s: f64,
    /// Sifted Z detections and errors, used only for the reported QBER and raw rate.
    #[serde(default)]
    pub n_z: f64,
    #[serde(default)]
    pub m_z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkrResult {
    pub skr_bps: f64,
    pub qber: f64,
    pub raw_sifted_bps: f64,
    /// True when the key length came out negative and was clamped to 0.
    pub clamped: bool,
    pub inputs: FiniteKeyInputs,
}

/// Secret key length per second:
/// (s₀ + s₁(1 − h(φ)) − leak − 6·log₂(19/ε_sec) − log₂(2/ε_cor)) / t.
pub fn finite_key_rate(inputs: &FiniteKeyInputs) -> Result<SkrResult> {
    let i = inputs;
    if !(i.duration_s > 0.0) {
        return Err(Error::invalid(
            "duration_s",
            format!("must be > 0, got {}", i.duration_s),
        ));
    }
    if !(0.0..=0.5).contains(&i.phi_z_upper) {
        return Err(Error::invalid(
            "phi_z_upper",
            format!("must lie in [0, 0.5], got {}", i.phi_z_upper),
        ));
    }
    if i.s_z0_lower < 0.0 || i.s_z1_lower < 0.0 || i.leak_ec < 0.0 {
        return Err(Error::invalid("inputs", "counts and leakage must be >= 0"));
    }
    let key = i.s_z0_lower + i.s_z1_lower * (1.0 - binary_entropy(i.phi_z_upper)?)
        - i.leak_ec
        - 6.0 * (19.0 / i.eps_sec).log2()
        - (2.0 / i.eps_cor).log2();
    let rate = key / i.duration_s;
    let qber = if i.n_z > 0.0 {
        (i.m_z / i.n_z).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ok(SkrResult {
        skr_bps: rate.max(0.0),
        qber,
        raw_sifted_bps: i.n_z / i.duration_s,
        clamped: rate < 0.0,
        inputs: *inputs,
    })
}
