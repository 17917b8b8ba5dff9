//! Per-stage seeds derived from one scenario seed.

use sha2::{Digest, Sha256};

/// First eight bytes (little endian) of SHA-256(seed ‖ stage).
pub fn derive_seed(seed: u64, stage: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(stage.as_bytes());
    let digest = h.finalize();
    let mut first = [0u8; 8];
    first.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(first)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_and_stage_dependent() {
        assert_eq!(derive_seed(7, "dsp.frame"), derive_seed(7, "dsp.frame"));
        assert_ne!(derive_seed(7, "dsp.frame"), derive_seed(7, "dsp.noise"));
        assert_ne!(derive_seed(7, "dsp.frame"), derive_seed(8, "dsp.frame"));
    }

    #[test]
    fn known_digest_prefix() {
        // sha256(00 00 00 00 00 00 00 00) begins af5570f5a1810b7a.
        assert_eq!(
            derive_seed(0, ""),
            u64::from_le_bytes([0xaf, 0x55, 0x70, 0xf5, 0xa1, 0x81, 0x0b, 0x7a])
        );
    }
}
