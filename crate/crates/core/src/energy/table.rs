use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PJ: f64 = 1e-12;

/// Data converter bank, costed with the Walden figure of merit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConverterSpec {
    /// Number of converters (one per real rail).
    pub count: u32,
    pub sample_rate_gsps: f64,
    pub enob: f64,
    /// Energy per conversion step, J.
    pub fom_j_per_step: f64,
}

impl ConverterSpec {
    /// Power of the whole bank, W: count · FOM · 2^ENOB · fs.
    pub fn power_w(&self) -> f64 {
        self.count as f64 * self.fom_j_per_step * self.enob.exp2() * self.sample_rate_gsps * 1e9
    }

    /// Energy per information bit at `bitrate_gbps`.
    pub fn energy_per_bit(&self, bitrate_gbps: f64) -> Result<f64> {
        if !(bitrate_gbps > 0.0) {
            return Err(Error::invalid(
                "bitrate_gbps",
                format!("must be > 0, got {bitrate_gbps}"),
            ));
        }
        if !(self.sample_rate_gsps >= 0.0 && self.enob >= 0.0 && self.fom_j_per_step >= 0.0) {
            return Err(Error::invalid("converter", "rate, ENOB and FOM must be >= 0"));
        }
        Ok(self.power_w() / (bitrate_gbps * 1e9))
    }
}

/// 5 nm CMOS converter: 6 effective bits at 10 fJ per step.
fn converters(count: u32, sample_rate_gsps: f64) -> ConverterSpec {
    ConverterSpec {
        count,
        sample_rate_gsps,
        enob: 6.0,
        fom_j_per_step: 10e-15,
    }
}

/// Per-information-bit energies of one transceiver, J/bit.
///
/// QKD costs sit in `e_enc` on the transmit side and `e_sift` on the receive side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyTable {
    pub scheme_name: String,
    /// Net data rate of one channel, Gb/s.
    pub capacity_gbps: f64,
    pub e_laser: f64,
    /// Modulator and driver, AES-256 included.
    pub e_mod: f64,
    pub e_enc: f64,
    pub e_dac: f64,
    pub e_pd: f64,
    pub e_adc: f64,
    /// Receiver-side laser (local oscillator or injection-locked slave).
    pub e_dfb: f64,
    pub e_dsp: f64,
    pub e_sift: f64,
    /// Module power conversion efficiency η.
    pub eta_conv: f64,
}

impl EnergyTable {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.components() {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be a finite energy >= 0, got {v}")));
            }
        }
        if !(self.eta_conv > 0.0 && self.eta_conv <= 1.0) {
            return Err(Error::invalid(
                "eta_conv",
                format!("must lie in (0, 1], got {}", self.eta_conv),
            ));
        }
        if !(self.capacity_gbps > 0.0 && self.capacity_gbps.is_finite()) {
            return Err(Error::invalid(
                "capacity_gbps",
                format!("must be > 0, got {}", self.capacity_gbps),
            ));
        }
        Ok(())
    }

    pub fn components(&self) -> [(&'static str, f64); 9] {
        [
            ("e_laser", self.e_laser),
            ("e_mod", self.e_mod),
            ("e_enc", self.e_enc),
            ("e_dac", self.e_dac),
            ("e_pd", self.e_pd),
            ("e_adc", self.e_adc),
            ("e_dfb", self.e_dfb),
            ("e_dsp", self.e_dsp),
            ("e_sift", self.e_sift),
        ]
    }

    /// Intensity-modulated direct detection, PAM-4 at 112 GBaud, 200 Gb/s per channel.
    pub fn im_dd_200g() -> Self {
        let rate = 200.0;
        Self {
            scheme_name: "IM-DD".into(),
            capacity_gbps: rate,
            e_laser: 1.5 * PJ,
            e_mod: 2.0 * PJ,
            e_enc: 0.05 * PJ,
            e_dac: converters(1, 112.0)
                .energy_per_bit(rate)
                .expect("preset rate is positive"),
            e_pd: 0.3 * PJ,
            e_adc: converters(1, 112.0)
                .energy_per_bit(rate)
                .expect("preset rate is positive"),
            e_dfb: 0.0,
            e_dsp: 2.0 * PJ,
            e_sift: 0.02 * PJ,
            eta_conv: 0.8,
        }
    }

    /// Intradyne coherent, DP-16QAM at 64 GBaud with a free-running local oscillator and full DSP.
    pub fn ic_400g() -> Self {
        let rate = 400.0;
        Self {
            scheme_name: "IC".into(),
            capacity_gbps: rate,
            e_laser: 1.0 * PJ,
            e_mod: 2.5 * PJ,
            e_enc: 0.05 * PJ,
            e_dac: converters(4, 64.0)
                .energy_per_bit(rate)
                .expect("preset rate is positive"),
            e_pd: 0.4 * PJ,
            e_adc: converters(4, 64.0)
                .energy_per_bit(rate)
                .expect("preset rate is positive"),
            e_dfb: 0.75 * PJ,
            e_dsp: 12.0 * PJ,
            e_sift: 0.02 * PJ,
            eta_conv: 0.8,
        }
    }

    /// Self-homodyne coherent, DP-16QAM at 50 GBaud with the carrier sent alongside the data.
    /// No dispersion, frequency-offset or carrier-phase estimation in the DSP.
    pub fn shc_400g() -> Self {
        let rate = 400.0;
        Self {
            scheme_name: "SHC".into(),
            capacity_gbps: rate,
            e_laser: 1.0 * PJ,
            e_mod: 2.5 * PJ,
            e_enc: 0.05 * PJ,
            e_dac: converters(4, 50.0)
                .energy_per_bit(rate)
                .expect("preset rate is positive"),
            e_pd: 0.4 * PJ,
            e_adc: converters(4, 50.0)
                .energy_per_bit(rate)
                .expect("preset rate is positive"),
            e_dfb: 0.5 * PJ,
            e_dsp: 3.0 * PJ,
            e_sift: 0.02 * PJ,
            eta_conv: 0.8,
        }
    }

    /// The intradyne preset with its DSP energy cut to the self-homodyne value.
    pub fn ic_dsp_lite_400g() -> Self {
        Self {
            scheme_name: "IC DSP-lite".into(),
            e_dsp: Self::shc_400g().e_dsp,
            ..Self::ic_400g()
        }
    }

    pub fn presets() -> Vec<Self> {
        vec![Self::im_dd_200g(), Self::ic_400g(), Self::shc_400g()]
    }

    /// Same scheme carrying `lanes` parallel channels.
    pub fn with_lanes(&self, lanes: u32) -> Self {
        Self {
            capacity_gbps: self.capacity_gbps * lanes as f64,
            ..self.clone()
        }
    }

    /// Transmit energy per bit: (E_laser + E_mod + E_enc + E_dac) / η.
    pub fn tx_energy_per_bit(&self) -> Result<f64> {
        self.check_eta()?;
        Ok((self.e_laser + self.e_mod + self.e_enc + self.e_dac) / self.eta_conv)
    }

    /// Receive energy per bit: (E_PD + E_ADC + E_DFB + E_DSP + E_sift) / η.
    pub fn rx_energy_per_bit(&self) -> Result<f64> {
        self.check_eta()?;
        Ok((self.e_pd + self.e_adc + self.e_dfb + self.e_dsp + self.e_sift) / self.eta_conv)
    }

    /// Tx plus Rx, each transported bit charged once.
    pub fn total_energy_per_bit(&self) -> Result<f64> {
        Ok(self.tx_energy_per_bit()? + self.rx_energy_per_bit()?)
    }

    fn check_eta(&self) -> Result<()> {
        if self.eta_conv > 0.0 && self.eta_conv <= 1.0 {
            Ok(())
        } else {
            Err(Error::invalid(
                "eta_conv",
                format!("must lie in (0, 1], got {}", self.eta_conv),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit(eta: f64) -> EnergyTable {
        EnergyTable {
            scheme_name: "t".into(),
            capacity_gbps: 100.0,
            e_laser: PJ,
            e_mod: 2.0 * PJ,
            e_enc: 3.0 * PJ,
            e_dac: 4.0 * PJ,
            e_pd: PJ,
            e_adc: PJ,
            e_dfb: PJ,
            e_dsp: PJ,
            e_sift: PJ,
            eta_conv: eta,
        }
    }

    #[test]
    fn sums() {
        assert!((unit(1.0).tx_energy_per_bit().unwrap() - 10.0 * PJ).abs() < 1e-24);
        assert!((unit(1.0).rx_energy_per_bit().unwrap() - 5.0 * PJ).abs() < 1e-24);
        assert_eq!(
            unit(0.5).tx_energy_per_bit().unwrap(),
            2.0 * unit(1.0).tx_energy_per_bit().unwrap()
        );
        let zero = EnergyTable {
            e_laser: 0.0,
            e_mod: 0.0,
            e_enc: 0.0,
            e_dac: 0.0,
            ..unit(0.7)
        };
        assert_eq!(zero.tx_energy_per_bit().unwrap(), 0.0);
    }

    #[test]
    fn dropping_dsp_saves_exactly_its_share() {
        let t = unit(0.8);
        let lite = EnergyTable {
            e_dsp: 0.0,
            ..t.clone()
        };
        let saved = t.rx_energy_per_bit().unwrap() - lite.rx_energy_per_bit().unwrap();
        assert!((saved - t.e_dsp / 0.8).abs() < 1e-24);
    }

    #[test]
    fn zero_efficiency_is_rejected() {
        assert!(unit(0.0).tx_energy_per_bit().is_err());
        assert!(unit(0.0).rx_energy_per_bit().is_err());
        assert!(unit(1.5).validate().is_err());
        let neg = EnergyTable { e_pd: -PJ, ..unit(1.0) };
        assert!(matches!(neg.validate(), Err(Error::Invalid { field, .. }) if field == "e_pd"));
    }

    #[test]
    fn converter_rule() {
        let c = ConverterSpec {
            count: 4,
            sample_rate_gsps: 64.0,
            enob: 6.0,
            fom_j_per_step: 10e-15,
        };
        // 4 × 10 fJ × 64 × 64 GS/s = 163.84 mW, over 400 Gb/s.
        assert!((c.power_w() - 0.16384).abs() < 1e-15);
        assert!((c.energy_per_bit(400.0).unwrap() - 0.4096e-12).abs() < 1e-24);
        let faster = ConverterSpec {
            sample_rate_gsps: 128.0,
            ..c
        };
        let finer = ConverterSpec { enob: 7.0, ..c };
        assert_eq!(faster.power_w(), 2.0 * c.power_w());
        assert_eq!(finer.power_w(), 2.0 * c.power_w());
        assert!(c.energy_per_bit(0.0).is_err());
    }

    #[test]
    fn presets_are_valid_and_ordered() {
        for t in EnergyTable::presets()
            .into_iter()
            .chain([EnergyTable::ic_dsp_lite_400g()])
        {
            t.validate().unwrap();
        }
        let shc = EnergyTable::shc_400g().total_energy_per_bit().unwrap();
        let ic = EnergyTable::ic_400g().total_energy_per_bit().unwrap();
        assert!(shc < ic);
        let lite = EnergyTable::ic_dsp_lite_400g();
        assert!(lite.rx_energy_per_bit().unwrap() < EnergyTable::ic_400g().rx_energy_per_bit().unwrap());
        assert_eq!(
            lite.tx_energy_per_bit().unwrap(),
            EnergyTable::ic_400g().tx_energy_per_bit().unwrap()
        );
        let ratio = EnergyTable::shc_400g().capacity_gbps / EnergyTable::im_dd_200g().capacity_gbps;
        assert!((ratio - 2.0).abs() < 0.2);
    }

    proptest! {
        #[test]
        fn linear_in_each_component(
            base in prop::array::uniform9(0.0f64..10.0),
            which in 0usize..9,
            delta in 0.0f64..10.0,
            eta in 0.05f64..1.0,
        ) {
            let mk = |v: [f64; 9]| EnergyTable {
                scheme_name: "p".into(),
                capacity_gbps: 1.0,
                e_laser: v[0] * PJ,
                e_mod: v[1] * PJ,
                e_enc: v[2] * PJ,
                e_dac: v[3] * PJ,
                e_pd: v[4] * PJ,
                e_adc: v[5] * PJ,
                e_dfb: v[6] * PJ,
                e_dsp: v[7] * PJ,
                e_sift: v[8] * PJ,
                eta_conv: eta,
            };
            let a = mk(base);
            let mut bumped = base;
            bumped[which] += delta;
            let b = mk(bumped);
            let (dt, dr) = (
                b.tx_energy_per_bit().unwrap() - a.tx_energy_per_bit().unwrap(),
                b.rx_energy_per_bit().unwrap() - a.rx_energy_per_bit().unwrap(),
            );
            let expect = delta * PJ / eta;
            let tol = 1e-9 * (a.total_energy_per_bit().unwrap() + expect);
            if which < 4 {
                prop_assert!((dt - expect).abs() <= tol && dr == 0.0);
            } else {
                prop_assert!((dr - expect).abs() <= tol && dt == 0.0);
            }
            // Inverse-linear in η.
            let half = EnergyTable { eta_conv: eta / 2.0, ..a.clone() };
            let t2 = half.total_energy_per_bit().unwrap();
            prop_assert!((t2 - 2.0 * a.total_energy_per_bit().unwrap()).abs() <= 1e-12 * t2.max(1e-30));
        }
    }
}
