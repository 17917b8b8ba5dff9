//! Dual-polarization coherent waveform generation, impairments and receiver DSP.

mod ber;
mod chain;
mod equalizer;
mod frame;
mod gsop;
mod impair;
mod interp;
mod matched;
mod phase;
mod pulse;
mod qam;
mod timing;
mod waveform;

pub use ber::{ber_count, BerReport, ConstellationPoint, PRE_FEC_THRESHOLD};
pub use chain::{run_chain, ChainReport, DspConfig, StageDiagnostic};
pub use equalizer::{cmma_equalize, CmmaConfig, EqualizerOutput};
pub use frame::{generate_frame, SymbolFrame};
pub use gsop::{gram, gsop};
pub use impair::{apply_impairments, ImpairmentSpec};
pub use interp::{resample_rational, Interpolator};
pub use matched::matched_filter_downsample;
pub use phase::{pilot_phase_recovery, resolve_ambiguity, AmbiguityReport, PhaseConfig, PhaseTrack};
pub use pulse::{convolve, rrc_taps};
pub use qam::Qam;
pub use timing::{clock_recovery, TimingConfig, TimingReport};
pub use waveform::{tx_waveform, WaveformQuad};
