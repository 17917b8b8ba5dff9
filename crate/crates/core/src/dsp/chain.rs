use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    apply_impairments, ber_count, clock_recovery, cmma_equalize, gsop, matched_filter_downsample, pilot_phase_recovery,
    resolve_ambiguity, tx_waveform, AmbiguityReport, BerReport, CmmaConfig, ConstellationPoint, ImpairmentSpec,
    PhaseConfig, PhaseTrack, SymbolFrame, TimingConfig, TimingReport, WaveformQuad,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DspConfig {
    pub rolloff: f64,
    pub samples_per_symbol: usize,
    /// Span of both the transmit and receive pulse filters, symbols.
    pub span_symbols: usize,
    pub baud_hz: f64,
    /// Largest symbol delay searched when aligning the equalizer outputs to the pilots.
    pub max_delay: i32,
    pub timing: TimingConfig,
    pub cmma: CmmaConfig,
    pub phase: PhaseConfig,
    pub dump_constellation: bool,
    /// Keep every n-th symbol in the constellation dump.
    pub dump_stride: usize,
}

impl Default for DspConfig {
    fn default() -> Self {
        Self {
            rolloff: 0.05,
            samples_per_symbol: 2,
            span_symbols: 128,
            baud_hz: 1e9,
            max_delay: 3,
            timing: TimingConfig::default(),
            cmma: CmmaConfig::default(),
            phase: PhaseConfig::default(),
            dump_constellation: false,
            dump_stride: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageDiagnostic {
    pub stage: String,
    /// Mean |z|² per polarization at the stage output.
    pub power: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub ber: BerReport,
    pub stages: Vec<StageDiagnostic>,
    pub timing: TimingReport,
    pub tap_energy: [[f64; 4]; 4],
    pub equalizer_train_error: f64,
    pub equalizer_dd_mse: f64,
    pub ambiguity: AmbiguityReport,
    pub phase: PhaseTrack,
}

fn power(s: &[Vec<Complex64>; 2]) -> [f64; 2] {
    [0, 1].map(|p| s[p].iter().map(|z| z.norm_sqr()).sum::<f64>() / s[p].len().max(1) as f64)
}

fn dump(out: &mut Vec<ConstellationPoint>, stage: &str, s: &[Vec<Complex64>; 2], stride: usize) {
    for (pol, stream) in s.iter().enumerate() {
        out.extend(stream.iter().step_by(stride.max(1)).map(|z| ConstellationPoint {
            stage: stage.to_string(),
            pol,
            i: z.re,
            q: z.im,
        }));
    }
}

/// Transmit, impair and receive one frame, ending in a bit error count.
pub fn run_chain(
    frame: &SymbolFrame,
    impairments: &ImpairmentSpec,
    config: &DspConfig,
    seed: u64,
) -> Result<ChainReport> {
    if frame.pilot_positions.is_empty() {
        return Err(Error::invalid("frame", "the receiver needs pilots"));
    }
    let mut stages = Vec::new();
    let mut record = |stage: &str, w: &WaveformQuad| {
        stages.push(StageDiagnostic {
            stage: stage.into(),
            power: w.power(),
        });
    };
    let tx = tx_waveform(
        frame,
        config.rolloff,
        config.samples_per_symbol,
        config.span_symbols,
        config.baud_hz,
    )
    .map_err(|e| e.in_stage("tx"))?;
    record("tx", &tx);
    let rx = apply_impairments(&tx, impairments, seed).map_err(|e| e.in_stage("impairments"))?;
    record("impairments", &rx);
    let orth = gsop(&rx).map_err(|e| e.in_stage("gsop"))?;
    record("gsop", &orth);
    let (timed, timing) = clock_recovery(&orth, &config.timing).map_err(|e| e.in_stage("clock_recovery"))?;
    record("clock_recovery", &timed);
    let mf = matched_filter_downsample(
        &timed,
        config.rolloff,
        config.samples_per_symbol,
        1,
        config.span_symbols,
    )
    .map_err(|e| e.in_stage("matched_filter"))?;
    record("matched_filter", &mf);
    let eq = cmma_equalize(&mf, &frame.qam(), &config.cmma).map_err(|e| e.in_stage("equalizer"))?;
    let (aligned, ambiguity) =
        resolve_ambiguity(&eq.symbols, frame, config.max_delay).map_err(|e| e.in_stage("ambiguity"))?;
    stages.push(StageDiagnostic {
        stage: "equalizer".into(),
        power: power(&aligned),
    });
    let (recovered, phase) =
        pilot_phase_recovery(&aligned, frame, &config.phase).map_err(|e| e.in_stage("phase_recovery"))?;
    stages.push(StageDiagnostic {
        stage: "phase_recovery".into(),
        power: power(&recovered),
    });
    let mut ber = ber_count(&recovered, frame).map_err(|e| e.in_stage("ber"))?;
    if config.dump_constellation {
        let mut pts = Vec::new();
        dump(&mut pts, "equalizer", &aligned, config.dump_stride);
        dump(&mut pts, "phase_recovery", &recovered, config.dump_stride);
        ber.constellation_dump = Some(pts);
    }
    Ok(ChainReport {
        ber,
        stages,
        timing,
        tap_energy: eq.tap_energy,
        equalizer_train_error: eq.train_error,
        equalizer_dd_mse: eq.dd_mse,
        ambiguity,
        phase,
    })
}
