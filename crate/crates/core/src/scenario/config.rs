use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dsp::{DspConfig, ImpairmentSpec};
use crate::energy::EnergyTable;
use crate::error::{Error, Result};
use crate::link::{Adjacency, CouplingOverride, DetectorSpec, FiberSpec, FwmMode};
use crate::planner::{ChannelPlan, ComparisonOptions};
use crate::qkd::DecoyParams;

/// Fiber section. Every field defaults to the seven-core preset at 3.5 km.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FiberConfig {
    pub core_count: usize,
    pub length_km: f64,
    pub alpha_q: f64,
    pub alpha_c: f64,
    pub raman_efficiency: f64,
    pub coupling: f64,
    /// Adjacent core pairs.
    pub adjacency: Vec<[usize; 2]>,
    pub gamma_nl: f64,
    pub beta2_ps2_per_km: f64,
    pub coupling_overrides: Vec<CouplingOverride>,
}

impl Default for FiberConfig {
    fn default() -> Self {
        Self::from(&FiberSpec::seven_core(3.5))
    }
}

impl From<&FiberSpec> for FiberConfig {
    fn from(f: &FiberSpec) -> Self {
        Self {
            core_count: f.core_count,
            length_km: f.length_km,
            alpha_q: f.alpha_q,
            alpha_c: f.alpha_c,
            raman_efficiency: f.raman_efficiency,
            coupling: f.coupling,
            adjacency: f.adjacency.pairs(),
            gamma_nl: f.gamma_nl,
            beta2_ps2_per_km: f.beta2_ps2_per_km,
            coupling_overrides: f.coupling_overrides.clone(),
        }
    }
}

impl FiberConfig {
    pub fn to_spec(&self) -> Result<FiberSpec> {
        let spec = FiberSpec {
            core_count: self.core_count,
            length_km: self.length_km,
            alpha_q: self.alpha_q,
            alpha_c: self.alpha_c,
            raman_efficiency: self.raman_efficiency,
            coupling: self.coupling,
            adjacency: Adjacency::from_pairs(self.core_count, &self.adjacency)?,
            gamma_nl: self.gamma_nl,
            beta2_ps2_per_km: self.beta2_ps2_per_km,
            coupling_overrides: self.coupling_overrides.clone(),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Settings for the `noise` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    /// Launch powers applied to every data carrier of the plan, one row each. Empty: the plan as written.
    pub launch_dbm: Vec<f64>,
    pub fwm_mode: FwmMode,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            launch_dbm: Vec::new(),
            fwm_mode: FwmMode::default(),
        }
    }
}

/// Optional fits applied before any command runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationSection {
    /// Total noise (dBm) the receiver filter bandwidth is fitted to.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub filter_target_dbm: Option<f64>,
    /// Data-carrier launch power at which the filter fit is made.
    pub filter_launch_dbm: f64,
    pub filter_min_nm: f64,
    pub filter_max_nm: f64,
    /// Z-basis QBER that the misalignment error is fitted to.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_qber: Option<f64>,
    /// Key rate that the receiver insertion loss is fitted to.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_skr_bps: Option<f64>,
    pub max_insertion_loss_db: f64,
}

impl Default for CalibrationSection {
    fn default() -> Self {
        Self {
            filter_target_dbm: None,
            filter_launch_dbm: 2.04,
            filter_min_nm: 0.1,
            filter_max_nm: 2.0,
            target_qber: None,
            target_skr_bps: None,
            max_insertion_loss_db: 6.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SkrSection {
    /// Distances to evaluate; empty means the fiber length only.
    pub distances_km: Vec<f64>,
}

impl Default for SkrSection {
    fn default() -> Self {
        Self {
            distances_km: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AllocationSection {
    /// Launch power of each classical carrier to place.
    pub powers_dbm: Vec<f64>,
}

impl Default for AllocationSection {
    fn default() -> Self {
        Self { powers_dbm: vec![10.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurvesSection {
    pub distances_km: Vec<f64>,
    pub launch_dbm: f64,
    pub unfiltered_bw_nm: f64,
    pub dwdm_classical_nm: f64,
    pub dwdm_alpha_c: f64,
}

impl Default for CurvesSection {
    fn default() -> Self {
        let o = ComparisonOptions::default();
        Self {
            distances_km: vec![3.5, 25.0, 50.0, 75.0, 100.0, 125.0, 150.0],
            launch_dbm: 10.0,
            unfiltered_bw_nm: o.unfiltered_bw_nm,
            dwdm_classical_nm: o.dwdm_classical_nm,
            dwdm_alpha_c: o.dwdm_alpha_c,
        }
    }
}

impl CurvesSection {
    pub fn options(&self) -> ComparisonOptions {
        ComparisonOptions {
            unfiltered_bw_nm: self.unfiltered_bw_nm,
            dwdm_classical_nm: self.dwdm_classical_nm,
            dwdm_alpha_c: self.dwdm_alpha_c,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DspSection {
    pub symbols: usize,
    pub order: u32,
    pub pilot_spacing: usize,
    pub impairments: ImpairmentSpec,
    pub receiver: DspConfig,
}

impl Default for DspSection {
    fn default() -> Self {
        Self {
            symbols: 1 << 14,
            order: 16,
            pilot_spacing: 64,
            impairments: ImpairmentSpec::default(),
            receiver: DspConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnergySection {
    pub tables: Vec<EnergyTable>,
    /// Parallel channel counts evaluated for every table.
    pub lanes: Vec<u32>,
}

impl Default for EnergySection {
    fn default() -> Self {
        Self {
            tables: EnergyTable::presets(),
            lanes: vec![1, 2, 4, 5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Dotted path of the swept parameter, e.g. `fiber.length_km`.
    pub path: String,
    pub values: Vec<f64>,
    /// Command run at every point.
    pub command: String,
}

/// A complete, validated run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_name")]
    pub name: String,
    /// Root of every random stream; required by the `dsp` command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub fiber: FiberConfig,
    #[serde(default = "default_plan")]
    pub plan: ChannelPlan,
    #[serde(default)]
    pub detector: DetectorSpec,
    #[serde(default)]
    pub decoy: DecoyParams,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub calibration: CalibrationSection,
    #[serde(default)]
    pub skr: SkrSection,
    #[serde(default)]
    pub allocation: AllocationSection,
    #[serde(default)]
    pub curves: CurvesSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dsp: Option<DspSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<EnergySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

fn default_name() -> String {
    "scenario".into()
}

fn default_plan() -> ChannelPlan {
    ChannelPlan::seven_core_coexistence(-7.0, 0.0)
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: default_name(),
            seed: None,
            fiber: FiberConfig::default(),
            plan: default_plan(),
            detector: DetectorSpec::default(),
            decoy: DecoyParams::default(),
            noise: NoiseSection::default(),
            calibration: CalibrationSection::default(),
            skr: SkrSection::default(),
            allocation: AllocationSection::default(),
            curves: CurvesSection::default(),
            dsp: None,
            energy: None,
            sweep: None,
        }
    }
}

impl Scenario {
    /// Parses and validates scenario text.
    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    /// Canonical text form: every field written out, defaults included.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn fiber_spec(&self) -> Result<FiberSpec> {
        self.fiber.to_spec()
    }

    pub fn validate(&self) -> Result<()> {
        // Scenario files store integers as signed 64-bit values.
        if self.seed.is_some_and(|s| i64::try_from(s).is_err()) {
            return Err(Error::invalid("seed", format!("must be at most {}", i64::MAX)));
        }
        let fiber = self.fiber_spec().map_err(|e| e.in_stage("fiber"))?;
        self.plan.validate(&fiber).map_err(|e| e.in_stage("plan"))?;
        self.detector.validate().map_err(|e| e.in_stage("detector"))?;
        self.decoy.validate().map_err(|e| e.in_stage("decoy"))?;
        if let Some(energy) = &self.energy {
            for t in &energy.tables {
                t.validate().map_err(|e| e.in_stage("energy"))?;
            }
            if energy.lanes.contains(&0) {
                return Err(Error::invalid("energy.lanes", "lane counts must be >= 1"));
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(Error::invalid("sweep.values", "needs at least one value"));
            }
            if sweep.command == "sweep" {
                return Err(Error::invalid("sweep.command", "sweeps do not nest"));
            }
            super::sweep::set_path(self, &sweep.path, sweep.values[0]).map_err(|e| e.in_stage("sweep"))?;
        }
        Ok(())
    }
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Scenario::from_toml(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Writes the canonical form of `scenario` to `path`.
pub fn save_scenario(scenario: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, scenario.to_toml()?).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
