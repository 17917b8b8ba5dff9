use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::config::Scenario;
use super::sweep::set_path;
use super::table::{format_number, Cell, ResultTable};
use crate::dsp::{generate_frame, run_chain, ChainReport};
use crate::energy::{scheme_comparison, EnergyTable};
use crate::error::{Error, Result};
use crate::link::{calibrate_filter_bandwidth, total_noise_with, CarrierRole, NoiseOptions};
use crate::planner::{compare_sdm_dwdm, optimize_allocation, ChannelPlan};
use crate::qkd::{calibrate_insertion_loss, calibrate_misalignment, calibrate_operating_point, skr_pipeline};
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Noise,
    Skr,
    Plan,
    Curves,
    Dsp,
    Energy,
    Sweep,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Noise,
        Command::Skr,
        Command::Plan,
        Command::Curves,
        Command::Dsp,
        Command::Energy,
        Command::Sweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Noise => "noise",
            Command::Skr => "skr",
            Command::Plan => "plan",
            Command::Curves => "curves",
            Command::Dsp => "dsp",
            Command::Energy => "energy",
            Command::Sweep => "sweep",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown command `{s}`")))
    }
}

/// Applies the fits requested in the calibration section and records every knob in `meta`.
fn calibrate(s: &Scenario, meta: &mut ResultTable) -> Result<Scenario> {
    let mut s = s.clone();
    let fiber = s.fiber_spec()?;
    let cal = s.calibration.clone();
    if let Some(target) = cal.filter_target_dbm {
        let plan = with_data_power(&s.plan, cal.filter_launch_dbm);
        let fit = calibrate_filter_bandwidth(target, &plan, &fiber, &s.detector, cal.filter_min_nm, cal.filter_max_nm)
            .map_err(|e| e.in_stage("calibration.filter"))?;
        s.detector.filter_bw_nm = fit.filter_bw_nm;
        meta.meta("filter_target_dbm", target);
        meta.meta("filter_fit_total_dbm", fit.budget.p_total_dbm);
        meta.meta("filter_fit_clamped", fit.clamped);
    }
    let (l, plan) = (fiber.length_km, &s.plan);
    match (cal.target_skr_bps, cal.target_qber) {
        (Some(skr), Some(qber)) => {
            let op = calibrate_operating_point(
                skr,
                qber,
                cal.max_insertion_loss_db,
                l,
                plan,
                &fiber,
                &s.detector,
                &s.decoy,
            )
            .map_err(|e| e.in_stage("calibration.operating_point"))?;
            s.decoy.e_misalign = op.e_misalign;
            s.detector.insertion_loss_db = op.insertion_loss_db;
        }
        (Some(skr), None) => {
            s.detector.insertion_loss_db =
                calibrate_insertion_loss(skr, cal.max_insertion_loss_db, l, plan, &fiber, &s.detector, &s.decoy)?;
        }
        (None, Some(qber)) => {
            s.decoy.e_misalign = calibrate_misalignment(qber, l, plan, &fiber, &s.detector, &s.decoy)?;
        }
        (None, None) => {}
    }
    if let Some(t) = cal.target_skr_bps {
        meta.meta("target_skr_bps", t);
    }
    if let Some(t) = cal.target_qber {
        meta.meta("target_qber", t);
    }
    meta.meta("filter_bw_nm", s.detector.filter_bw_nm);
    meta.meta("insertion_loss_db", s.detector.insertion_loss_db);
    meta.meta("e_misalign", s.decoy.e_misalign);
    meta.meta("p_dc", s.detector.p_dc);
    Ok(s)
}

fn with_data_power(plan: &ChannelPlan, dbm: f64) -> ChannelPlan {
    let mut p = plan.clone();
    for c in p.carriers.iter_mut().filter(|c| c.role == CarrierRole::ClassicalSignal) {
        c.power_dbm = dbm;
    }
    p
}

/// Runs `command` on `scenario`. The result is a pure function of the scenario.
pub fn run_scenario(scenario: &Scenario, command: Command) -> Result<ResultTable> {
    run_with(scenario, command, None)
}

/// The `dsp` command with the constellation dump switched on; returns the summary and the dump.
pub fn run_dsp_with_constellation(scenario: &Scenario) -> Result<(ResultTable, ResultTable)> {
    let mut s = scenario.clone();
    s.dsp.get_or_insert_with(Default::default).receiver.dump_constellation = true;
    let mut report = None;
    let summary = run_with(&s, Command::Dsp, Some(&mut report))?;
    let report = report.expect("dsp run stores its report");
    let mut points = constellation_table(&report)?;
    points.metadata = summary.metadata.clone();
    Ok((summary, points))
}

fn run_with(scenario: &Scenario, command: Command, keep: Option<&mut Option<ChainReport>>) -> Result<ResultTable> {
    scenario.validate()?;
    let mut meta = ResultTable::default();
    meta.meta("tool", concat!("qsdci ", env!("CARGO_PKG_VERSION")));
    meta.meta("scenario", &scenario.name);
    meta.meta("command", command.name());
    meta.meta(
        "seed",
        scenario.seed.map_or_else(|| "none".to_string(), |s| s.to_string()),
    );
    let s = calibrate(scenario, &mut meta)?;
    let mut t = match command {
        Command::Noise => noise(&s),
        Command::Skr => skr(&s),
        Command::Plan => plan(&s),
        Command::Curves => curves(&s),
        Command::Dsp => dsp(&s).and_then(|r| {
            let t = dsp_table(&s, &r)?;
            if let Some(slot) = keep {
                *slot = Some(r);
            }
            Ok(t)
        }),
        Command::Energy => energy(&s),
        Command::Sweep => sweep(&s),
    }
    .map_err(|e| e.in_stage(command.name()))?;
    let mut merged = meta.metadata;
    for (k, v) in std::mem::take(&mut t.metadata) {
        match merged.iter_mut().find(|(mk, _)| *mk == k) {
            Some(slot) => slot.1 = v,
            None => merged.push((k, v)),
        }
    }
    t.metadata = merged;
    Ok(t)
}

fn noise(s: &Scenario) -> Result<ResultTable> {
    let fiber = s.fiber_spec()?;
    let opts = NoiseOptions {
        fwm_mode: s.noise.fwm_mode,
    };
    let mut t = ResultTable::new(&[
        "launch_dbm",
        "p_f_icsrs_w",
        "p_b_icsrs_w",
        "p_fwm_w",
        "p_total_w",
        "p_total_dbm",
        "icxt_ratio",
        "p_r_per_gate",
    ]);
    let launches: Vec<Option<f64>> = if s.noise.launch_dbm.is_empty() {
        vec![None]
    } else {
        s.noise.launch_dbm.iter().copied().map(Some).collect()
    };
    for launch in launches {
        let plan = launch.map_or_else(|| s.plan.clone(), |p| with_data_power(&s.plan, p));
        let b = total_noise_with(&plan, &fiber, &s.detector, &opts)?;
        t.push(vec![
            launch.map_or(Cell::Text(String::new()), Cell::Num),
            b.p_f_icsrs_w.into(),
            b.p_b_icsrs_w.into(),
            b.p_fwm_w.into(),
            b.p_total_w.into(),
            b.p_total_dbm.into(),
            b.icxt_ratio.into(),
            b.p_r_per_gate.into(),
        ])?;
    }
    t.meta("fwm_mode", format!("{:?}", s.noise.fwm_mode));
    Ok(t)
}

fn skr(s: &Scenario) -> Result<ResultTable> {
    let fiber = s.fiber_spec()?;
    let distances = if s.skr.distances_km.is_empty() {
        vec![fiber.length_km]
    } else {
        s.skr.distances_km.clone()
    };
    let mut t = ResultTable::new(&[
        "distance_km",
        "skr_bps",
        "qber",
        "p_r_per_gate",
        "n_z",
        "pulses",
        "duration_s",
        "s_z1_lower",
        "phi_z_upper",
        "clamped",
    ]);
    for d in distances {
        let r = skr_pipeline(d, &s.plan, &fiber, &s.detector, &s.decoy).map_err(|e| e.in_stage(format!("{d} km")))?;
        t.push(vec![
            d.into(),
            r.skr_bps().into(),
            r.qber().into(),
            r.noise.p_r_per_gate.into(),
            r.tally.n_z().into(),
            r.tally.pulses_sent.into(),
            r.tally.duration_s.into(),
            r.bounds.s_z1_lower.into(),
            r.bounds.phi_z_upper.into(),
            r.result.clamped.into(),
        ])?;
    }
    Ok(t)
}

fn plan(s: &Scenario) -> Result<ResultTable> {
    let fiber = s.fiber_spec()?;
    let best = optimize_allocation(&fiber, &s.detector, &s.decoy, &s.allocation.powers_dbm)?;
    let mut t = ResultTable::new(&[
        "quantum_core",
        "classical_cores",
        "skr_bps",
        "qber",
        "p_total_w",
        "p_r_per_gate",
    ]);
    let cores: Vec<String> = best.plan.classical().map(|c| c.core_index.to_string()).collect();
    t.push(vec![
        best.plan.quantum()?.core_index.into(),
        cores.join(";").into(),
        best.skr_bps.into(),
        best.qber.into(),
        best.budget.p_total_w.into(),
        best.budget.p_r_per_gate.into(),
    ])?;
    t.meta(
        "powers_dbm",
        s.allocation
            .powers_dbm
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(";"),
    );
    Ok(t)
}

fn curves(s: &Scenario) -> Result<ResultTable> {
    let fiber = s.fiber_spec()?;
    let c = &s.curves;
    let out = compare_sdm_dwdm(
        &fiber,
        &s.detector,
        &s.decoy,
        c.launch_dbm,
        &c.distances_km,
        &c.options(),
    )?;
    let mut t = ResultTable::new(&[
        "distance_km",
        "sdm_skr_bps",
        "sdm_adjacent_skr_bps",
        "dwdm_skr_bps",
        "sdm_qber",
        "dwdm_qber",
        "dwdm_saturated",
    ]);
    for ((a, b), w) in out.sdm.iter().zip(&out.sdm_adjacent).zip(&out.dwdm) {
        t.push(vec![
            a.distance_km.into(),
            a.skr_bps.into(),
            b.skr_bps.into(),
            w.skr_bps.into(),
            a.qber.into(),
            w.qber.into(),
            w.saturated.into(),
        ])?;
    }
    t.meta("launch_dbm", c.launch_dbm);
    t.meta("unfiltered_bw_nm", c.unfiltered_bw_nm);
    t.meta("dwdm_classical_nm", c.dwdm_classical_nm);
    t.meta("dwdm_alpha_c", c.dwdm_alpha_c);
    t.meta("sdm_quantum_core", out.sdm_plan.quantum()?.core_index);
    let cls: Vec<String> = out.sdm_plan.classical().map(|c| c.core_index.to_string()).collect();
    t.meta("sdm_classical_cores", cls.join(";"));
    Ok(t)
}

/// Runs the coherent receiver chain of the scenario's `dsp` section.
pub fn dsp(s: &Scenario) -> Result<ChainReport> {
    let seed = s
        .seed
        .ok_or_else(|| Error::Config("the dsp command needs a seed (scenario `seed` or --seed)".into()))?;
    let d = s.dsp.clone().unwrap_or_default();
    let frame = generate_frame(d.order, d.symbols, d.pilot_spacing, derive_seed(seed, "dsp.frame"))?;
    run_chain(
        &frame,
        &d.impairments,
        &d.receiver,
        derive_seed(seed, "dsp.impairments"),
    )
}

fn dsp_table(s: &Scenario, r: &ChainReport) -> Result<ResultTable> {
    let d = s.dsp.clone().unwrap_or_default();
    let mut t = ResultTable::new(&[
        "symbols",
        "bits",
        "bit_errors",
        "ber",
        "pre_fec_ok",
        "evm_percent",
        "estimated_ppm",
        "timing_residual_samples",
        "equalizer_dd_mse",
        "pilot_lock_x",
        "pilot_lock_y",
        "pilot_residual_rms_rad",
        "cycle_slip",
    ]);
    t.push(vec![
        d.symbols.into(),
        r.ber.bits.into(),
        r.ber.bit_errors.into(),
        r.ber.ber.into(),
        r.ber.pre_fec_ok.into(),
        r.ber.evm_percent.into(),
        r.timing.estimated_ppm.into(),
        r.timing.residual_std_samples.into(),
        r.equalizer_dd_mse.into(),
        r.ambiguity.lock[0].into(),
        r.ambiguity.lock[1].into(),
        r.phase.pilot_residual_rms.into(),
        r.phase.cycle_slip.into(),
    ])?;
    let imp = &d.impairments;
    t.meta("snr_db", imp.snr_db.map_or_else(|| "none".to_string(), format_number));
    t.meta("linewidth_hz", imp.linewidth_hz);
    t.meta("freq_offset_hz", imp.freq_offset_hz);
    t.meta("clock_offset_ppm", imp.clock_offset_ppm);
    t.meta("pol_rotation_rad", imp.pol_rotation_rad);
    t.meta("iq_skew_samples", imp.iq_skew_samples);
    for st in &r.stages {
        t.meta(
            &format!("power_{}", st.stage),
            format!("{};{}", format_number(st.power[0]), format_number(st.power[1])),
        );
    }
    Ok(t)
}

/// Constellation points of a chain run with `dump_constellation` set.
pub fn constellation_table(r: &ChainReport) -> Result<ResultTable> {
    let mut t = ResultTable::new(&["stage", "pol", "i", "q"]);
    for p in r.ber.constellation_dump.iter().flatten() {
        t.push(vec![p.stage.as_str().into(), p.pol.into(), p.i.into(), p.q.into()])?;
    }
    Ok(t)
}

fn energy(s: &Scenario) -> Result<ResultTable> {
    let e = s.energy.clone().unwrap_or_default();
    let tables: Vec<EnergyTable> = e
        .tables
        .iter()
        .flat_map(|t| e.lanes.iter().map(move |&l| t.with_lanes(l)))
        .collect();
    let c = scheme_comparison(&tables)?;
    let mut t = ResultTable::new(&["scheme", "capacity_gbps", "power_w", "slope_pj_per_bit"]);
    for p in &c.points {
        let fit = c
            .fits
            .iter()
            .find(|f| f.scheme_name == p.scheme_name)
            .expect("every point has a fit");
        t.push(vec![
            p.scheme_name.as_str().into(),
            p.capacity_gbps.into(),
            p.total_power_w.into(),
            fit.slope_pj_per_bit().into(),
        ])?;
    }
    t.meta("power_accounting", "tx+rx once per transported bit");
    for tab in &e.tables {
        t.meta(&format!("eta_conv_{}", tab.scheme_name), tab.eta_conv);
    }
    Ok(t)
}

fn sweep(s: &Scenario) -> Result<ResultTable> {
    let sw = s
        .sweep
        .clone()
        .ok_or_else(|| Error::Config("the sweep command needs a [sweep] section".into()))?;
    let inner: Command = sw.command.parse()?;
    if inner == Command::Sweep {
        return Err(Error::invalid("sweep.command", "sweeps do not nest"));
    }
    // Calibration already ran once on the base scenario; points reuse its result.
    let mut base = s.clone();
    base.sweep = None;
    base.calibration = Default::default();
    let results: Vec<ResultTable> = sw
        .values
        .par_iter()
        .map(|&v| {
            set_path(&base, &sw.path, v)
                .and_then(|point| run_scenario(&point, inner))
                .map_err(|e| e.in_stage(format!("{}={v}", sw.path)))
        })
        .collect::<Result<_>>()?;
    let first = &results[0];
    let mut cols: Vec<&str> = vec![sw.path.as_str()];
    cols.extend(first.columns.iter().map(String::as_str));
    let mut t = ResultTable::new(&cols);
    for (&v, r) in sw.values.iter().zip(&results) {
        for row in &r.rows {
            let mut cells = vec![Cell::Num(v)];
            cells.extend(row.iter().cloned());
            t.push(cells)?;
        }
    }
    t.meta("sweep_path", &sw.path);
    t.meta("sweep_command", inner.name());
    t.meta("sweep_points", sw.values.len());
    Ok(t)
}
