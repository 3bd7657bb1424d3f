use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::config::{ConfigError, RunConfig, SweepParameter, Verb};
use crate::circuit::{digitize, run_transient, sig9};
use crate::device::{step_device, DeviceState};
use crate::error::Error as ModelError;
use crate::logic::{evaluate_gate, sweep_map, PhaseProgram, Register, INPUT_PAIRS};
use crate::oscillation::{detect_oscillation, onset_voltage, post_switch_voltage};
use crate::waveform::SourceWaveform;

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl CommandError {
    /// 2 for configuration problems, 3 for numerical guard violations.
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Model(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

/// Output of one verb: `data` is the CSV document destined for the output
/// file, `console` is extra text for standard output (heatmaps).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerbOutput {
    pub data: String,
    pub console: String,
}

pub fn run_verb(cfg: &RunConfig) -> Result<VerbOutput, CommandError> {
    match cfg.verb {
        Verb::Iv => Ok(plain(run_iv_sweep(cfg)?)),
        Verb::Transient => Ok(plain(run_transient_verb(cfg)?)),
        Verb::OscCheck => Ok(plain(run_osc_check(cfg)?)),
        Verb::Gate => Ok(plain(run_gate(cfg)?)),
        Verb::Map => run_map(cfg),
    }
}

fn plain(data: String) -> VerbOutput {
    VerbOutput { data, console: String::new() }
}

/// Reproducibility header: verb, seed and the full resolved configuration
/// as `#` comments. The output path is left out so that the same run written
/// to different files stays byte-identical.
fn header(cfg: &RunConfig) -> String {
    let mut out = format!("# volmem {} {}\n", env!("CARGO_PKG_VERSION"), cfg.verb);
    let echoed = RunConfig { output: None, ..cfg.clone() };
    for line in echoed.to_toml().lines() {
        if line.is_empty() {
            out.push_str("#\n");
        } else {
            let _ = writeln!(out, "# {line}");
        }
    }
    out
}

/// Triangle sweep across a single device with no series resistor; rows
/// `v,i,conducting` after each sample's state update.
pub fn run_iv_sweep(cfg: &RunConfig) -> Result<String, CommandError> {
    let device = cfg.device_params()?;
    let iv = cfg.iv.clone().unwrap_or_default();
    let wave = SourceWaveform::Triangle { offset: 0.0, amplitude: iv.amplitude, period: iv.period };
    let intervals = iv.points - 1;
    let dt = iv.period / intervals as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = DeviceState::off();

    let mut out = header(cfg);
    out.push_str("v,i,conducting\n");
    for k in 0..=intervals * iv.cycles {
        let v = wave.value_at(k as f64 * dt);
        state = step_device(&device, &state, v, dt, &mut rng)?;
        let i = v / device.resistance(state.conducting);
        let _ = writeln!(out, "{},{},{}", sig9(v), sig9(i), u8::from(state.conducting));
    }
    Ok(out)
}

/// Series-circuit transient with comparator column and an oscillation summary.
pub fn run_transient_verb(cfg: &RunConfig) -> Result<String, CommandError> {
    let circuit = cfg.series_circuit()?;
    let t = cfg.transient.clone().unwrap_or_default();
    let cmp = cfg.comparator.clone().unwrap_or_default();
    let trace = run_transient(&circuit, t.dt, t.t_end, cfg.seed)?;
    let logic = digitize(&trace, cmp.threshold, cmp.high, cmp.low);
    let report = detect_oscillation(&trace, t.settle_fraction);

    let mut out = header(cfg);
    let _ = writeln!(
        out,
        "# oscillating = {}, transitions = {}, frequency_hz = {}, duty_cycle = {}",
        report.oscillating,
        report.transition_count,
        report.frequency_estimate.map_or("none".to_string(), sig9),
        report.duty_cycle.map_or("none".to_string(), sig9),
    );
    out.push_str(&trace.to_csv(Some(&logic)));
    Ok(out)
}

/// Closed-form onset voltage and instability verdict, optionally swept over
/// `r1` or `r_on`.
pub fn run_osc_check(cfg: &RunConfig) -> Result<String, CommandError> {
    let circuit = cfg.series_circuit()?;
    let emulator = cfg.emulator_params();
    let sweep = cfg.osc_sweep.clone().unwrap_or_default();

    let mut out = header(cfg);
    let _ = writeln!(
        out,
        "# transition_frequency_hz = {}",
        sig9(emulator.transition_frequency()?)
    );
    out.push_str("r1,r_on,r_off,onset_voltage,post_switch_voltage,v_hold,unstable\n");
    let mut row = |r1: f64, r_on: f64| {
        let d = crate::device::DeviceParams { r_on, ..circuit.device };
        let post = post_switch_voltage(&d, r1);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            sig9(r1),
            sig9(r_on),
            sig9(d.r_off),
            sig9(onset_voltage(&d, r1)),
            sig9(post),
            sig9(d.v_hold_pos),
            post < d.v_hold_pos,
        );
    };
    row(circuit.r1, circuit.device.r_on);
    if sweep.parameter != SweepParameter::None {
        let span = sweep.stop - sweep.start;
        for k in 0..sweep.points {
            let x = sweep.start + span * k as f64 / (sweep.points - 1) as f64;
            match sweep.parameter {
                SweepParameter::R1 => row(x, circuit.device.r_on),
                SweepParameter::ROn => row(circuit.r1, x),
                SweepParameter::None => unreachable!(),
            }
        }
    }
    Ok(out)
}

/// Truth table of one operation for all four input pairs plus both codes.
pub fn run_gate(cfg: &RunConfig) -> Result<String, CommandError> {
    let circuit = cfg.logic_circuit()?;
    let calc = cfg.calc.clone().unwrap_or_default();
    let prog = PhaseProgram::canonical(circuit.v_hold_level, calc.v1, calc.v2, calc.v3);
    let result = evaluate_gate(&circuit, &prog)?;

    let mut out = header(cfg);
    out.push_str("a,b,m1,m2\n");
    for (k, (a, b)) in INPUT_PAIRS.iter().enumerate() {
        let (s1, s2) = result.finals[k];
        let _ = writeln!(out, "{},{},{},{}", u8::from(*a), u8::from(*b), u8::from(s1), u8::from(s2));
    }
    let _ = writeln!(
        out,
        "# code_m1 = {}, label_m1 = {}, code_m2 = {}, label_m2 = {}, oscillated = {}",
        result.export_code(Register::M1),
        result.export_label(Register::M1),
        result.export_code(Register::M2),
        result.export_label(Register::M2),
        result.oscillated,
    );
    Ok(out)
}

/// Gate map over the configured `(V1, V2)` grid, CSV plus ASCII heatmaps.
pub fn run_map(cfg: &RunConfig) -> Result<VerbOutput, CommandError> {
    let circuit = cfg.logic_circuit()?;
    let sweep = cfg.sweep.clone().unwrap_or_default();
    let (v1_axis, v2_axis) = sweep.axes()?;
    let map = sweep_map(&circuit, sweep.v3, &v1_axis, &v2_axis)?;

    let mut data = header(cfg);
    let _ = writeln!(data, "# grid = {}x{}", v1_axis.len(), v2_axis.len());
    data.push_str(&map.to_csv());

    let mut console = map.heatmap(Register::M1);
    console.push('\n');
    console.push_str(&map.heatmap(Register::M2));
    Ok(VerbOutput { data, console })
}
