//! Run configuration documents.
//!
//! Configurations are TOML. Top-level keys are `verb`, `seed` and `output`;
//! everything else lives in named tables (blocks). Each verb requires some
//! blocks to be present, even if empty, and fills the optional blocks it uses
//! with defaults. Unknown keys are rejected.
//!
//! ```toml
//! verb = "transient"
//! seed = 1
//!
//! [emulator]          # r_coil, r_int, l_coil, v_pull_in, v_drop_out
//! r_int = 220.0
//!
//! [device]            # v_th_neg, v_hold_neg, t_actuate, jitter_sigma
//!
//! [circuit]
//! r1 = 680.0
//!
//! [source]
//! kind = "constant"
//! level = 5.0
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::SeriesCircuit;
use crate::device::{derive_device_params, DeviceParams, EmulatorParams, DEFAULT_T_ACTUATE};
use crate::error::Error as ModelError;
use crate::logic::{axis, LogicCircuit};
use crate::oscillation::DEFAULT_SETTLE_FRACTION;
use crate::waveform::SourceWaveform;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },

    #[error("verb `{verb}` requires block [{block}] (required blocks: {required})")]
    MissingBlock { verb: Verb, block: &'static str, required: String },

    #[error("config is for verb `{found}` but `{requested}` was requested")]
    VerbMismatch { found: Verb, requested: Verb },

    #[error("no verb given on the command line or in the config")]
    MissingVerb,
}

impl ConfigError {
    fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError::Invalid { key: key.into(), reason: reason.into() }
    }

    fn from_model(block: &str, e: ModelError) -> Self {
        match e {
            ModelError::InvalidParameter { name, reason } => ConfigError::invalid(format!("{block}.{name}"), reason),
            ModelError::NonFinite { name, value } => {
                ConfigError::invalid(format!("{block}.{name}"), format!("non-finite value {value}"))
            }
            other => ConfigError::invalid(block, other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verb {
    Iv,
    Transient,
    OscCheck,
    Gate,
    Map,
}

impl Verb {
    pub fn name(self) -> &'static str {
        match self {
            Verb::Iv => "iv",
            Verb::Transient => "transient",
            Verb::OscCheck => "osc-check",
            Verb::Gate => "gate",
            Verb::Map => "map",
        }
    }

    pub fn required_blocks(self) -> &'static [&'static str] {
        match self {
            Verb::Iv => &["emulator"],
            Verb::Transient => &["emulator", "circuit", "source"],
            Verb::OscCheck => &["emulator", "circuit"],
            Verb::Gate => &["emulator", "calc"],
            Verb::Map => &["emulator", "sweep"],
        }
    }

    fn optional_blocks(self) -> &'static [&'static str] {
        match self {
            Verb::Iv => &["device", "iv"],
            Verb::Transient => &["device", "transient", "comparator"],
            Verb::OscCheck => &["device", "osc_sweep"],
            Verb::Gate => &["device", "logic"],
            Verb::Map => &["device", "logic"],
        }
    }
}

impl fmt::Display for Verb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmulatorBlock {
    pub r_coil: f64,
    pub r_int: f64,
    pub l_coil: f64,
    pub v_pull_in: f64,
    pub v_drop_out: f64,
}

impl Default for EmulatorBlock {
    fn default() -> Self {
        let e = EmulatorParams::<f64>::default();
        Self { r_coil: e.r_coil, r_int: e.r_int, l_coil: e.l_coil, v_pull_in: e.v_pull_in, v_drop_out: e.v_drop_out }
    }
}

/// Overrides on top of the emulator-derived device parameters. Negative
/// thresholds default to the mirrored positive ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceBlock {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_th_neg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_hold_neg: Option<f64>,
    pub t_actuate: f64,
    pub jitter_sigma: f64,
}

impl Default for DeviceBlock {
    fn default() -> Self {
        Self { v_th_neg: None, v_hold_neg: None, t_actuate: DEFAULT_T_ACTUATE, jitter_sigma: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircuitBlock {
    pub r1: f64,
}

impl Default for CircuitBlock {
    fn default() -> Self {
        Self { r1: 680.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SourceBlock {
    Constant { level: f64 },
    Sawtooth { offset: f64, amplitude: f64, period: f64 },
    Triangle { offset: f64, amplitude: f64, period: f64 },
    Sine { offset: f64, amplitude: f64, period: f64 },
    /// `steps = [[t0, v0], [t1, v1], …]`
    Steps { steps: Vec<[f64; 2]> },
}

impl SourceBlock {
    pub fn waveform(&self) -> SourceWaveform<f64> {
        match *self {
            SourceBlock::Constant { level } => SourceWaveform::Constant { level },
            SourceBlock::Sawtooth { offset, amplitude, period } => SourceWaveform::Sawtooth { offset, amplitude, period },
            SourceBlock::Triangle { offset, amplitude, period } => SourceWaveform::Triangle { offset, amplitude, period },
            SourceBlock::Sine { offset, amplitude, period } => SourceWaveform::Sine { offset, amplitude, period },
            SourceBlock::Steps { ref steps } => SourceWaveform::Steps(steps.iter().map(|s| (s[0], s[1])).collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransientBlock {
    pub dt: f64,
    pub t_end: f64,
    pub settle_fraction: f64,
}

impl Default for TransientBlock {
    fn default() -> Self {
        Self { dt: 1e-4, t_end: 50e-3, settle_fraction: DEFAULT_SETTLE_FRACTION }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComparatorBlock {
    pub threshold: f64,
    pub high: f64,
    pub low: f64,
}

impl Default for ComparatorBlock {
    fn default() -> Self {
        Self { threshold: 2.5, high: 5.0, low: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    None,
    R1,
    ROn,
}

/// Optional closed-form sweep for `osc-check`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OscSweepBlock {
    pub parameter: SweepParameter,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Default for OscSweepBlock {
    fn default() -> Self {
        Self { parameter: SweepParameter::None, start: 100.0, stop: 2000.0, points: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogicBlock {
    pub r_common: f64,
    pub v_hold_level: f64,
}

impl Default for LogicBlock {
    fn default() -> Self {
        Self { r_common: 220.0, v_hold_level: 1.9 }
    }
}

/// Calculation-phase voltages for the `gate` verb.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalcBlock {
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
}

impl Default for CalcBlock {
    fn default() -> Self {
        Self { v1: 3.2, v2: 2.8, v3: -1.9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepBlock {
    pub v3: f64,
    pub v1_min: f64,
    pub v1_max: f64,
    pub v2_min: f64,
    pub v2_max: f64,
    pub step: f64,
}

impl Default for SweepBlock {
    fn default() -> Self {
        Self { v3: -1.9, v1_min: -1.0, v1_max: 6.0, v2_min: -1.0, v2_max: 6.0, step: 0.1 }
    }
}

impl SweepBlock {
    pub fn axes(&self) -> Result<(Vec<f64>, Vec<f64>), ConfigError> {
        let v1 = axis(self.v1_min, self.v1_max, self.step).map_err(|e| ConfigError::from_model("sweep", e))?;
        let v2 = axis(self.v2_min, self.v2_max, self.step).map_err(|e| ConfigError::from_model("sweep", e))?;
        Ok((v1, v2))
    }
}

/// Triangle sweep driven directly across one device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IvBlock {
    pub amplitude: f64,
    pub points: usize,
    pub cycles: usize,
    pub period: f64,
}

impl Default for IvBlock {
    fn default() -> Self {
        Self { amplitude: 4.0, points: 1601, cycles: 1, period: 1.0 }
    }
}

/// Raw document as written by the user.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    verb: Option<Verb>,
    seed: Option<u64>,
    output: Option<String>,
    emulator: Option<EmulatorBlock>,
    device: Option<DeviceBlock>,
    circuit: Option<CircuitBlock>,
    source: Option<SourceBlock>,
    transient: Option<TransientBlock>,
    comparator: Option<ComparatorBlock>,
    osc_sweep: Option<OscSweepBlock>,
    logic: Option<LogicBlock>,
    calc: Option<CalcBlock>,
    sweep: Option<SweepBlock>,
    iv: Option<IvBlock>,
}

/// Validated configuration for one verb, with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub verb: Verb,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub emulator: Option<EmulatorBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub device: Option<DeviceBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub circuit: Option<CircuitBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transient: Option<TransientBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparator: Option<ComparatorBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub osc_sweep: Option<OscSweepBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub logic: Option<LogicBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calc: Option<CalcBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iv: Option<IvBlock>,
}

/// Parses and validates a TOML configuration.
///
/// `verb` comes from the command line; when the document also names a verb
/// the two must agree.
pub fn load_config(document: &str, verb: Option<Verb>) -> Result<RunConfig, ConfigError> {
    let doc: Document = toml::from_str(document).map_err(|e| parse_error(document, &e))?;
    let verb = match (doc.verb, verb) {
        (Some(found), Some(requested)) if found != requested => {
            return Err(ConfigError::VerbMismatch { found, requested })
        }
        (Some(v), _) | (None, Some(v)) => v,
        (None, None) => return Err(ConfigError::MissingVerb),
    };

    let present = |name: &str| -> bool {
        match name {
            "emulator" => doc.emulator.is_some(),
            "circuit" => doc.circuit.is_some(),
            "source" => doc.source.is_some(),
            "calc" => doc.calc.is_some(),
            "sweep" => doc.sweep.is_some(),
            _ => false,
        }
    };
    if let Some(block) = verb.required_blocks().iter().find(|b| !present(b)) {
        return Err(ConfigError::MissingBlock { verb, block, required: verb.required_blocks().join(", ") });
    }

    let wants = |name: &str| verb.required_blocks().contains(&name) || verb.optional_blocks().contains(&name);

    let mut cfg = RunConfig {
        verb,
        seed: doc.seed.unwrap_or(0),
        output: doc.output,
        emulator: fill(wants("emulator"), doc.emulator),
        device: fill(wants("device"), doc.device),
        circuit: fill(wants("circuit"), doc.circuit),
        source: doc.source,
        transient: fill(wants("transient"), doc.transient),
        comparator: fill(wants("comparator"), doc.comparator),
        osc_sweep: fill(wants("osc_sweep"), doc.osc_sweep),
        logic: fill(wants("logic"), doc.logic),
        calc: fill(wants("calc"), doc.calc),
        sweep: fill(wants("sweep"), doc.sweep),
        iv: fill(wants("iv"), doc.iv),
    };

    // Resolve mirrored negative thresholds so the echoed config is explicit.
    if let (Some(e), Some(d)) = (&cfg.emulator, &mut cfg.device) {
        d.v_th_neg.get_or_insert(-e.v_pull_in);
        d.v_hold_neg.get_or_insert(-e.v_drop_out);
    }

    cfg.validate()?;
    Ok(cfg)
}

/// Default configuration for a verb, as if every required block were given
/// empty.
pub fn default_config(verb: Verb) -> RunConfig {
    let doc: String = verb.required_blocks().iter().map(|b| format!("[{b}]\n")).collect();
    // A bare [source] has no kind; use the oscillating 5 V constant.
    let doc = doc.replace("[source]\n", "[source]\nkind = \"constant\"\nlevel = 5.0\n");
    load_config(&doc, Some(verb)).expect("built-in defaults are valid")
}

fn fill<B: Default>(wanted: bool, block: Option<B>) -> Option<B> {
    if wanted {
        Some(block.unwrap_or_default())
    } else {
        block
    }
}

fn parse_error(document: &str, e: &toml::de::Error) -> ConfigError {
    let (line, column) = match e.span() {
        Some(span) => {
            let before = &document[..span.start.min(document.len())];
            let line = before.matches('\n').count() + 1;
            let column = before.len() - before.rfind('\n').map_or(0, |p| p + 1) + 1;
            (line, column)
        }
        None => (0, 0),
    };
    ConfigError::Parse { line, column, message: e.message().to_string() }
}

impl RunConfig {
    /// TOML form of the resolved configuration; loads back to an equal value.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn emulator_params(&self) -> EmulatorParams<f64> {
        let b = self.emulator.clone().unwrap_or_default();
        EmulatorParams { r_coil: b.r_coil, r_int: b.r_int, l_coil: b.l_coil, v_pull_in: b.v_pull_in, v_drop_out: b.v_drop_out }
    }

    pub fn device_params(&self) -> Result<DeviceParams<f64>, ConfigError> {
        let e = self.emulator_params();
        let mut p = derive_device_params(&e).map_err(|err| ConfigError::from_model("emulator", err))?;
        if let Some(d) = &self.device {
            p.t_actuate = d.t_actuate;
            p.jitter_sigma = d.jitter_sigma;
            if let Some(v) = d.v_th_neg {
                p.v_th_neg = v;
            }
            if let Some(v) = d.v_hold_neg {
                p.v_hold_neg = v;
            }
        }
        p.validate().map_err(|err| ConfigError::from_model("device", err))?;
        Ok(p)
    }

    pub fn series_circuit(&self) -> Result<SeriesCircuit<f64>, ConfigError> {
        let device = self.device_params()?;
        let r1 = self.circuit.clone().unwrap_or_default().r1;
        let source = self
            .source
            .as_ref()
            .map(SourceBlock::waveform)
            .unwrap_or(SourceWaveform::Constant { level: 0.0 });
        let c = SeriesCircuit { r1, device, source };
        c.validate().map_err(|err| {
            let block = match &err {
                ModelError::InvalidParameter { name: "r1", .. } => "circuit",
                _ => "source",
            };
            ConfigError::from_model(block, err)
        })?;
        Ok(c)
    }

    pub fn logic_circuit(&self) -> Result<LogicCircuit<f64>, ConfigError> {
        let d = self.device_params()?;
        let b = self.logic.clone().unwrap_or_default();
        let c = LogicCircuit { m1: d, m2: d, r_common: b.r_common, v_hold_level: b.v_hold_level };
        c.validate().map_err(|err| ConfigError::from_model("logic", err))?;
        Ok(c)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        // TOML integers are signed 64-bit.
        if i64::try_from(self.seed).is_err() {
            return Err(ConfigError::invalid("seed", "must not exceed i64::MAX"));
        }
        if self.emulator.is_some() {
            self.emulator_params().validate().map_err(|e| ConfigError::from_model("emulator", e))?;
        }
        if self.device.is_some() {
            self.device_params()?;
        }
        match self.verb {
            Verb::Iv => {
                let iv = self.iv.as_ref().expect("filled");
                if !(iv.amplitude >= 0.0 && iv.amplitude.is_finite()) {
                    return Err(ConfigError::invalid("iv.amplitude", "must be finite and non-negative"));
                }
                if iv.points < 2 {
                    return Err(ConfigError::invalid("iv.points", "need at least 2 points per cycle"));
                }
                if iv.cycles == 0 {
                    return Err(ConfigError::invalid("iv.cycles", "must be at least 1"));
                }
                if !(iv.period > 0.0 && iv.period.is_finite()) {
                    return Err(ConfigError::invalid("iv.period", "must be positive"));
                }
            }
            Verb::Transient => {
                self.series_circuit()?;
                let t = self.transient.as_ref().expect("filled");
                if !(t.dt > 0.0 && t.dt.is_finite()) {
                    return Err(ConfigError::invalid("transient.dt", "must be positive"));
                }
                if !(t.t_end >= t.dt && t.t_end.is_finite()) {
                    return Err(ConfigError::invalid("transient.t_end", "must be at least dt"));
                }
                if !(0.0..1.0).contains(&t.settle_fraction) {
                    return Err(ConfigError::invalid("transient.settle_fraction", "must lie in [0, 1)"));
                }
                let c = self.comparator.as_ref().expect("filled");
                for (key, v) in [("comparator.threshold", c.threshold), ("comparator.high", c.high), ("comparator.low", c.low)] {
                    if !v.is_finite() {
                        return Err(ConfigError::invalid(key, "must be finite"));
                    }
                }
            }
            Verb::OscCheck => {
                self.series_circuit()?;
                let s = self.osc_sweep.as_ref().expect("filled");
                if s.parameter != SweepParameter::None {
                    if s.points < 2 {
                        return Err(ConfigError::invalid("osc_sweep.points", "need at least 2 points"));
                    }
                    if !(s.start > 0.0 && s.stop > s.start && s.stop.is_finite()) {
                        return Err(ConfigError::invalid("osc_sweep.stop", "need 0 < start < stop"));
                    }
                }
            }
            Verb::Gate => {
                self.logic_circuit()?;
                let c = self.calc.as_ref().expect("filled");
                for (key, v) in [("calc.v1", c.v1), ("calc.v2", c.v2), ("calc.v3", c.v3)] {
                    if !v.is_finite() {
                        return Err(ConfigError::invalid(key, "must be finite"));
                    }
                }
            }
            Verb::Map => {
                self.logic_circuit()?;
                let s = self.sweep.as_ref().expect("filled");
                if !s.v3.is_finite() {
                    return Err(ConfigError::invalid("sweep.v3", "must be finite"));
                }
                s.axes()?;
            }
        }
        Ok(())
    }
}
