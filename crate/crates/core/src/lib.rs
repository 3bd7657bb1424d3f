//! Volatile memristor circuit simulator.
//!
//! Models a two-state threshold-switching memristor built from a reed relay,
//! the series resistor–memristor circuit with its relaxation oscillations, and
//! a two-memristor implication logic circuit whose realized Boolean function
//! is classified over sweeps of the driving voltages.
//!
//! Models are generic over [`Scalar`] (`f32` or `f64`); the aliases below fix
//! the double-precision variants used by the command-line tool.

pub mod circuit;
pub mod cli;
pub mod device;
pub mod error;
pub mod logic;
pub mod oscillation;
pub mod scalar;
pub mod waveform;

pub use circuit::{digitize, run_transient, solve_series_divider, SeriesCircuit, Trace};
pub use device::{
    derive_device_params, device_resistance, step_device, DeviceParams, DeviceState, EmulatorParams, Pending,
};
pub use error::{Error, Result};
pub use logic::{
    classify, evaluate_gate, gate_code, relax, run_sequence, solve_node, sweep_map, Gate, GateMap, GateResult,
    LogicCircuit, PhaseProgram, Register,
};
pub use oscillation::{detect_oscillation, is_unstable, onset_voltage, post_switch_voltage, OscillationReport};
pub use scalar::Scalar;
pub use waveform::SourceWaveform;

pub type EmulatorParamsF64 = EmulatorParams<f64>;
pub type DeviceParamsF64 = DeviceParams<f64>;
pub type DeviceStateF64 = DeviceState<f64>;
pub type SeriesCircuitF64 = SeriesCircuit<f64>;
pub type TraceF64 = Trace<f64>;
pub type LogicCircuitF64 = LogicCircuit<f64>;
pub type GateMapF64 = GateMap<f64>;

pub type EmulatorParamsF32 = EmulatorParams<f32>;
pub type DeviceParamsF32 = DeviceParams<f32>;
pub type SeriesCircuitF32 = SeriesCircuit<f32>;
pub type LogicCircuitF32 = LogicCircuit<f32>;
