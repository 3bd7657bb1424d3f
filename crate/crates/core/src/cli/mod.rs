//! Batch command-line front end: configuration documents and the five verbs.

mod commands;
mod config;

pub use commands::{
    run_gate, run_iv_sweep, run_map, run_osc_check, run_transient_verb, run_verb, CommandError, VerbOutput,
};
pub use config::{
    default_config, load_config, CalcBlock, CircuitBlock, ComparatorBlock, ConfigError, DeviceBlock, EmulatorBlock,
    IvBlock, LogicBlock, OscSweepBlock, RunConfig, SourceBlock, SweepBlock, SweepParameter, TransientBlock, Verb,
};
