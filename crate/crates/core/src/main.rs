use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use volmem::cli::{default_config, load_config, run_verb, RunConfig, Verb};

/// Volatile memristor circuit simulator.
#[derive(Parser, Debug)]
#[command(name = "volmem", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Current-voltage hysteresis loop of a single device.
    Iv(Common),
    /// Fixed-step transient of the series resistor-memristor circuit.
    Transient(Common),
    /// Closed-form oscillation onset and instability check.
    OscCheck(Common),
    /// Truth table and gate codes of one logic operation.
    Gate(Common),
    /// Gate-type map over a (V1, V2) grid.
    Map(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// TOML configuration; built-in defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for threshold jitter; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for `map` (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

fn resolve(verb: Verb, common: &Common) -> Result<RunConfig, (i32, String)> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| (2, format!("cannot read {}: {e}", path.display())))?;
            load_config(&text, Some(verb)).map_err(|e| (2, e.to_string()))?
        }
        None => default_config(verb),
    };
    if let Some(seed) = common.seed {
        if i64::try_from(seed).is_err() {
            return Err((2, "invalid value for `seed`: must not exceed i64::MAX".into()));
        }
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output = Some(out.display().to_string());
    }
    Ok(cfg)
}

fn run(verb: Verb, common: Common) -> Result<(), (i32, String)> {
    let cfg = resolve(verb, &common)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.jobs)
        .build()
        .map_err(|e| (1, format!("cannot start worker pool: {e}")))?;
    let output = pool.install(|| run_verb(&cfg)).map_err(|e| (e.exit_code(), e.to_string()))?;

    let stdout = io::stdout();
    let mut stdout = stdout.lock();
    let io_err = |e: io::Error| (1, e.to_string());
    match &cfg.output {
        Some(path) => fs::write(path, &output.data).map_err(|e| (1, format!("cannot write {path}: {e}")))?,
        None => stdout.write_all(output.data.as_bytes()).map_err(io_err)?,
    }
    stdout.write_all(output.console.as_bytes()).map_err(io_err)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (verb, common) = match cli.command {
        Command::Iv(c) => (Verb::Iv, c),
        Command::Transient(c) => (Verb::Transient, c),
        Command::OscCheck(c) => (Verb::OscCheck, c),
        Command::Gate(c) => (Verb::Gate, c),
        Command::Map(c) => (Verb::Map, c),
    };
    match run(verb, common) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("volmem: {msg}");
            ExitCode::from(code as u8)
        }
    }
}
