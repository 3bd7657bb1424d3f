use volmem::{derive_device_params, detect_oscillation, run_transient, EmulatorParamsF64, SeriesCircuitF64, SourceWaveform};

fn main() -> volmem::Result<()> {
    let device = derive_device_params(&EmulatorParamsF64::default())?;
    let circuit = SeriesCircuitF64 { r1: 680.0, device, source: SourceWaveform::Constant { level: 5.0 } };
    let trace = run_transient(&circuit, 1e-4, 50e-3, 0)?;
    let report = detect_oscillation(&trace, 0.2);
    println!("oscillating: {}, f = {:?} Hz", report.oscillating, report.frequency_estimate);
    Ok(())
}
