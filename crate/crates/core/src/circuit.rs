//! Series resistor–memristor circuit: divider solve, fixed-step transient and
//! comparator digitization.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::device::{finite, step_device, DeviceParams, DeviceState};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::waveform::SourceWaveform;

/// Source → `r1` → memristor → ground.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesCircuit<T> {
    pub r1: T,
    pub device: DeviceParams<T>,
    pub source: SourceWaveform<T>,
}

impl<T: Scalar> SeriesCircuit<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.r1 >= T::zero()) || !self.r1.is_finite() {
            return Err(Error::invalid("r1", format!("must be finite and non-negative, got {}", self.r1)));
        }
        self.device.validate()?;
        self.source.validate()
    }
}

/// Voltage across the memristor and loop current for a resistive divider.
pub fn solve_series_divider<T: Scalar>(r1: T, r_m: T, v: T) -> Result<(T, T)> {
    let total = r1 + r_m;
    if total == T::zero() {
        return Err(Error::invalid("r1 + r_m", "divider has zero total resistance"));
    }
    let current = v / total;
    let v_device = v * r_m / total;
    finite("v_device", v_device)?;
    finite("current", current)?;
    Ok((v_device, current))
}

/// Uniformly sampled transient waveforms.
///
/// Each sample holds the electrical solution for the state the device was in
/// when the sample was taken; a switch decided during sample `k` shows up in
/// sample `k + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace<T> {
    pub dt: T,
    pub t: Vec<T>,
    pub v_applied: Vec<T>,
    pub v_device: Vec<T>,
    pub v_out: Vec<T>,
    pub conducting: Vec<bool>,
    pub current: Vec<T>,
}

impl<T: Scalar> Trace<T> {
    pub fn with_capacity(dt: T, n: usize) -> Self {
        Self {
            dt,
            t: Vec::with_capacity(n),
            v_applied: Vec::with_capacity(n),
            v_device: Vec::with_capacity(n),
            v_out: Vec::with_capacity(n),
            conducting: Vec::with_capacity(n),
            current: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn push(&mut self, t: T, v_applied: T, v_device: T, conducting: bool, current: T) {
        self.t.push(t);
        self.v_applied.push(v_applied);
        self.v_device.push(v_device);
        self.v_out.push(v_device);
        self.conducting.push(conducting);
        self.current.push(current);
    }

    /// CSV with header `t,v_applied,v_device,v_out,conducting,current` and
    /// an optional extra `logic` column. Numbers carry 9 significant digits.
    pub fn to_csv(&self, logic: Option<&[T]>) -> String {
        let mut out = String::with_capacity(self.len() * 96);
        out.push_str("t,v_applied,v_device,v_out,conducting,current");
        if logic.is_some() {
            out.push_str(",logic");
        }
        out.push('\n');
        for k in 0..self.len() {
            let _ = write!(
                out,
                "{},{},{},{},{},{}",
                sig9(self.t[k]),
                sig9(self.v_applied[k]),
                sig9(self.v_device[k]),
                sig9(self.v_out[k]),
                u8::from(self.conducting[k]),
                sig9(self.current[k]),
            );
            if let Some(levels) = logic {
                let _ = write!(out, ",{}", sig9(levels[k]));
            }
            out.push('\n');
        }
        out
    }
}

/// Formats with 9 significant digits in scientific notation.
pub fn sig9<T: Scalar>(x: T) -> String {
    format!("{:.8e}", x)
}

/// Fixed-step transient of a series circuit starting from the OFF state.
///
/// `seed` feeds the threshold jitter; with zero jitter the result does not
/// depend on it.
pub fn run_transient<T: Scalar>(c: &SeriesCircuit<T>, dt: T, t_end: T, seed: u64) -> Result<Trace<T>> {
    c.validate()?;
    finite("dt", dt)?;
    finite("t_end", t_end)?;
    if !(dt > T::zero()) || dt > t_end {
        return Err(Error::invalid("dt", format!("need 0 < dt <= t_end, got dt={dt}, t_end={t_end}")));
    }
    let t_actuate = c.device.t_actuate;
    if t_actuate > T::zero() && dt > t_actuate / T::lit(4.0) {
        return Err(Error::ResolutionGuard { dt: dt.as_f64(), limit: (t_actuate / T::lit(4.0)).as_f64() });
    }

    // Tolerate t_end/dt landing a hair below an integer.
    let steps = (t_end / dt + T::lit(1e-9)).floor().to_usize().unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trace = Trace::with_capacity(dt, steps + 1);
    let mut state = DeviceState::off();
    for k in 0..=steps {
        let t = T::from_usize(k).expect("step index fits scalar") * dt;
        let v = c.source.value_at(t);
        finite("v_applied", v)?;
        let (v_device, current) = solve_series_divider(c.r1, c.device.resistance(state.conducting), v)?;
        trace.push(t, v, v_device, state.conducting, current);
        state = step_device(&c.device, &state, v_device, dt, &mut rng)?;
    }
    Ok(trace)
}

/// Ideal comparator on `v_out`: `high` strictly above `threshold`, else `low`.
pub fn digitize<T: Scalar>(tr: &Trace<T>, threshold: T, high: T, low: T) -> Vec<T> {
    tr.v_out.iter().map(|&v| if v > threshold { high } else { low }).collect()
}
