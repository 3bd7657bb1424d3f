//! Closed-form relaxation-oscillation analysis of the series circuit and
//! oscillation detection in simulated traces.
//!
//! At the onset of switching the OFF device sees exactly `v_th_pos`, which
//! fixes the applied voltage. Switching ON then drops the device voltage
//! through the divider; if that drop lands below `v_hold_pos`, neither state
//! is stable and the circuit oscillates.

use crate::circuit::Trace;
use crate::device::DeviceParams;
use crate::scalar::Scalar;

/// Default fraction of a trace discarded before counting transitions.
pub const DEFAULT_SETTLE_FRACTION: f64 = 0.2;

/// Minimum conducting-state transitions in the analysis window to call a
/// trace oscillating.
pub const MIN_TRANSITIONS: usize = 4;

/// Applied voltage at which the OFF device reaches `v_th_pos`:
/// `(r1 + r_off) / r_off · v_th_pos`.
pub fn onset_voltage<T: Scalar>(d: &DeviceParams<T>, r1: T) -> T {
    (r1 + d.r_off) / d.r_off * d.v_th_pos
}

/// Device voltage right after switching ON at the onset voltage:
/// `r_on (r1 + r_off) / (r_off (r1 + r_on)) · v_th_pos`.
pub fn post_switch_voltage<T: Scalar>(d: &DeviceParams<T>, r1: T) -> T {
    d.r_on * (r1 + d.r_off) / (d.r_off * (r1 + d.r_on)) * d.v_th_pos
}

/// Necessary condition for self-sustained oscillation (positive polarity):
/// the post-switch voltage falls strictly below `v_hold_pos`.
pub fn is_unstable<T: Scalar>(d: &DeviceParams<T>, r1: T) -> bool {
    post_switch_voltage(d, r1) < d.v_hold_pos
}

/// Summary of the switching activity of a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillationReport<T> {
    pub oscillating: bool,
    pub frequency_estimate: Option<T>,
    pub duty_cycle: Option<T>,
    pub transition_count: usize,
}

/// Counts conducting-state transitions after discarding the first
/// `settle_fraction` of samples.
///
/// The window length is the number of sample intervals in the window times
/// `dt`; frequency is `transitions / (2 · window)` and duty is the fraction
/// of ON samples. Out-of-range `settle_fraction` is clamped to `[0, 1)`.
pub fn detect_oscillation<T: Scalar>(tr: &Trace<T>, settle_fraction: f64) -> OscillationReport<T> {
    let n = tr.len();
    let settle = if settle_fraction.is_finite() { settle_fraction.clamp(0.0, 1.0 - f64::EPSILON) } else { 0.0 };
    let start = ((n as f64) * settle).floor() as usize;
    let window = &tr.conducting[start.min(n)..];
    let transition_count = window.windows(2).filter(|w| w[0] != w[1]).count();
    let oscillating = transition_count >= MIN_TRANSITIONS;
    if !oscillating {
        return OscillationReport { oscillating, frequency_estimate: None, duty_cycle: None, transition_count };
    }
    let intervals = T::from_usize(window.len() - 1).expect("length fits scalar");
    let duration = intervals * tr.dt;
    let frequency = T::from_usize(transition_count).expect("count fits scalar") / (T::lit(2.0) * duration);
    let on = window.iter().filter(|&&c| c).count();
    let duty = T::from_usize(on).expect("count fits scalar") / T::from_usize(window.len()).expect("len fits scalar");
    OscillationReport {
        oscillating,
        frequency_estimate: Some(frequency),
        duty_cycle: Some(duty),
        transition_count,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{run_transient, SeriesCircuit};
    use crate::device::{derive_device_params, EmulatorParams};
    use crate::waveform::SourceWaveform;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn device(r_int: f64) -> DeviceParams<f64> {
        derive_device_params(&EmulatorParams { r_int, ..EmulatorParams::default() }).unwrap()
    }

    #[test]
    fn onset_examples() {
        let d = DeviceParams::<f64>::default();
        assert_relative_eq!(onset_voltage(&d, 680.0), 4.693_333_333, epsilon = 1e-9);
        assert_eq!(onset_voltage(&d, 0.0), d.v_th_pos);
        assert_relative_eq!(onset_voltage(&d, 600.0), 4.4, epsilon = 1e-12);
    }

    #[test]
    fn instability_examples() {
        let fig2 = device(220.0);
        assert_relative_eq!(post_switch_voltage(&fig2, 680.0), 0.898_375_870, epsilon = 1e-8);
        assert!(is_unstable(&fig2, 680.0));

        let equal = DeviceParams { r_on: 600.0, ..fig2 };
        assert_relative_eq!(post_switch_voltage(&equal, 680.0), 2.2, epsilon = 1e-12);
        assert!(!is_unstable(&equal, 680.0));

        let logic = DeviceParams::<f64>::default();
        assert_relative_eq!(post_switch_voltage(&logic, 220.0), 1.778_886_311, epsilon = 1e-8);
        assert!(!is_unstable(&logic, 220.0));
    }

    fn square_trace(period_samples: usize, n: usize, dt: f64) -> Trace<f64> {
        let mut tr = Trace::with_capacity(dt, n);
        for k in 0..n {
            let on = (k / (period_samples / 2)).is_multiple_of(2);
            tr.push(k as f64 * dt, 1.0, 1.0, on, 0.0);
        }
        tr
    }

    #[test]
    fn constant_trace_is_quiet() {
        let mut tr = Trace::with_capacity(1e-4, 100);
        for k in 0..100 {
            tr.push(k as f64 * 1e-4, 1.0, 0.5, false, 0.0);
        }
        let r = detect_oscillation(&tr, 0.2);
        assert!(!r.oscillating);
        assert_eq!(r.transition_count, 0);
        assert!(r.frequency_estimate.is_none() && r.duty_cycle.is_none());
    }

    #[test]
    fn square_wave_frequency_and_duty() {
        // 2 ms period sampled at 0.1 ms over 20 ms.
        let tr = square_trace(20, 201, 1e-4);
        let r = detect_oscillation(&tr, 0.0);
        assert!(r.oscillating);
        assert_eq!(r.transition_count, 20);
        assert_relative_eq!(r.frequency_estimate.unwrap(), 500.0, epsilon = 1e-9);
        assert_relative_eq!(r.duty_cycle.unwrap(), 0.5, epsilon = 0.01);
    }

    #[test]
    fn five_volt_fig2_circuit_oscillates() {
        let c = SeriesCircuit { r1: 680.0, device: device(220.0), source: SourceWaveform::Constant { level: 5.0 } };
        let tr = run_transient(&c, 1e-4, 50e-3, 0).unwrap();
        let r = detect_oscillation(&tr, DEFAULT_SETTLE_FRACTION);
        assert!(r.oscillating);
        let duty = r.duty_cycle.unwrap();
        assert!((0.0..=1.0).contains(&duty));
    }

    proptest! {
        #[test]
        fn onset_increases_with_r1(a in 0.0f64..1e4, b in 0.0f64..1e4) {
            prop_assume!(a < b);
            let d = DeviceParams::<f64>::default();
            prop_assert!(onset_voltage(&d, a) < onset_voltage(&d, b));
        }

        #[test]
        fn lowering_r_on_never_stabilizes(r_on_hi in 1.0f64..599.0, frac in 0.01f64..1.0, r1 in 1.0f64..5000.0) {
            let hi = DeviceParams { r_on: r_on_hi, ..DeviceParams::<f64>::default() };
            let lo = DeviceParams { r_on: r_on_hi * frac, ..hi };
            if is_unstable(&hi, r1) {
                prop_assert!(is_unstable(&lo, r1));
            }
        }

        #[test]
        fn duty_in_unit_interval(bits in proptest::collection::vec(any::<bool>(), 2..300)) {
            let mut tr = Trace::with_capacity(1e-4, bits.len());
            for (k, &b) in bits.iter().enumerate() {
                tr.push(k as f64 * 1e-4, 1.0, 1.0, b, 0.0);
            }
            let r = detect_oscillation(&tr, 0.2);
            prop_assert_eq!(r.oscillating, r.frequency_estimate.is_some());
            prop_assert_eq!(r.oscillating, r.duty_cycle.is_some());
            if let Some(d) = r.duty_cycle {
                prop_assert!((0.0..=1.0).contains(&d));
            }
        }
    }
}
