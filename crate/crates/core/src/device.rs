//! Two-state volatile memristor and the reed-relay emulator it is built from.
//!
//! A volatile memristor has a high-resistance OFF state and a low-resistance
//! ON state. It switches ON when the device voltage leaves the window
//! `(v_th_neg, v_th_pos)` and back OFF when the voltage falls inside
//! `(v_hold_neg, v_hold_pos)`. Between the two windows the device remembers
//! its state, which is the bistable region used for storage.
//!
//! The emulator is a relay coil in parallel with a series reed switch and
//! resistor: OFF resistance is the coil resistance, ON resistance is the coil
//! in parallel with the internal resistor.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default relay actuation latency, seconds.
pub const DEFAULT_T_ACTUATE: f64 = 0.5e-3;

/// Components of a relay-based volatile memristor emulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmulatorParams<T> {
    /// Coil resistance, ohms.
    pub r_coil: T,
    /// Resistor in series with the reed switch, ohms.
    pub r_int: T,
    /// Coil inductance, henries.
    pub l_coil: T,
    /// Coil voltage at which the reed closes, volts.
    pub v_pull_in: T,
    /// Coil voltage at which the reed opens again, volts.
    pub v_drop_out: T,
}

impl<T: Scalar> Default for EmulatorParams<T> {
    /// 600 Ω / 0.17 H reed relay with a 680 Ω internal resistor,
    /// pull-in 2.2 V and drop-out 1.6 V.
    fn default() -> Self {
        Self {
            r_coil: T::lit(600.0),
            r_int: T::lit(680.0),
            l_coil: T::lit(0.17),
            v_pull_in: T::lit(2.2),
            v_drop_out: T::lit(1.6),
        }
    }
}

impl<T: Scalar> EmulatorParams<T> {
    pub fn validate(&self) -> Result<()> {
        positive("r_coil", self.r_coil)?;
        positive("r_int", self.r_int)?;
        positive("l_coil", self.l_coil)?;
        positive("v_pull_in", self.v_pull_in)?;
        positive("v_drop_out", self.v_drop_out)?;
        if self.v_drop_out >= self.v_pull_in {
            return Err(Error::invalid(
                "v_drop_out",
                format!("must be below v_pull_in ({} >= {})", self.v_drop_out, self.v_pull_in),
            ));
        }
        Ok(())
    }

    /// Magnitude of the coil impedance `sqrt(R² + (ωL)²)` at `freq` hertz.
    ///
    /// Uses the coil's own resistance, which is what reproduces the measured
    /// ~560 Hz transition frequency for a 600 Ω / 0.17 H coil.
    pub fn coil_impedance(&self, freq: T) -> Result<T> {
        finite("freq", freq)?;
        if freq < T::zero() {
            return Err(Error::invalid("freq", format!("must be non-negative, got {freq}")));
        }
        let reactance = T::TAU() * freq * self.l_coil;
        Ok(self.r_coil.hypot(reactance))
    }

    /// Frequency at which the coil's resistive and inductive contributions
    /// are equal: `R = 2π·ν·L`.
    pub fn transition_frequency(&self) -> Result<T> {
        if !(self.l_coil > T::zero()) {
            return Err(Error::invalid("l_coil", format!("must be positive, got {}", self.l_coil)));
        }
        if self.l_coil.is_infinite() {
            return Ok(T::zero());
        }
        Ok(self.r_coil / (T::TAU() * self.l_coil))
    }

    /// Resistance seen across the emulator with the reed closed.
    pub fn on_resistance(&self) -> T {
        if self.r_int.is_infinite() {
            return self.r_coil;
        }
        self.r_coil * self.r_int / (self.r_coil + self.r_int)
    }
}

/// Switching parameters of one volatile memristor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceParams<T> {
    pub r_on: T,
    pub r_off: T,
    /// OFF→ON threshold for positive device voltage.
    pub v_th_pos: T,
    /// ON→OFF threshold for positive device voltage.
    pub v_hold_pos: T,
    /// OFF→ON threshold for negative device voltage (negative number).
    pub v_th_neg: T,
    /// ON→OFF threshold for negative device voltage (negative number).
    pub v_hold_neg: T,
    /// Time a switching condition must hold continuously before the state flips.
    pub t_actuate: T,
    /// Standard deviation of the per-switching-event threshold noise; 0 disables it.
    pub jitter_sigma: T,
}

impl<T: Scalar> Default for DeviceParams<T> {
    fn default() -> Self {
        derive_device_params(&EmulatorParams::default()).expect("default emulator is valid")
    }
}

/// Maps emulator components onto device parameters.
///
/// Negative-polarity thresholds mirror the positive ones; the actuation delay
/// takes [`DEFAULT_T_ACTUATE`] and jitter is disabled.
pub fn derive_device_params<T: Scalar>(e: &EmulatorParams<T>) -> Result<DeviceParams<T>> {
    e.validate()?;
    let p = DeviceParams {
        r_on: e.on_resistance(),
        r_off: e.r_coil,
        v_th_pos: e.v_pull_in,
        v_hold_pos: e.v_drop_out,
        v_th_neg: -e.v_pull_in,
        v_hold_neg: -e.v_drop_out,
        t_actuate: T::lit(DEFAULT_T_ACTUATE),
        jitter_sigma: T::zero(),
    };
    p.validate()?;
    Ok(p)
}

impl<T: Scalar> DeviceParams<T> {
    pub fn validate(&self) -> Result<()> {
        positive("r_on", self.r_on)?;
        positive("r_off", self.r_off)?;
        if self.r_on >= self.r_off {
            return Err(Error::invalid("r_on", format!("must be below r_off ({} >= {})", self.r_on, self.r_off)));
        }
        positive("v_hold_pos", self.v_hold_pos)?;
        finite("v_th_pos", self.v_th_pos)?;
        if self.v_th_pos <= self.v_hold_pos {
            return Err(Error::invalid("v_th_pos", "must exceed v_hold_pos"));
        }
        finite("v_th_neg", self.v_th_neg)?;
        finite("v_hold_neg", self.v_hold_neg)?;
        if !(self.v_hold_neg < T::zero()) {
            return Err(Error::invalid("v_hold_neg", "must be negative"));
        }
        if self.v_th_neg >= self.v_hold_neg {
            return Err(Error::invalid("v_th_neg", "must be below v_hold_neg"));
        }
        non_negative("t_actuate", self.t_actuate)?;
        non_negative("jitter_sigma", self.jitter_sigma)?;
        Ok(())
    }

    pub fn resistance(&self, conducting: bool) -> T {
        if conducting {
            self.r_on
        } else {
            self.r_off
        }
    }

    /// Whether a device in state `conducting` sees a condition that drives it
    /// to the other state. `offset` widens (positive) or narrows the
    /// threshold amplitudes.
    pub fn wants_switch(&self, conducting: bool, v: T, offset: T) -> bool {
        if conducting {
            self.v_hold_neg - offset < v && v < self.v_hold_pos + offset
        } else {
            v > self.v_th_pos + offset || v < self.v_th_neg - offset
        }
    }

    /// Quasi-static update: the state reached immediately under a constant
    /// device voltage, ignoring the actuation delay and jitter.
    pub fn settle(&self, conducting: bool, v: T) -> bool {
        conducting ^ self.wants_switch(conducting, v, T::zero())
    }

    /// True when `v` lies strictly inside the bistable window of the positive
    /// polarity, so both states are retained.
    pub fn is_bistable_at(&self, v: T) -> bool {
        self.v_hold_pos < v && v < self.v_th_pos
    }
}

/// A switching condition that has held for `elapsed` seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pending<T> {
    pub target: bool,
    pub elapsed: T,
}

/// Conduction state of a device together with its actuation timer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceState<T> {
    pub conducting: bool,
    pub pending: Option<Pending<T>>,
    /// Threshold perturbation drawn at the last switching event.
    pub threshold_offset: T,
}

impl<T: Scalar> DeviceState<T> {
    pub fn off() -> Self {
        Self::with(false)
    }

    pub fn on() -> Self {
        Self::with(true)
    }

    pub fn with(conducting: bool) -> Self {
        Self { conducting, pending: None, threshold_offset: T::zero() }
    }
}

impl<T: Scalar> Default for DeviceState<T> {
    fn default() -> Self {
        Self::off()
    }
}

/// Resistance of the device in its current state.
pub fn device_resistance<T: Scalar>(p: &DeviceParams<T>, s: &DeviceState<T>) -> T {
    p.resistance(s.conducting)
}

/// Advances one device by `dt` seconds under a constant device voltage.
///
/// When the switching condition for the current state holds, the pending
/// timer accumulates; once it reaches `t_actuate` the state flips. Leaving
/// the condition resets the timer. With `jitter_sigma > 0` a fresh Gaussian
/// threshold offset is drawn from `rng` at every flip; with zero jitter `rng`
/// is never touched.
pub fn step_device<T: Scalar, R: Rng + ?Sized>(
    p: &DeviceParams<T>,
    s: &DeviceState<T>,
    v_device: T,
    dt: T,
    rng: &mut R,
) -> Result<DeviceState<T>> {
    finite("v_device", v_device)?;
    finite("dt", dt)?;
    if !(dt > T::zero()) {
        return Err(Error::invalid("dt", format!("must be positive, got {dt}")));
    }

    if !p.wants_switch(s.conducting, v_device, s.threshold_offset) {
        return Ok(DeviceState { pending: None, ..*s });
    }

    let target = !s.conducting;
    let elapsed = match s.pending {
        Some(pending) if pending.target == target => pending.elapsed + dt,
        _ => dt,
    };
    // Accumulated dt may land a few ulps short of an exact multiple.
    let slack = p.t_actuate * T::epsilon() * T::lit(64.0);
    if elapsed + slack >= p.t_actuate {
        let threshold_offset = if p.jitter_sigma > T::zero() {
            let z: f64 = rng.sample(StandardNormal);
            p.jitter_sigma * T::lit(z)
        } else {
            T::zero()
        };
        Ok(DeviceState { conducting: target, pending: None, threshold_offset })
    } else {
        Ok(DeviceState { pending: Some(Pending { target, elapsed }), ..*s })
    }
}

pub(crate) fn finite<T: Scalar>(name: &'static str, value: T) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { name, value: value.as_f64() })
    }
}

pub(crate) fn positive<T: Scalar>(name: &'static str, value: T) -> Result<()> {
    if value > T::zero() && !value.is_nan() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be positive, got {value}")))
    }
}

fn non_negative<T: Scalar>(name: &'static str, value: T) -> Result<()> {
    if value >= T::zero() && value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be a finite non-negative number, got {value}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    fn instant() -> DeviceParams<f64> {
        DeviceParams { t_actuate: 0.0, ..DeviceParams::default() }
    }

    fn emulator(r_int: f64) -> EmulatorParams<f64> {
        EmulatorParams { r_int, ..EmulatorParams::default() }
    }

    #[test]
    fn derive_from_reference_emulator() {
        let p = derive_device_params(&EmulatorParams::<f64>::default()).unwrap();
        assert_eq!(p.r_off, 600.0);
        assert_relative_eq!(p.r_on, 318.75, epsilon = 1e-12);
        assert_eq!(p.v_th_pos, 2.2);
        assert_eq!(p.v_hold_pos, 1.6);
        assert_eq!(p.v_th_neg, -2.2);
        assert_eq!(p.v_hold_neg, -1.6);
        assert_eq!(p.t_actuate, DEFAULT_T_ACTUATE);
        assert_eq!(p.jitter_sigma, 0.0);
    }

    #[test]
    fn derive_small_internal_resistor() {
        let p = derive_device_params(&emulator(220.0)).unwrap();
        assert_relative_eq!(p.r_on, 160.975_609_756, epsilon = 1e-8);
    }

    #[test]
    fn infinite_internal_resistor_limit() {
        let e = emulator(f64::INFINITY);
        assert_eq!(e.on_resistance(), 600.0);
        assert_relative_eq!(emulator(1e12).on_resistance(), 600.0, max_relative = 1e-9);
    }

    #[test]
    fn derive_rejects_bad_components() {
        let err = derive_device_params(&emulator(-5.0)).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { name: "r_int", .. }));
        let e = EmulatorParams { v_drop_out: 2.5, ..EmulatorParams::<f64>::default() };
        assert!(derive_device_params(&e).is_err());
    }

    #[test]
    fn impedance_examples() {
        let e = EmulatorParams::<f64>::default();
        assert_eq!(e.coil_impedance(0.0).unwrap(), 600.0);
        assert_relative_eq!(e.coil_impedance(561.7).unwrap(), 848.510_517_8, epsilon = 1e-6);
        assert_relative_eq!(e.coil_impedance(5617.0).unwrap(), 6_029.677_427, epsilon = 1e-5);
        assert!(e.coil_impedance(-1.0).is_err());
    }

    #[test]
    fn transition_frequency_examples() {
        let e = EmulatorParams::<f64>::default();
        assert_relative_eq!(e.transition_frequency().unwrap(), 561.723_328_56, epsilon = 1e-6);
        let heavy = EmulatorParams { l_coil: f64::INFINITY, ..e };
        assert_eq!(heavy.transition_frequency().unwrap(), 0.0);
        let doubled = EmulatorParams { r_coil: 1200.0, ..e };
        assert_relative_eq!(doubled.transition_frequency().unwrap(), 1_123.446_657, epsilon = 1e-5);
        let bad = EmulatorParams { l_coil: 0.0, ..e };
        assert!(bad.transition_frequency().is_err());
    }

    #[test]
    fn single_precision_matches() {
        let e = EmulatorParams::<f32>::default();
        assert_relative_eq!(e.transition_frequency().unwrap(), 561.7233_f32, epsilon = 1e-2);
        let p = DeviceParams::<f32>::default();
        assert_relative_eq!(p.r_on, 318.75_f32, epsilon = 1e-3);
    }

    #[test]
    fn switches_on_above_threshold() {
        let s = step_device(&instant(), &DeviceState::off(), 2.3, 1e-4, &mut rng()).unwrap();
        assert!(s.conducting);
        assert!(s.pending.is_none());
    }

    #[test]
    fn hold_level_keeps_either_state() {
        let p = instant();
        for start in [DeviceState::off(), DeviceState::on()] {
            let s = step_device(&p, &start, 1.9, 1e-4, &mut rng()).unwrap();
            assert_eq!(s, start);
        }
    }

    #[test]
    fn switches_off_below_hold() {
        let s = step_device(&instant(), &DeviceState::on(), 1.5, 1e-4, &mut rng()).unwrap();
        assert!(!s.conducting);
    }

    #[test]
    fn negative_polarity_mirrors() {
        let p = instant();
        assert!(step_device(&p, &DeviceState::off(), -2.3, 1e-4, &mut rng()).unwrap().conducting);
        assert!(step_device(&p, &DeviceState::on(), -1.9, 1e-4, &mut rng()).unwrap().conducting);
        assert!(!step_device(&p, &DeviceState::on(), -1.5, 1e-4, &mut rng()).unwrap().conducting);
    }

    #[test]
    fn actuation_delay_accumulates() {
        let p = DeviceParams { t_actuate: 1e-3, ..DeviceParams::default() };
        let mut r = rng();
        let s1 = step_device(&p, &DeviceState::off(), 2.3, 0.4e-3, &mut r).unwrap();
        let s2 = step_device(&p, &s1, 2.3, 0.4e-3, &mut r).unwrap();
        assert!(!s2.conducting);
        assert_relative_eq!(s2.pending.unwrap().elapsed, 0.8e-3, epsilon = 1e-15);
        assert!(s2.pending.unwrap().target);
        let s3 = step_device(&p, &s2, 2.3, 0.4e-3, &mut r).unwrap();
        assert!(s3.conducting);
        assert!(s3.pending.is_none());
    }

    #[test]
    fn leaving_condition_clears_timer() {
        let p = DeviceParams { t_actuate: 1e-3, ..DeviceParams::default() };
        let mut r = rng();
        let s1 = step_device(&p, &DeviceState::off(), 2.3, 0.4e-3, &mut r).unwrap();
        let s2 = step_device(&p, &s1, 1.0, 0.4e-3, &mut r).unwrap();
        assert_eq!(s2, DeviceState::off());
    }

    #[test]
    fn rejects_non_finite_voltage_and_bad_dt() {
        let p = instant();
        let err = step_device(&p, &DeviceState::off(), f64::NAN, 1e-4, &mut rng()).unwrap_err();
        assert!(err.is_numerical());
        assert!(step_device(&p, &DeviceState::off(), f64::INFINITY, 1e-4, &mut rng()).is_err());
        assert!(step_device(&p, &DeviceState::off(), 1.0, 0.0, &mut rng()).is_err());
    }

    #[test]
    fn resistance_by_state() {
        let p = DeviceParams::<f64>::default();
        assert_eq!(device_resistance(&p, &DeviceState::off()), 600.0);
        assert_relative_eq!(device_resistance(&p, &DeviceState::on()), 318.75, epsilon = 1e-12);
    }

    #[test]
    fn jitter_changes_offset_only_on_flip() {
        let p = DeviceParams { t_actuate: 0.0, jitter_sigma: 0.05, ..DeviceParams::default() };
        let mut r = rng();
        let s = step_device(&p, &DeviceState::off(), 3.0, 1e-4, &mut r).unwrap();
        assert!(s.conducting);
        assert_ne!(s.threshold_offset, 0.0);
        let held = step_device(&p, &s, 1.9, 1e-4, &mut r).unwrap();
        assert_eq!(held.threshold_offset, s.threshold_offset);
    }

    #[test]
    fn quasi_static_sweep_flips_once_each_way() {
        let p = instant();
        let step = 0.01;
        let up: Vec<f64> = (0..=400).map(|k| k as f64 * step).collect();
        let mut s = DeviceState::off();
        let mut flips = Vec::new();
        for &v in &up {
            let next = step_device(&p, &s, v, 1e-3, &mut rng()).unwrap();
            if next.conducting != s.conducting {
                flips.push(v);
            }
            s = next;
        }
        assert_eq!(flips.len(), 1);
        assert!(flips[0] > 2.2 && flips[0] <= 2.2 + step + 1e-12);

        let mut down_flips = Vec::new();
        for &v in up.iter().rev() {
            let next = step_device(&p, &s, v, 1e-3, &mut rng()).unwrap();
            if next.conducting != s.conducting {
                down_flips.push(v);
            }
            s = next;
        }
        assert_eq!(down_flips.len(), 1);
        assert!(down_flips[0] < 1.6 && down_flips[0] >= 1.6 - step - 1e-12);
    }

    proptest! {
        #[test]
        fn bistable_window_is_identity(v in 1.6001f64..2.1999, n in 1usize..200, on in any::<bool>()) {
            let p = DeviceParams::<f64>::default();
            let start = DeviceState::with(on);
            let mut s = start;
            for _ in 0..n {
                s = step_device(&p, &s, v, 1e-4, &mut rng()).unwrap();
            }
            prop_assert_eq!(s, start);
        }

        #[test]
        fn derived_on_resistance_is_below_off(r_coil in 1.0f64..1e5, r_int in 1.0f64..1e6) {
            let e = EmulatorParams { r_coil, r_int, ..EmulatorParams::default() };
            let p = derive_device_params(&e).unwrap();
            prop_assert!(p.r_on < p.r_off);
        }

        #[test]
        fn impedance_at_transition_is_sqrt2_coil(r_coil in 1.0f64..1e5, l_coil in 1e-4f64..10.0) {
            let e = EmulatorParams { r_coil, l_coil, ..EmulatorParams::default() };
            let z = e.coil_impedance(e.transition_frequency().unwrap()).unwrap();
            prop_assert!(((z - std::f64::consts::SQRT_2 * r_coil) / (std::f64::consts::SQRT_2 * r_coil)).abs() < 1e-12);
        }

        #[test]
        fn zero_jitter_is_deterministic(v in -5.0f64..5.0, on in any::<bool>(), seed_a in any::<u64>(), seed_b in any::<u64>()) {
            let p = DeviceParams::<f64>::default();
            let s = DeviceState::with(on);
            let a = step_device(&p, &s, v, 1e-4, &mut ChaCha8Rng::seed_from_u64(seed_a)).unwrap();
            let b = step_device(&p, &s, v, 1e-4, &mut ChaCha8Rng::seed_from_u64(seed_b)).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
