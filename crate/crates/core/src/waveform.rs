//! Applied-voltage waveforms.

use crate::device::finite;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A source voltage as a function of time.
///
/// Periodic kinds are `offset + amplitude · shape(t / period)` with a unit
/// shape that starts at zero (sawtooth ramps 0→1, triangle goes 0→1→−1→0,
/// sine is `sin 2πx`).
#[derive(Debug, Clone, PartialEq)]
pub enum SourceWaveform<T> {
    Constant { level: T },
    Sawtooth { offset: T, amplitude: T, period: T },
    Triangle { offset: T, amplitude: T, period: T },
    Sine { offset: T, amplitude: T, period: T },
    /// Piecewise-constant levels `(start time, value)`; zero before the first step.
    Steps(Vec<(T, T)>),
}

impl<T: Scalar> SourceWaveform<T> {
    pub fn validate(&self) -> Result<()> {
        match self {
            SourceWaveform::Constant { level } => finite("level", *level),
            SourceWaveform::Sawtooth { offset, amplitude, period }
            | SourceWaveform::Triangle { offset, amplitude, period }
            | SourceWaveform::Sine { offset, amplitude, period } => {
                finite("offset", *offset)?;
                finite("amplitude", *amplitude)?;
                if !(*period > T::zero()) || !period.is_finite() {
                    return Err(Error::invalid("period", format!("must be positive, got {period}")));
                }
                Ok(())
            }
            SourceWaveform::Steps(steps) => {
                for (t, v) in steps {
                    finite("step time", *t)?;
                    finite("step value", *v)?;
                }
                if steps.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(Error::invalid("steps", "step times must be strictly increasing"));
                }
                Ok(())
            }
        }
    }

    pub fn value_at(&self, t: T) -> T {
        match self {
            SourceWaveform::Constant { level } => *level,
            SourceWaveform::Sawtooth { offset, amplitude, period } => {
                let x = t / *period;
                *offset + *amplitude * (x - x.floor())
            }
            SourceWaveform::Triangle { offset, amplitude, period } => {
                *offset + *amplitude * triangle_unit(t / *period)
            }
            SourceWaveform::Sine { offset, amplitude, period } => {
                *offset + *amplitude * (T::TAU() * t / *period).sin()
            }
            SourceWaveform::Steps(steps) => steps
                .iter()
                .take_while(|(start, _)| *start <= t)
                .last()
                .map_or(T::zero(), |&(_, v)| v),
        }
    }
}

fn triangle_unit<T: Scalar>(x: T) -> T {
    let frac = x - x.floor();
    let four = T::lit(4.0);
    if frac < T::lit(0.25) {
        four * frac
    } else if frac < T::lit(0.75) {
        T::lit(2.0) - four * frac
    } else {
        four * frac - four
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sawtooth_ramps_and_wraps() {
        let w = SourceWaveform::Sawtooth { offset: 0.0, amplitude: 8.0, period: 1.0 };
        assert_eq!(w.value_at(0.0), 0.0);
        assert_relative_eq!(w.value_at(0.5), 4.0);
        assert_relative_eq!(w.value_at(1.25), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn triangle_shape() {
        let w = SourceWaveform::Triangle { offset: 0.0, amplitude: 4.0, period: 1.0 };
        assert_eq!(w.value_at(0.0), 0.0);
        assert_relative_eq!(w.value_at(0.25), 4.0);
        assert_relative_eq!(w.value_at(0.5), 0.0);
        assert_relative_eq!(w.value_at(0.75), -4.0);
        assert_relative_eq!(w.value_at(0.875), -2.0);
    }

    #[test]
    fn sine_and_constant() {
        let w = SourceWaveform::Sine { offset: 1.0, amplitude: 2.0, period: 4.0 };
        assert_relative_eq!(w.value_at(1.0), 3.0);
        assert_eq!(SourceWaveform::Constant { level: 5.0 }.value_at(123.0), 5.0);
    }

    #[test]
    fn steps_hold_last_level() {
        let w = SourceWaveform::Steps(vec![(0.1, 1.0), (0.2, 5.0)]);
        assert_eq!(w.value_at(0.0), 0.0);
        assert_eq!(w.value_at(0.1), 1.0);
        assert_eq!(w.value_at(0.15), 1.0);
        assert_eq!(w.value_at(0.3), 5.0);
    }

    #[test]
    fn validation() {
        assert!(SourceWaveform::Steps(vec![(0.2, 1.0), (0.1, 5.0)]).validate().is_err());
        assert!(SourceWaveform::Sine { offset: 0.0, amplitude: 1.0, period: 0.0 }.validate().is_err());
        assert!(SourceWaveform::Constant { level: f64::NAN }.validate().is_err());
        assert!(SourceWaveform::Triangle { offset: 0.0, amplitude: 1.0, period: 1.0 }.validate().is_ok());
    }
}
