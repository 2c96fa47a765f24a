use std::fmt;

use crate::error::{Error, Result};

/// A simulation time instant. Always finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct TimePoint(f64);

impl TimePoint {
    pub fn new(t: f64) -> Result<Self> {
        if t.is_finite() {
            Ok(TimePoint(t))
        } else {
            Err(Error::argument(format!("time must be finite, got {t}")))
        }
    }

    pub const fn zero() -> Self {
        TimePoint(0.0)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for TimePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Macro step size: the distance between two consecutive communication points.
/// Strictly positive and finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MacroStep(f64);

impl MacroStep {
    pub fn new(dt: f64) -> Result<Self> {
        if dt.is_finite() && dt > 0.0 {
            Ok(MacroStep(dt))
        } else {
            Err(Error::argument(format!(
                "macro step must be positive and finite, got {dt}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for MacroStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Returns the step `dt` closest to `target - t` for which `t + dt == target`
/// holds exactly in floating point.
pub(crate) fn exact_step_to(t: f64, target: f64) -> f64 {
    let mut dt = target - t;
    // Rounding of the subtraction is at most an ulp or two; walk to the exact value.
    for _ in 0..8 {
        let reached = t + dt;
        if reached == target {
            break;
        }
        dt = if reached < target {
            dt.next_up()
        } else {
            dt.next_down()
        };
    }
    dt
}
