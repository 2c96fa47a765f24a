//! Macro step size controllers.
//!
//! A controller sees the trace up to and including the current communication
//! point and proposes the next step. The master may shorten the proposal to
//! land exactly on an event or on the end time.

mod bangbang;
mod pi;

pub use bangbang::{bangbang_next, BangBangController, BangBangParams};
pub use pi::{
    bond_residual, ecco_residual, normalize_error, pi_next, BondResidual, PiController, PiParams,
    EPS_FLOOR,
};

use crate::error::{Error, Result};
use crate::sim::{MacroStep, TimePoint, Trace};

pub trait StepController: Send {
    /// Step to take from the last communication point in `trace`.
    fn next_step(&mut self, trace: &Trace) -> Result<f64>;
}

fn current_time(trace: &Trace) -> Result<f64> {
    trace
        .last()
        .map(|r| r.t)
        .ok_or_else(|| Error::Controller("trace has no communication points".into()))
}

pub fn fixed_next(dt_fixed: MacroStep) -> MacroStep {
    dt_fixed
}

#[derive(Debug, Clone)]
pub struct FixedController {
    dt: MacroStep,
}

impl FixedController {
    pub fn new(dt: f64) -> Result<Self> {
        let dt = MacroStep::new(dt).map_err(|_| {
            Error::config(format!("fixed step must be positive and finite, got {dt}"))
        })?;
        Ok(FixedController { dt })
    }
}

impl StepController for FixedController {
    fn next_step(&mut self, _trace: &Trace) -> Result<f64> {
        Ok(fixed_next(self.dt).value())
    }
}

/// Piecewise-constant step sizes keyed by the time from which they apply.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSchedule {
    pieces: Vec<(TimePoint, MacroStep)>,
}

impl StepSchedule {
    pub fn new(pieces: Vec<(f64, f64)>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::config("step schedule needs at least one piece"));
        }
        let pieces = pieces
            .into_iter()
            .map(|(from, dt)| Ok((TimePoint::new(from)?, MacroStep::new(dt)?)))
            .collect::<Result<Vec<_>>>()?;
        if pieces.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::config(
                "step schedule start times must be strictly increasing",
            ));
        }
        Ok(StepSchedule { pieces })
    }

    pub fn pieces(&self) -> &[(TimePoint, MacroStep)] {
        &self.pieces
    }

    pub fn start(&self) -> f64 {
        self.pieces[0].0.value()
    }

    /// Step size in force at `t`. A piece starting within a hair of `t`
    /// (one part in 10^9 of its step) already counts as started, so
    /// accumulated rounding in `t` does not delay a switch by a whole step.
    pub fn dt_at(&self, t: f64) -> f64 {
        self.pieces
            .iter()
            .rev()
            .find(|(from, dt)| from.value() <= t + 1e-9 * dt.value())
            .unwrap_or(&self.pieces[0])
            .1
            .value()
    }
}

#[derive(Debug, Clone)]
pub struct ScheduledController {
    schedule: StepSchedule,
}

impl ScheduledController {
    pub fn new(schedule: StepSchedule) -> Self {
        ScheduledController { schedule }
    }
}

impl StepController for ScheduledController {
    fn next_step(&mut self, trace: &Trace) -> Result<f64> {
        let t = current_time(trace)?;
        if trace.len() == 1 && t + 1e-12 < self.schedule.start() {
            return Err(Error::Controller(format!(
                "schedule starts at {} but the run starts at {t}",
                self.schedule.start()
            )));
        }
        Ok(self.schedule.dt_at(t))
    }
}

/// Replays an explicit list of step sizes, one per macro step.
#[derive(Debug, Clone)]
pub struct SequenceController {
    steps: Vec<MacroStep>,
}

impl SequenceController {
    pub fn new(steps: &[f64]) -> Result<Self> {
        let steps = steps
            .iter()
            .map(|&dt| MacroStep::new(dt))
            .collect::<Result<Vec<_>>>()?;
        Ok(SequenceController { steps })
    }
}

impl StepController for SequenceController {
    fn next_step(&mut self, trace: &Trace) -> Result<f64> {
        let n = trace.len().saturating_sub(1);
        self.steps
            .get(n)
            .map(|dt| dt.value())
            .ok_or_else(|| Error::Controller(format!("step sequence exhausted at step {n}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_controller() {
        assert_eq!(fixed_next(MacroStep::new(0.1).unwrap()).value(), 0.1);
        let mut c = FixedController::new(0.001).unwrap();
        let tr = Trace::new(vec![], vec![], vec![]);
        assert_eq!(c.next_step(&tr).unwrap(), 0.001);
        assert_eq!(c.next_step(&tr).unwrap(), 0.001);
        assert!(FixedController::new(0.0).is_err());
    }

    #[test]
    fn schedule_lookup() {
        let s = StepSchedule::new(vec![(0.0, 0.1), (0.2, 0.01)]).unwrap();
        assert_eq!(s.dt_at(0.0), 0.1);
        assert_eq!(s.dt_at(0.1), 0.1);
        assert_eq!(s.dt_at(0.2), 0.01);
        // 0.1 + 0.1 + 0.1 lands just above 0.3, 0.7 * 3 lands just below 2.1
        let s = StepSchedule::new(vec![(0.0, 0.1), (0.3, 0.01), (2.1, 0.05)]).unwrap();
        assert_eq!(s.dt_at(0.1 + 0.1 + 0.1), 0.01);
        assert_eq!(s.dt_at(0.7 * 3.0), 0.05);
        assert_eq!(s.dt_at(0.29), 0.1);
    }

    #[test]
    fn schedule_validation() {
        assert!(StepSchedule::new(vec![]).is_err());
        assert!(StepSchedule::new(vec![(0.0, 0.1), (0.0, 0.2)]).is_err());
        assert!(StepSchedule::new(vec![(0.5, 0.1), (0.2, 0.2)]).is_err());
        assert!(StepSchedule::new(vec![(0.0, -0.1)]).is_err());
    }
}
