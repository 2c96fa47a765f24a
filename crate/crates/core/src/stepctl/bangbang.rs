use crate::error::{Error, Result};
use crate::sim::{Trace, VarKey};
use crate::stepctl::StepController;

/// Two-valued step rule driven by a monitored flow output.
#[derive(Debug, Clone, PartialEq)]
pub struct BangBangParams {
    pub monitor: VarKey,
    pub threshold: f64,
    pub dt_small: f64,
    pub dt_large: f64,
}

impl Default for BangBangParams {
    fn default() -> Self {
        BangBangParams {
            monitor: VarKey::new("S2", "y2"),
            threshold: 0.5,
            dt_small: 0.001,
            dt_large: 0.01,
        }
    }
}

impl BangBangParams {
    pub fn validate(&self) -> Result<()> {
        if !self.threshold.is_finite() {
            return Err(Error::config("bang-bang threshold must be finite"));
        }
        if !(self.dt_small > 0.0 && self.dt_small < self.dt_large && self.dt_large.is_finite()) {
            return Err(Error::config(format!(
                "bang-bang steps need 0 < dt_small < dt_large, got {} and {}",
                self.dt_small, self.dt_large
            )));
        }
        Ok(())
    }
}

/// Small steps while the monitored value strictly exceeds the threshold,
/// large steps otherwise.
pub fn bangbang_next(monitor_value: f64, p: &BangBangParams) -> f64 {
    if monitor_value > p.threshold {
        p.dt_small
    } else {
        p.dt_large
    }
}

#[derive(Debug, Clone)]
pub struct BangBangController {
    params: BangBangParams,
}

impl BangBangController {
    pub fn new(params: BangBangParams) -> Result<Self> {
        params.validate()?;
        Ok(BangBangController { params })
    }
}

impl StepController for BangBangController {
    fn next_step(&mut self, trace: &Trace) -> Result<f64> {
        let n = trace
            .len()
            .checked_sub(1)
            .ok_or_else(|| Error::Controller("trace has no communication points".into()))?;
        let value = trace.output(n, &self.params.monitor)?;
        Ok(bangbang_next(value, &self.params))
    }
}
