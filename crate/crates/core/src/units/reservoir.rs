//! Two fluid reservoirs joined by a laminar pipe. Unit S1 is reservoir 1; unit
//! S2 is reservoir 2 together with the pipe.

use crate::error::{Error, Result};
use crate::sim::{
    unknown_port, unknown_state, HeldInput, MacroStep, PortSpec, Role, SimulationUnit, TimePoint,
};

/// Flow through the pipe, positive from reservoir 1 to reservoir 2, given the
/// upstream pressure `p` and the downstream volume `v2`.
pub fn pipe_flow(v2: f64, p: f64, c: f64, r: f64) -> f64 {
    p / r - v2 / (c * r)
}

/// Exact advance of reservoir 2 under a held upstream pressure `u2`.
/// The volume relaxes exponentially towards `C u2` with time constant `R C`.
pub fn reservoir_pipe_step(v2: f64, u2: f64, c: f64, r: f64, dt: MacroStep) -> f64 {
    let target = c * u2;
    let fraction = -(-dt.value() / (r * c)).exp_m1();
    v2 + (target - v2) * fraction
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::config(format!("{name} must be positive, got {x}")))
    }
}

/// Reservoir 1: input `u1` is the outgoing flow, output `y1` the pressure at
/// its bottom `V1 / C`, state `V1`.
#[derive(Debug, Clone)]
pub struct ReservoirUnit {
    c: f64,
    v1: f64,
    u1: HeldInput,
}

const RES_INPUTS: [PortSpec; 1] = [PortSpec::new("u1", Role::Flow)];
const RES_OUTPUTS: [PortSpec; 1] = [PortSpec::new("y1", Role::Effort)];

impl ReservoirUnit {
    pub fn new(c: f64, v1: f64) -> Result<Self> {
        check_positive("capacitance C", c)?;
        if !v1.is_finite() {
            return Err(Error::config("V1 must be finite"));
        }
        Ok(ReservoirUnit {
            c,
            v1,
            u1: HeldInput::default(),
        })
    }
}

impl SimulationUnit for ReservoirUnit {
    fn kind(&self) -> &'static str {
        "reservoir"
    }

    fn inputs(&self) -> &[PortSpec] {
        &RES_INPUTS
    }

    fn outputs(&self) -> &[PortSpec] {
        &RES_OUTPUTS
    }

    fn state_names(&self) -> &[&'static str] {
        &["V1"]
    }

    fn set_input(&mut self, port: &str, value: f64) -> Result<()> {
        match port {
            "u1" => {
                self.u1.set(value);
                Ok(())
            }
            _ => Err(unknown_port(self.kind(), port)),
        }
    }

    fn do_step(&mut self, _t: TimePoint, dt: MacroStep) -> Result<()> {
        self.v1 -= self.u1.get("u1")? * dt.value();
        Ok(())
    }

    fn output(&self, port: &str) -> Result<f64> {
        match port {
            "y1" => Ok(self.v1 / self.c),
            _ => Err(unknown_port(self.kind(), port)),
        }
    }

    fn state(&self, name: &str) -> Result<f64> {
        match name {
            "V1" => Ok(self.v1),
            _ => Err(unknown_state(self.kind(), name)),
        }
    }

    fn add_to_state(&mut self, name: &str, amount: f64) -> Result<()> {
        match name {
            "V1" => {
                self.v1 += amount;
                Ok(())
            }
            _ => Err(unknown_state(self.kind(), name)),
        }
    }
}

/// Reservoir 2 and the pipe: input `u2` is the pressure at the pipe inlet,
/// output `y2` the pipe flow `Q`, state `V2`.
#[derive(Debug, Clone)]
pub struct ReservoirPipeUnit {
    c: f64,
    r: f64,
    v2: f64,
    u2: HeldInput,
}

const PIPE_INPUTS: [PortSpec; 1] = [PortSpec::new("u2", Role::Effort)];
const PIPE_OUTPUTS: [PortSpec; 1] = [PortSpec::new("y2", Role::Flow)];

impl ReservoirPipeUnit {
    pub fn new(c: f64, r: f64, v2: f64) -> Result<Self> {
        check_positive("capacitance C", c)?;
        check_positive("resistance R", r)?;
        if !v2.is_finite() {
            return Err(Error::config("V2 must be finite"));
        }
        Ok(ReservoirPipeUnit {
            c,
            r,
            v2,
            u2: HeldInput::default(),
        })
    }
}

impl SimulationUnit for ReservoirPipeUnit {
    fn kind(&self) -> &'static str {
        "reservoir-pipe"
    }

    fn inputs(&self) -> &[PortSpec] {
        &PIPE_INPUTS
    }

    fn outputs(&self) -> &[PortSpec] {
        &PIPE_OUTPUTS
    }

    fn state_names(&self) -> &[&'static str] {
        &["V2"]
    }

    fn feedthrough(&self, _output: &str) -> &[&'static str] {
        &["u2"]
    }

    fn set_input(&mut self, port: &str, value: f64) -> Result<()> {
        match port {
            "u2" => {
                self.u2.set(value);
                Ok(())
            }
            _ => Err(unknown_port(self.kind(), port)),
        }
    }

    fn do_step(&mut self, _t: TimePoint, dt: MacroStep) -> Result<()> {
        let u2 = self.u2.get("u2")?;
        self.v2 = reservoir_pipe_step(self.v2, u2, self.c, self.r, dt);
        Ok(())
    }

    fn output(&self, port: &str) -> Result<f64> {
        match port {
            "y2" => Ok(pipe_flow(self.v2, self.u2.get("u2")?, self.c, self.r)),
            _ => Err(unknown_port(self.kind(), port)),
        }
    }

    fn state(&self, name: &str) -> Result<f64> {
        match name {
            "V2" => Ok(self.v2),
            _ => Err(unknown_state(self.kind(), name)),
        }
    }

    fn add_to_state(&mut self, name: &str, amount: f64) -> Result<()> {
        match name {
            "V2" => {
                self.v2 += amount;
                Ok(())
            }
            _ => Err(unknown_state(self.kind(), name)),
        }
    }
}
