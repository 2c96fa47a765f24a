//! The damped harmonic oscillator split into a spring-damper unit and a mass unit.

use crate::error::{Error, Result};
use crate::sim::{
    unknown_port, unknown_state, HeldInput, MacroStep, PortSpec, Role, SimulationUnit, TimePoint,
};

/// Force exerted by the spring and damper: `-k x1 - c u1`.
pub fn spring_damper_output(x1: f64, u1: f64, k: f64, c: f64) -> f64 {
    -k * x1 - c * u1
}

/// Exact advance of a point mass under a constant force over `dt`.
/// Returns `(x2, v2)` at the end of the step.
pub fn mass_step(x2: f64, v2: f64, u2: f64, m: f64, dt: MacroStep) -> (f64, f64) {
    let dt = dt.value();
    (x2 + v2 * dt + u2 * dt * dt / (2.0 * m), v2 + u2 * dt / m)
}

/// Spring and damper. Input `u1` is the extension velocity (flow), output `y1`
/// the opposing force (effort), state `x1` the extension.
#[derive(Debug, Clone)]
pub struct SpringDamperUnit {
    k: f64,
    c: f64,
    x1: f64,
    u1: HeldInput,
}

const SD_INPUTS: [PortSpec; 1] = [PortSpec::new("u1", Role::Flow)];
const SD_OUTPUTS: [PortSpec; 1] = [PortSpec::new("y1", Role::Effort)];

impl SpringDamperUnit {
    pub fn new(k: f64, c: f64, x1: f64) -> Result<Self> {
        if !(k.is_finite() && c.is_finite() && x1.is_finite()) {
            return Err(Error::config("spring-damper parameters must be finite"));
        }
        Ok(SpringDamperUnit {
            k,
            c,
            x1,
            u1: HeldInput::default(),
        })
    }
}

impl SimulationUnit for SpringDamperUnit {
    fn kind(&self) -> &'static str {
        "spring-damper"
    }

    fn inputs(&self) -> &[PortSpec] {
        &SD_INPUTS
    }

    fn outputs(&self) -> &[PortSpec] {
        &SD_OUTPUTS
    }

    fn state_names(&self) -> &[&'static str] {
        &["x1"]
    }

    fn feedthrough(&self, _output: &str) -> &[&'static str] {
        // the damper force depends on the velocity held at the same point
        &["u1"]
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
        self.x1 += self.u1.get("u1")? * dt.value();
        Ok(())
    }

    fn output(&self, port: &str) -> Result<f64> {
        match port {
            "y1" => Ok(spring_damper_output(
                self.x1,
                self.u1.get("u1")?,
                self.k,
                self.c,
            )),
            _ => Err(unknown_port(self.kind(), port)),
        }
    }

    fn state(&self, name: &str) -> Result<f64> {
        match name {
            "x1" => Ok(self.x1),
            _ => Err(unknown_state(self.kind(), name)),
        }
    }
}

/// Point mass. Input `u2` is the applied force (effort), output `y2` the
/// velocity (flow); states `x2` and `v2`.
#[derive(Debug, Clone)]
pub struct MassUnit {
    m: f64,
    x2: f64,
    v2: f64,
    u2: HeldInput,
}

const MASS_INPUTS: [PortSpec; 1] = [PortSpec::new("u2", Role::Effort)];
const MASS_OUTPUTS: [PortSpec; 1] = [PortSpec::new("y2", Role::Flow)];

impl MassUnit {
    pub fn new(m: f64, x2: f64, v2: f64) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::config(format!("mass must be positive, got {m}")));
        }
        if !(x2.is_finite() && v2.is_finite()) {
            return Err(Error::config("mass initial state must be finite"));
        }
        Ok(MassUnit {
            m,
            x2,
            v2,
            u2: HeldInput::default(),
        })
    }

    pub fn mass(&self) -> f64 {
        self.m
    }
}

impl SimulationUnit for MassUnit {
    fn kind(&self) -> &'static str {
        "mass"
    }

    fn inputs(&self) -> &[PortSpec] {
        &MASS_INPUTS
    }

    fn outputs(&self) -> &[PortSpec] {
        &MASS_OUTPUTS
    }

    fn state_names(&self) -> &[&'static str] {
        &["x2", "v2"]
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
        (self.x2, self.v2) = mass_step(self.x2, self.v2, u2, self.m, dt);
        Ok(())
    }

    fn output(&self, port: &str) -> Result<f64> {
        match port {
            "y2" => Ok(self.v2),
            _ => Err(unknown_port(self.kind(), port)),
        }
    }

    fn state(&self, name: &str) -> Result<f64> {
        match name {
            "x2" => Ok(self.x2),
            "v2" => Ok(self.v2),
            _ => Err(unknown_state(self.kind(), name)),
        }
    }
}
