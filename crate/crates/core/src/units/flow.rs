//! Synthetic units for the general two-sided integral setup: a source with an
//! analytically known flow `q(t)` and its exact integral, and an accumulator
//! that integrates the zero-order-hold samples of that flow.

use crate::error::{Error, Result};
use crate::sim::{
    unknown_port, unknown_state, HeldInput, MacroStep, PortSpec, Role, SimulationUnit, TimePoint,
};

pub const MAX_POLY_DEGREE: usize = 8;

/// Polynomial with coefficients in ascending order, degree at most 8.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::config("polynomial needs at least one coefficient"));
        }
        if coeffs.len() > MAX_POLY_DEGREE + 1 {
            return Err(Error::config(format!(
                "polynomial degree {} exceeds the maximum of {MAX_POLY_DEGREE}",
                coeffs.len() - 1
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::config("polynomial coefficients must be finite"));
        }
        Ok(Polynomial { coeffs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    /// Antiderivative vanishing at zero.
    pub fn antiderivative(&self, t: f64) -> f64 {
        let inner = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (k, &c)| acc * t + c / (k + 1) as f64);
        inner * t
    }

    /// `order`-th derivative at `t`.
    pub fn derivative(&self, order: usize, t: f64) -> f64 {
        if order > self.degree() {
            return 0.0;
        }
        self.coeffs
            .iter()
            .enumerate()
            .skip(order)
            .rev()
            .fold(0.0, |acc, (k, &c)| {
                let falling: f64 = ((k - order + 1)..=k).map(|j| j as f64).product();
                acc * t + c * falling
            })
    }

    /// Derivatives of order 1 through the degree, evaluated at `t`.
    pub fn derivatives_at(&self, t: f64) -> Vec<f64> {
        (1..=self.degree()).map(|k| self.derivative(k, t)).collect()
    }

    /// Exact integral over `[a, b]`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.antiderivative(b) - self.antiderivative(a)
    }
}

/// Advances the exact integral of `q` from `t` to `t + dt`.
/// Returns the new integral and the flow at the end of the step.
pub fn scripted_flow_step(q: &Polynomial, t: TimePoint, dt: MacroStep, x2: f64) -> (f64, f64) {
    let (a, b) = (t.value(), t.value() + dt.value());
    (x2 + q.integral(a, b), q.eval(b))
}

/// Emits a prescribed flow `q(t)` on output `y2` and integrates it exactly into `x2`.
#[derive(Debug, Clone)]
pub struct ScriptedFlowSourceUnit {
    q: Polynomial,
    t: f64,
    x2: f64,
}

const SRC_OUTPUTS: [PortSpec; 1] = [PortSpec::new("y2", Role::Flow)];

impl ScriptedFlowSourceUnit {
    pub fn new(q: Polynomial, t_start: TimePoint, x2: f64) -> Result<Self> {
        if !x2.is_finite() {
            return Err(Error::config("x2 must be finite"));
        }
        Ok(ScriptedFlowSourceUnit {
            q,
            t: t_start.value(),
            x2,
        })
    }

    pub fn flow(&self) -> &Polynomial {
        &self.q
    }
}

impl SimulationUnit for ScriptedFlowSourceUnit {
    fn kind(&self) -> &'static str {
        "scripted-flow-source"
    }

    fn inputs(&self) -> &[PortSpec] {
        &[]
    }

    fn outputs(&self) -> &[PortSpec] {
        &SRC_OUTPUTS
    }

    fn state_names(&self) -> &[&'static str] {
        &["x2"]
    }

    fn set_input(&mut self, port: &str, _value: f64) -> Result<()> {
        Err(unknown_port(self.kind(), port))
    }

    fn do_step(&mut self, t: TimePoint, dt: MacroStep) -> Result<()> {
        (self.x2, _) = scripted_flow_step(&self.q, t, dt, self.x2);
        self.t = t.value() + dt.value();
        Ok(())
    }

    fn output(&self, port: &str) -> Result<f64> {
        match port {
            "y2" => Ok(self.q.eval(self.t)),
            _ => Err(unknown_port(self.kind(), port)),
        }
    }

    fn state(&self, name: &str) -> Result<f64> {
        match name {
            "x2" => Ok(self.x2),
            _ => Err(unknown_state(self.kind(), name)),
        }
    }
}

/// Integrates its held input `u1` into `x1`.
#[derive(Debug, Clone)]
pub struct AccumulatorUnit {
    x1: f64,
    u1: HeldInput,
}

const ACC_INPUTS: [PortSpec; 1] = [PortSpec::new("u1", Role::Flow)];

impl AccumulatorUnit {
    pub fn new(x1: f64) -> Result<Self> {
        if !x1.is_finite() {
            return Err(Error::config("x1 must be finite"));
        }
        Ok(AccumulatorUnit {
            x1,
            u1: HeldInput::default(),
        })
    }
}

impl SimulationUnit for AccumulatorUnit {
    fn kind(&self) -> &'static str {
        "accumulator"
    }

    fn inputs(&self) -> &[PortSpec] {
        &ACC_INPUTS
    }

    fn outputs(&self) -> &[PortSpec] {
        &[]
    }

    fn state_names(&self) -> &[&'static str] {
        &["x1"]
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
        Err(unknown_port(self.kind(), port))
    }

    fn state(&self, name: &str) -> Result<f64> {
        match name {
            "x1" => Ok(self.x1),
            _ => Err(unknown_state(self.kind(), name)),
        }
    }
}
