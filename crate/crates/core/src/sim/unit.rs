use crate::error::{Error, Result};
use crate::sim::port::PortSpec;
use crate::sim::time::{MacroStep, TimePoint};

/// Contract for a subsystem in a co-simulation.
///
/// A unit owns its internal state and advances it over a macro step using only
/// the input values set before the step (zero-order hold). Outputs are read at
/// communication points. Units must be `Send` so a master can move them across
/// threads; they are not required to be `Sync`.
pub trait SimulationUnit: Send {
    /// Short type name, used in diagnostics.
    fn kind(&self) -> &'static str;

    fn inputs(&self) -> &[PortSpec];

    fn outputs(&self) -> &[PortSpec];

    fn state_names(&self) -> &[&'static str];

    /// Inputs that the given output depends on directly at the same
    /// communication point.
    fn feedthrough(&self, _output: &str) -> &[&'static str] {
        &[]
    }

    fn set_input(&mut self, port: &str, value: f64) -> Result<()>;

    /// Advances the unit exactly from `t` to `t + dt` with the currently held inputs.
    fn do_step(&mut self, t: TimePoint, dt: MacroStep) -> Result<()>;

    fn output(&self, port: &str) -> Result<f64>;

    fn state(&self, name: &str) -> Result<f64>;

    /// Instantaneous state mutation used by scheduled events.
    fn add_to_state(&mut self, name: &str, _amount: f64) -> Result<()> {
        Err(Error::Unsupported(format!(
            "{} does not support modifying state `{name}`",
            self.kind()
        )))
    }
}

/// An input value held constant over a macro step. Starts out unset.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HeldInput(Option<f64>);

impl HeldInput {
    pub fn set(&mut self, value: f64) {
        self.0 = Some(value);
    }

    pub fn get(&self, port: &str) -> Result<f64> {
        self.0
            .ok_or_else(|| Error::State(format!("input `{port}` has not been set")))
    }
}

pub(crate) fn unknown_port(kind: &str, port: &str) -> Error {
    Error::config(format!("{kind} has no port `{port}`"))
}

pub(crate) fn unknown_state(kind: &str, name: &str) -> Error {
    Error::config(format!("{kind} has no state `{name}`"))
}
