//! Concrete simulation units with exact step solutions.

mod flow;
mod oscillator;
mod reservoir;

pub use flow::{
    scripted_flow_step, AccumulatorUnit, Polynomial, ScriptedFlowSourceUnit, MAX_POLY_DEGREE,
};
pub use oscillator::{mass_step, spring_damper_output, MassUnit, SpringDamperUnit};
pub use reservoir::{pipe_flow, reservoir_pipe_step, ReservoirPipeUnit, ReservoirUnit};
