//! Co-simulation kernel for studying how macro step size changes affect the
//! discrepancy between two states that integrate the same coupling variable
//! on either side of a connection.
//!
//! - [`sim`]: time, ports, the [`SimulationUnit`](sim::SimulationUnit) contract, traces.
//! - [`units`]: concrete units with exact step solutions.
//! - [`orchestrator`]: the explicit Jacobi master.
//! - [`stepctl`]: fixed, scheduled, bang-bang and energy-residual PI step control.
//! - [`analysis`]: measured discrepancies and their closed-form predictions.
//! - [`setups`]: the oscillator, reservoir and polynomial-flow models.

pub mod analysis;
pub mod error;
pub mod orchestrator;
pub mod setups;
pub mod sim;
pub mod stepctl;
pub mod units;

pub use error::{Error, Result};
pub use orchestrator::{run, Cosimulation, Model, RunConfig};
