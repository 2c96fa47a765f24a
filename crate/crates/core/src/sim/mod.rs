//! Domain types shared by every other module: time, ports, the unit
//! contract, events and traces.

mod event;
mod port;
mod time;
mod trace;
mod unit;

pub use event::{Event, StateAction};
pub use port::{Connection, Direction, PortRef, PortSpec, PowerBond, Role, VarKey};
pub(crate) use time::exact_step_to;
pub use time::{MacroStep, TimePoint};
pub use trace::{fmt_real, Trace, TraceRow};
pub(crate) use unit::{unknown_port, unknown_state};
pub use unit::{HeldInput, SimulationUnit};
