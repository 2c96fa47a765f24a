//! Ready-made models: the split damped oscillator, the connected reservoirs,
//! and a polynomial flow integrated on both sides of a connection.

use crate::error::Result;
use crate::orchestrator::Model;
use crate::sim::{Event, TimePoint};
use crate::units::{
    AccumulatorUnit, MassUnit, Polynomial, ReservoirPipeUnit, ReservoirUnit,
    ScriptedFlowSourceUnit, SpringDamperUnit,
};

/// S1 = spring-damper, S2 = mass. Unit parameters by default, both
/// displacements at 1, mass at rest.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorSetup {
    pub m: f64,
    pub c: f64,
    pub k: f64,
    pub x1: f64,
    pub x2: f64,
    pub v2: f64,
}

impl Default for OscillatorSetup {
    fn default() -> Self {
        OscillatorSetup {
            m: 1.0,
            c: 1.0,
            k: 1.0,
            x1: 1.0,
            x2: 1.0,
            v2: 0.0,
        }
    }
}

pub fn oscillator_model(s: &OscillatorSetup) -> Result<Model> {
    let mut model = Model::new();
    model.add_unit("S1", SpringDamperUnit::new(s.k, s.c, s.x1)?)?;
    model.add_unit("S2", MassUnit::new(s.m, s.x2, s.v2)?)?;
    let force = model.connect("S1.y1", "S2.u2")?;
    let velocity = model.connect("S2.y2", "S1.u1")?;
    model.add_bond(force, velocity)?;
    Ok(model)
}

/// S1 = reservoir 1, S2 = reservoir 2 with the pipe.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirSetup {
    pub c: f64,
    pub r: f64,
    pub v1: f64,
    pub v2: f64,
}

impl Default for ReservoirSetup {
    fn default() -> Self {
        ReservoirSetup {
            c: 1.0,
            r: 1.0,
            v1: 0.6,
            v2: 0.4,
        }
    }
}

pub fn reservoir_model(s: &ReservoirSetup, events: &[Event]) -> Result<Model> {
    let mut model = Model::new();
    model.add_unit("S1", ReservoirUnit::new(s.c, s.v1)?)?;
    model.add_unit("S2", ReservoirPipeUnit::new(s.c, s.r, s.v2)?)?;
    let pressure = model.connect("S1.y1", "S2.u2")?;
    let flow = model.connect("S2.y2", "S1.u1")?;
    model.add_bond(pressure, flow)?;
    for e in events {
        model.add_event(e.clone())?;
    }
    Ok(model)
}

/// One unit of fluid added to reservoir 1 at `t = 1`.
pub fn unit_injection() -> Event {
    Event::add_to_state(TimePoint::new(1.0).expect("finite"), "S1", "V1", 1.0)
}

/// S2 = scripted source of `q`, S1 = accumulator of its samples.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSetup {
    pub q: Polynomial,
    pub t_start: f64,
    pub x1: f64,
    pub x2: f64,
}

pub fn flow_model(s: &FlowSetup) -> Result<Model> {
    let mut model = Model::new();
    model.add_unit("S1", AccumulatorUnit::new(s.x1)?)?;
    model.add_unit(
        "S2",
        ScriptedFlowSourceUnit::new(s.q.clone(), TimePoint::new(s.t_start)?, s.x2)?,
    )?;
    model.connect("S2.y2", "S1.u1")?;
    Ok(model)
}
