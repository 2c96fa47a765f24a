//! Explicit Jacobi co-simulation master.
//!
//! At every communication point the master reads outputs and copies them to
//! the connected inputs, asks the step controller for the next macro step,
//! and advances every unit over that step from the values exchanged at its
//! start. No unit observes another unit's mid-step state.

use crate::error::{Error, Result};
use crate::sim::{
    exact_step_to, Connection, Direction, Event, MacroStep, PortRef, PowerBond, Role,
    SimulationUnit, StateAction, TimePoint, Trace, TraceRow, VarKey,
};
use crate::stepctl::StepController;

/// Requested steps within this relative margin of the next target are
/// stretched or shrunk to land on it, so float drift never leaves a sliver step.
const SNAP_TOLERANCE: f64 = 1e-6;

struct UnitEntry {
    id: String,
    unit: Box<dyn SimulationUnit>,
}

/// Units, their wiring, power bonds and scheduled events.
#[derive(Default)]
pub struct Model {
    units: Vec<UnitEntry>,
    connections: Vec<Connection>,
    bonds: Vec<PowerBond>,
    events: Vec<Event>,
}

impl Model {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_unit(&mut self, id: &str, unit: impl SimulationUnit + 'static) -> Result<()> {
        if id.is_empty() || id.contains('.') || id.contains(',') {
            return Err(Error::config(format!("invalid unit id `{id}`")));
        }
        if self.units.iter().any(|e| e.id == id) {
            return Err(Error::config(format!("duplicate unit id `{id}`")));
        }
        let mut names: Vec<&str> = unit
            .inputs()
            .iter()
            .chain(unit.outputs())
            .map(|p| p.name)
            .chain(unit.state_names().iter().copied())
            .collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config(format!(
                "unit `{id}` declares the same name for more than one port or state"
            )));
        }
        self.units.push(UnitEntry {
            id: id.to_string(),
            unit: Box::new(unit),
        });
        Ok(())
    }

    pub fn unit(&self, id: &str) -> Option<&dyn SimulationUnit> {
        self.units
            .iter()
            .find(|e| e.id == id)
            .map(|e| e.unit.as_ref())
    }

    pub fn unit_ids(&self) -> impl Iterator<Item = &str> {
        self.units.iter().map(|e| e.id.as_str())
    }

    pub fn connections(&self) -> &[Connection] {
        &self.connections
    }

    pub fn bonds(&self) -> &[PowerBond] {
        &self.bonds
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    fn port_ref(&self, addr: &str, direction: Direction) -> Result<PortRef> {
        let key = VarKey::parse(addr)
            .ok_or_else(|| Error::config(format!("expected `unit.port`, got `{addr}`")))?;
        let unit = self
            .unit(&key.unit)
            .ok_or_else(|| Error::config(format!("unknown unit `{}`", key.unit)))?;
        let ports = match direction {
            Direction::Input => unit.inputs(),
            Direction::Output => unit.outputs(),
        };
        let spec = ports.iter().find(|p| p.name == key.name).ok_or_else(|| {
            let what = match direction {
                Direction::Input => "input",
                Direction::Output => "output",
            };
            Error::config(format!("unit `{}` has no {what} `{}`", key.unit, key.name))
        })?;
        Ok(PortRef {
            unit_id: key.unit,
            port_name: key.name,
            direction,
            role: spec.role,
        })
    }

    /// Wires output `source` (`unit.port`) to input `dest`.
    pub fn connect(&mut self, source: &str, dest: &str) -> Result<Connection> {
        let source = self.port_ref(source, Direction::Output)?;
        let dest = self.port_ref(dest, Direction::Input)?;
        if source.unit_id == dest.unit_id {
            return Err(Error::config(format!(
                "self-connection {source} -> {dest} is not allowed"
            )));
        }
        if source.role != dest.role {
            return Err(Error::config(format!(
                "role mismatch: {source} is {} but {dest} is {}",
                source.role, dest.role
            )));
        }
        if self.connections.iter().any(|c| c.dest == dest) {
            return Err(Error::config(format!("input {dest} is already connected")));
        }
        let conn = Connection { source, dest };
        self.connections.push(conn.clone());
        Ok(conn)
    }

    pub fn add_bond(&mut self, effort: Connection, flow: Connection) -> Result<()> {
        for conn in [&effort, &flow] {
            if !self.connections.contains(conn) {
                return Err(Error::config(format!(
                    "bond uses unknown connection {} -> {}",
                    conn.source, conn.dest
                )));
            }
        }
        if effort.source.role != Role::Effort || flow.source.role != Role::Flow {
            return Err(Error::config(
                "a power bond needs one effort and one flow connection",
            ));
        }
        if effort.source.unit_id != flow.dest.unit_id || effort.dest.unit_id != flow.source.unit_id
        {
            return Err(Error::config(
                "bond connections must run in opposite directions between the same units",
            ));
        }
        self.bonds.push(PowerBond { effort, flow });
        Ok(())
    }

    pub fn add_event(&mut self, event: Event) -> Result<()> {
        let unit = self.unit(&event.unit_id).ok_or_else(|| {
            Error::config(format!("event targets unknown unit `{}`", event.unit_id))
        })?;
        match &event.action {
            StateAction::AddToState { state, amount } => {
                if !unit.state_names().contains(&state.as_str()) {
                    return Err(Error::config(format!(
                        "event targets unknown state `{}.{state}`",
                        event.unit_id
                    )));
                }
                if !amount.is_finite() {
                    return Err(Error::config("event amount must be finite"));
                }
            }
        }
        self.events.push(event);
        Ok(())
    }

    /// Checks that every input is driven by exactly one connection.
    pub fn validate(&self) -> Result<()> {
        for entry in &self.units {
            for port in entry.unit.inputs() {
                let covered = self
                    .connections
                    .iter()
                    .filter(|c| c.dest.unit_id == entry.id && c.dest.port_name == port.name)
                    .count();
                if covered != 1 {
                    return Err(Error::config(format!(
                        "input {}.{} is not connected",
                        entry.id, port.name
                    )));
                }
            }
        }
        Ok(())
    }

    fn unit_index(&self, id: &str) -> usize {
        self.units
            .iter()
            .position(|e| e.id == id)
            .expect("connections only reference known units")
    }

    /// Orders connections so that an output with direct feedthrough is read
    /// only after the inputs it depends on have been refreshed.
    fn exchange_order(&self) -> Result<Vec<usize>> {
        let deps: Vec<Vec<usize>> = self
            .connections
            .iter()
            .map(|c| {
                let unit = &self.units[self.unit_index(&c.source.unit_id)].unit;
                unit.feedthrough(&c.source.port_name)
                    .iter()
                    .filter_map(|input| {
                        self.connections.iter().position(|d| {
                            d.dest.unit_id == c.source.unit_id && d.dest.port_name == *input
                        })
                    })
                    .collect()
            })
            .collect();
        let mut order = Vec::with_capacity(deps.len());
        let mut done = vec![false; deps.len()];
        while order.len() < deps.len() {
            let ready = (0..deps.len()).find(|&i| !done[i] && deps[i].iter().all(|&d| done[d]));
            match ready {
                Some(i) => {
                    done[i] = true;
                    order.push(i);
                }
                None => {
                    return Err(Error::config(
                        "algebraic loop: outputs with direct feedthrough form a cycle",
                    ))
                }
            }
        }
        Ok(order)
    }
}

/// Time span and recording options for a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub t_start: TimePoint,
    pub t_end: TimePoint,
    /// States to record; `None` records every declared state.
    pub record_states: Option<Vec<VarKey>>,
}

impl RunConfig {
    pub fn new(t_start: f64, t_end: f64) -> Result<Self> {
        let (t_start, t_end) = (TimePoint::new(t_start)?, TimePoint::new(t_end)?);
        if t_end < t_start {
            return Err(Error::config(format!(
                "end time {t_end} precedes start time {t_start}"
            )));
        }
        Ok(RunConfig {
            t_start,
            t_end,
            record_states: None,
        })
    }
}

/// A model being co-simulated, together with its trace.
pub struct Cosimulation {
    model: Model,
    t_end: f64,
    t: f64,
    order: Vec<usize>,
    events: Vec<Event>,
    next_event: usize,
    /// (unit index, port) for each recorded input, aligned with the trace.
    input_slots: Vec<(usize, String)>,
    held: Vec<f64>,
    output_slots: Vec<(usize, String)>,
    state_slots: Vec<(usize, String)>,
    trace: Trace,
    initialized: bool,
}

impl Cosimulation {
    pub fn new(model: Model, cfg: &RunConfig) -> Result<Self> {
        model.validate()?;
        let order = model.exchange_order()?;

        let (t_start, t_end) = (cfg.t_start.value(), cfg.t_end.value());
        let mut events = model.events.clone();
        if let Some(e) = events
            .iter()
            .find(|e| e.time.value() < t_start || e.time.value() > t_end)
        {
            return Err(Error::config(format!(
                "event at t={} lies outside [{t_start}, {t_end}]",
                e.time
            )));
        }
        events.sort_by(|a, b| a.time.value().total_cmp(&b.time.value()));

        let mut input_slots = Vec::new();
        let mut output_slots = Vec::new();
        let mut state_slots = Vec::new();
        for (i, entry) in model.units.iter().enumerate() {
            input_slots.extend(entry.unit.inputs().iter().map(|p| (i, p.name.to_string())));
            output_slots.extend(entry.unit.outputs().iter().map(|p| (i, p.name.to_string())));
            state_slots.extend(entry.unit.state_names().iter().map(|s| (i, s.to_string())));
        }
        if let Some(wanted) = &cfg.record_states {
            let mut picked = Vec::with_capacity(wanted.len());
            for key in wanted {
                let slot = state_slots
                    .iter()
                    .find(|(i, s)| model.units[*i].id == key.unit && *s == key.name)
                    .ok_or_else(|| Error::config(format!("cannot record unknown state `{key}`")))?;
                picked.push(slot.clone());
            }
            state_slots = picked;
        }
        // Key order is independent of the order in which units were added.
        let key_of = |(i, name): &(usize, String)| VarKey::new(&model.units[*i].id, name);
        let sort = |slots: &mut Vec<(usize, String)>| slots.sort_by_key(key_of);
        sort(&mut input_slots);
        sort(&mut output_slots);
        if cfg.record_states.is_none() {
            sort(&mut state_slots);
        }
        let trace = Trace::new(
            input_slots.iter().map(key_of).collect(),
            output_slots.iter().map(key_of).collect(),
            state_slots.iter().map(key_of).collect(),
        );

        Ok(Cosimulation {
            held: vec![f64::NAN; input_slots.len()],
            model,
            t_end,
            t: t_start,
            order,
            events,
            next_event: 0,
            input_slots,
            output_slots,
            state_slots,
            trace,
            initialized: false,
        })
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn into_trace(self) -> Trace {
        self.trace
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn is_finished(&self) -> bool {
        self.initialized && self.t >= self.t_end
    }

    /// Applies events due at the start time, performs the initial exchange
    /// and records row 0.
    pub fn initialize(&mut self) -> Result<()> {
        if self.initialized {
            return Err(Error::State("co-simulation already initialized".into()));
        }
        self.apply_due_events()?;
        self.exchange()?;
        self.record()?;
        self.initialized = true;
        Ok(())
    }

    /// Takes one macro step. Returns `false` once the end time is reached.
    pub fn step(&mut self, controller: &mut dyn StepController) -> Result<bool> {
        if !self.initialized {
            self.initialize()?;
        }
        if self.t >= self.t_end {
            return Ok(false);
        }
        let requested = controller.next_step(&self.trace)?;
        if !(requested.is_finite() && requested > 0.0) {
            return Err(Error::Controller(format!(
                "controller returned invalid step {requested} at t={}",
                self.t
            )));
        }
        let target = self
            .events
            .get(self.next_event)
            .map_or(self.t_end, |e| e.time.value().min(self.t_end));
        let (dt, t_next) = if self.t + requested == target {
            (requested, target)
        } else if requested * (1.0 + SNAP_TOLERANCE) >= target - self.t {
            (exact_step_to(self.t, target), target)
        } else {
            (requested, self.t + requested)
        };
        if t_next <= self.t {
            return Err(Error::Controller(format!(
                "step {requested} is below the time resolution at t={}",
                self.t
            )));
        }
        let n = self.trace.len() - 1;
        self.trace.set_step(n, dt, dt != requested);

        let (t_now, step) = (TimePoint::new(self.t)?, MacroStep::new(dt)?);
        for entry in &mut self.model.units {
            entry
                .unit
                .do_step(t_now, step)
                .map_err(|e| e.in_unit(&entry.id))?;
        }
        self.t = t_next;
        self.apply_due_events()?;
        self.exchange()?;
        self.record()?;
        Ok(self.t < self.t_end)
    }

    /// Runs to the end time and returns the trace so far.
    pub fn run(&mut self, controller: &mut dyn StepController) -> Result<&Trace> {
        while self.step(controller)? {}
        Ok(&self.trace)
    }

    fn apply_due_events(&mut self) -> Result<()> {
        while let Some(event) = self.events.get(self.next_event) {
            if event.time.value() > self.t {
                break;
            }
            let idx = self.model.unit_index(&event.unit_id);
            let entry = &mut self.model.units[idx];
            match &event.action {
                StateAction::AddToState { state, amount } => entry
                    .unit
                    .add_to_state(state, *amount)
                    .map_err(|e| e.in_unit(&entry.id))?,
            }
            self.next_event += 1;
        }
        Ok(())
    }

    fn exchange(&mut self) -> Result<()> {
        for &c in &self.order {
            let conn = &self.model.connections[c];
            let src = self.model.unit_index(&conn.source.unit_id);
            let value = self.model.units[src]
                .unit
                .output(&conn.source.port_name)
                .map_err(|e| e.in_unit(&conn.source.unit_id))?;
            let dst = self.model.unit_index(&conn.dest.unit_id);
            self.model.units[dst]
                .unit
                .set_input(&conn.dest.port_name, value)
                .map_err(|e| e.in_unit(&conn.dest.unit_id))?;
            if let Some(slot) = self
                .input_slots
                .iter()
                .position(|(i, p)| *i == dst && *p == conn.dest.port_name)
            {
                self.held[slot] = value;
            }
        }
        Ok(())
    }

    fn record(&mut self) -> Result<()> {
        let units = &self.model.units;
        let outputs = self
            .output_slots
            .iter()
            .map(|(i, p)| {
                units[*i]
                    .unit
                    .output(p)
                    .map_err(|e| e.in_unit(&units[*i].id))
            })
            .collect::<Result<Vec<_>>>()?;
        let states = self
            .state_slots
            .iter()
            .map(|(i, s)| {
                units[*i]
                    .unit
                    .state(s)
                    .map_err(|e| e.in_unit(&units[*i].id))
            })
            .collect::<Result<Vec<_>>>()?;
        self.trace.push(TraceRow {
            n: self.trace.len(),
            t: self.t,
            dt: None,
            clamped: false,
            inputs: self.held.clone(),
            outputs,
            states,
        })
    }
}

/// Builds, initializes and runs a co-simulation in one call.
pub fn run(model: Model, cfg: &RunConfig, controller: &mut dyn StepController) -> Result<Trace> {
    let mut cosim = Cosimulation::new(model, cfg)?;
    cosim.run(controller)?;
    Ok(cosim.into_trace())
}
