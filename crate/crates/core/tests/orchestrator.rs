use costep::setups::{
    oscillator_model, reservoir_model, unit_injection, OscillatorSetup, ReservoirSetup,
};
use costep::sim::{Event, MacroStep, PortSpec, Role, SimulationUnit, TimePoint, Trace, VarKey};
use costep::stepctl::{FixedController, SequenceController, StepController};
use costep::units::{MassUnit, ReservoirPipeUnit, SpringDamperUnit};
use costep::{run, Cosimulation, Error, Model, RunConfig};

fn key(s: &str) -> VarKey {
    VarKey::parse(s).unwrap()
}

fn fixed(dt: f64) -> FixedController {
    FixedController::new(dt).unwrap()
}

fn run_oscillator(setup: &OscillatorSetup, t_end: f64, ctl: &mut dyn StepController) -> Trace {
    let model = oscillator_model(setup).unwrap();
    run(model, &RunConfig::new(0.0, t_end).unwrap(), ctl).unwrap()
}

#[test]
fn oscillator_initial_exchange() {
    let model = oscillator_model(&OscillatorSetup::default()).unwrap();
    let mut cosim = Cosimulation::new(model, &RunConfig::new(0.0, 1.0).unwrap()).unwrap();
    cosim.initialize().unwrap();
    let tr = cosim.trace();
    assert_eq!(tr.len(), 1);
    assert_eq!(tr.input(0, &key("S1.u1")).unwrap(), 0.0);
    assert_eq!(tr.input(0, &key("S2.u2")).unwrap(), -1.0);
    assert_eq!(tr.output(0, &key("S1.y1")).unwrap(), -1.0);
    assert_eq!(tr.output(0, &key("S2.y2")).unwrap(), 0.0);
}

#[test]
fn reservoir_initial_exchange() {
    let model = reservoir_model(&ReservoirSetup::default(), &[]).unwrap();
    let mut cosim = Cosimulation::new(model, &RunConfig::new(0.0, 1.0).unwrap()).unwrap();
    cosim.initialize().unwrap();
    let tr = cosim.trace();
    assert_eq!(tr.input(0, &key("S2.u2")).unwrap(), 0.6);
    assert!((tr.input(0, &key("S1.u1")).unwrap() - 0.2).abs() < 1e-15);
}

#[test]
fn unconnected_input_is_rejected() {
    let mut model = Model::new();
    model
        .add_unit("S1", SpringDamperUnit::new(1.0, 1.0, 1.0).unwrap())
        .unwrap();
    model
        .add_unit("S2", MassUnit::new(1.0, 1.0, 0.0).unwrap())
        .unwrap();
    model.connect("S1.y1", "S2.u2").unwrap();
    let err = Cosimulation::new(model, &RunConfig::new(0.0, 1.0).unwrap())
        .err()
        .unwrap();
    assert!(err.is_config(), "{err}");
    assert!(err.to_string().contains("S1.u1"));
}

#[test]
fn wiring_errors() {
    let mut model = Model::new();
    model
        .add_unit("S1", SpringDamperUnit::new(1.0, 1.0, 1.0).unwrap())
        .unwrap();
    model
        .add_unit("S2", MassUnit::new(1.0, 1.0, 0.0).unwrap())
        .unwrap();
    assert!(model
        .add_unit("S1", MassUnit::new(1.0, 0.0, 0.0).unwrap())
        .is_err());
    assert!(model.connect("S1.y1", "S1.u1").unwrap_err().is_config());
    // force into a velocity input
    assert!(model.connect("S1.y1", "S1.u1").is_err());
    let mut other = Model::new();
    other
        .add_unit("A", SpringDamperUnit::new(1.0, 1.0, 1.0).unwrap())
        .unwrap();
    other
        .add_unit("B", SpringDamperUnit::new(1.0, 1.0, 1.0).unwrap())
        .unwrap();
    let err = other.connect("A.y1", "B.u1").unwrap_err();
    assert!(err.to_string().contains("role mismatch"), "{err}");
    assert!(model.connect("S9.y1", "S2.u2").is_err());
    assert!(model.connect("S1.y7", "S2.u2").is_err());
    assert!(model.connect("S1y1", "S2.u2").is_err());
    model.connect("S1.y1", "S2.u2").unwrap();
    assert!(model.connect("S1.y1", "S2.u2").is_err());
}

#[test]
fn feedthrough_cycle_is_an_algebraic_loop() {
    let mut model = Model::new();
    model
        .add_unit("A", SpringDamperUnit::new(1.0, 1.0, 1.0).unwrap())
        .unwrap();
    model
        .add_unit("B", ReservoirPipeUnit::new(1.0, 1.0, 0.0).unwrap())
        .unwrap();
    model.connect("A.y1", "B.u2").unwrap();
    model.connect("B.y2", "A.u1").unwrap();
    let err = Cosimulation::new(model, &RunConfig::new(0.0, 1.0).unwrap())
        .err()
        .unwrap();
    assert!(err.to_string().contains("algebraic loop"), "{err}");
}

#[test]
fn one_fixed_step() {
    let tr = run_oscillator(&OscillatorSetup::default(), 0.1, &mut fixed(0.1));
    assert_eq!(tr.len(), 2);
    assert_eq!(tr.rows()[1].t, 0.1);
    assert_eq!(tr.state(1, &key("S1.x1")).unwrap(), 1.0);
    assert!((tr.state(1, &key("S2.x2")).unwrap() - 0.995).abs() < 1e-16);
    assert!((tr.state(1, &key("S2.v2")).unwrap() + 0.1).abs() < 1e-16);
}

#[test]
fn zero_length_run() {
    let tr = run_oscillator(&OscillatorSetup::default(), 0.0, &mut fixed(0.1));
    assert_eq!(tr.len(), 1);
    assert_eq!(tr.rows()[0].dt, None);
}

#[test]
fn rejects_reversed_time_span() {
    assert!(RunConfig::new(1.0, 0.0).is_err());
}

#[test]
fn injection_lands_exactly_and_adds_one() {
    let model = reservoir_model(&ReservoirSetup::default(), &[unit_injection()]).unwrap();
    // 0.03 does not divide 1 evenly, so the master has to clamp
    let tr = run(model, &RunConfig::new(0.0, 2.0).unwrap(), &mut fixed(0.03)).unwrap();
    let k = tr
        .rows()
        .iter()
        .position(|r| r.t == 1.0)
        .expect("row at t=1");
    let prev = &tr.rows()[k - 1];
    assert!(prev.clamped);
    let v1 = key("S1.V1");
    let before_injection =
        tr.state(k - 1, &v1).unwrap() - tr.input(k - 1, &key("S1.u1")).unwrap() * prev.dt.unwrap();
    assert_eq!(tr.state(k, &v1).unwrap(), before_injection + 1.0);
    // the pressure seen by S2 from t=1 on is the post-injection pressure
    assert_eq!(
        tr.input(k, &key("S2.u2")).unwrap(),
        tr.state(k, &v1).unwrap()
    );
    assert_eq!(tr.last().unwrap().t, 2.0);
}

#[test]
fn events_outside_horizon_are_rejected() {
    let late = Event::add_to_state(TimePoint::new(3.0).unwrap(), "S1", "V1", 1.0);
    let model = reservoir_model(&ReservoirSetup::default(), &[late]).unwrap();
    assert!(Cosimulation::new(model, &RunConfig::new(0.0, 2.0).unwrap()).is_err());
    let bad_state = Event::add_to_state(TimePoint::new(1.0).unwrap(), "S1", "V7", 1.0);
    assert!(reservoir_model(&ReservoirSetup::default(), &[bad_state]).is_err());
    // the mass has no injectable state, which surfaces when the event fires
    let mut model = oscillator_model(&OscillatorSetup::default()).unwrap();
    model
        .add_event(Event::add_to_state(
            TimePoint::new(0.5).unwrap(),
            "S2",
            "v2",
            1.0,
        ))
        .unwrap();
    let err = run(model, &RunConfig::new(0.0, 1.0).unwrap(), &mut fixed(0.1)).unwrap_err();
    assert!(matches!(err.root(), Error::Unsupported(_)), "{err}");
    assert!(err.to_string().contains("S2"));
}

#[test]
fn event_at_start_applies_before_first_exchange() {
    let e = Event::add_to_state(TimePoint::new(0.0).unwrap(), "S1", "V1", 0.5);
    let model = reservoir_model(&ReservoirSetup::default(), &[e]).unwrap();
    let tr = run(model, &RunConfig::new(0.0, 0.1).unwrap(), &mut fixed(0.1)).unwrap();
    assert_eq!(tr.state(0, &key("S1.V1")).unwrap(), 1.1);
    assert_eq!(tr.input(0, &key("S2.u2")).unwrap(), 1.1);
}

#[test]
fn deterministic_traces() {
    let a = run_oscillator(&OscillatorSetup::default(), 5.0, &mut fixed(0.07));
    let b = run_oscillator(&OscillatorSetup::default(), 5.0, &mut fixed(0.07));
    assert_eq!(a, b);
}

#[test]
fn unit_order_does_not_matter() {
    let forward = run_oscillator(&OscillatorSetup::default(), 3.0, &mut fixed(0.1));
    let mut model = Model::new();
    model
        .add_unit("S2", MassUnit::new(1.0, 1.0, 0.0).unwrap())
        .unwrap();
    model
        .add_unit("S1", SpringDamperUnit::new(1.0, 1.0, 1.0).unwrap())
        .unwrap();
    let velocity = model.connect("S2.y2", "S1.u1").unwrap();
    let force = model.connect("S1.y1", "S2.u2").unwrap();
    model.add_bond(force, velocity).unwrap();
    let reversed = run(model, &RunConfig::new(0.0, 3.0).unwrap(), &mut fixed(0.1)).unwrap();
    assert_eq!(forward, reversed);
}

#[test]
fn trace_invariants() {
    let steps: Vec<f64> = (0..60)
        .map(|i| 0.01 + 0.002 * ((i * 7) % 11) as f64)
        .collect();
    let t_end = steps.iter().fold(0.0, |t, dt| t + dt);
    let tr = run_oscillator(
        &OscillatorSetup::default(),
        t_end,
        &mut SequenceController::new(&steps).unwrap(),
    );
    assert_eq!(tr.len(), steps.len() + 1);
    for (n, w) in tr.rows().windows(2).enumerate() {
        assert_eq!(w[0].n, n);
        assert_eq!(w[1].t, w[0].t + w[0].dt.unwrap());
        // inputs held during a step equal the source outputs read at its start
        for (dst, src) in [("S1.u1", "S2.y2"), ("S2.u2", "S1.y1")] {
            assert_eq!(
                tr.input(n + 1, &key(dst)).unwrap(),
                tr.output(n + 1, &key(src)).unwrap()
            );
        }
    }
    assert_eq!(tr.schedule(), steps);
}

#[test]
fn records_selected_states_only() {
    let model = oscillator_model(&OscillatorSetup::default()).unwrap();
    let mut cfg = RunConfig::new(0.0, 0.2).unwrap();
    cfg.record_states = Some(vec![key("S2.x2"), key("S1.x1")]);
    let tr = run(model, &cfg, &mut fixed(0.1)).unwrap();
    assert_eq!(tr.state_keys(), &[key("S2.x2"), key("S1.x1")]);
    let model = oscillator_model(&OscillatorSetup::default()).unwrap();
    cfg.record_states = Some(vec![key("S2.q")]);
    assert!(Cosimulation::new(model, &cfg).is_err());
}

struct Zero;

impl StepController for Zero {
    fn next_step(&mut self, _: &Trace) -> costep::Result<f64> {
        Ok(0.0)
    }
}

#[test]
fn non_positive_step_is_controller_error() {
    let model = oscillator_model(&OscillatorSetup::default()).unwrap();
    let err = run(model, &RunConfig::new(0.0, 1.0).unwrap(), &mut Zero).unwrap_err();
    assert!(matches!(err, Error::Controller(_)), "{err}");
}

#[test]
fn step_below_time_resolution_is_controller_error() {
    let model = oscillator_model(&OscillatorSetup::default()).unwrap();
    let err = run(model, &RunConfig::new(1e6, 2e6).unwrap(), &mut fixed(1e-12)).unwrap_err();
    assert!(matches!(err, Error::Controller(_)), "{err}");
}

/// A unit whose step fails after a given time.
struct Brittle {
    t: f64,
}

const BRITTLE_IN: [PortSpec; 1] = [PortSpec::new("u", Role::Other)];
const BRITTLE_OUT: [PortSpec; 1] = [PortSpec::new("y", Role::Other)];

impl SimulationUnit for Brittle {
    fn kind(&self) -> &'static str {
        "brittle"
    }
    fn inputs(&self) -> &[PortSpec] {
        &BRITTLE_IN
    }
    fn outputs(&self) -> &[PortSpec] {
        &BRITTLE_OUT
    }
    fn state_names(&self) -> &[&'static str] {
        &[]
    }
    fn set_input(&mut self, _: &str, _: f64) -> costep::Result<()> {
        Ok(())
    }
    fn do_step(&mut self, t: TimePoint, dt: MacroStep) -> costep::Result<()> {
        if t.value() >= 0.25 {
            return Err(Error::State("broke".into()));
        }
        self.t = t.value() + dt.value();
        Ok(())
    }
    fn output(&self, _: &str) -> costep::Result<f64> {
        Ok(self.t)
    }
    fn state(&self, name: &str) -> costep::Result<f64> {
        Err(Error::Config(name.into()))
    }
}

#[test]
fn unit_failure_carries_unit_id() {
    let mut model = Model::new();
    model.add_unit("A", Brittle { t: 0.0 }).unwrap();
    model.add_unit("B", Brittle { t: 0.0 }).unwrap();
    model.connect("A.y", "B.u").unwrap();
    model.connect("B.y", "A.u").unwrap();
    let err = run(model, &RunConfig::new(0.0, 1.0).unwrap(), &mut fixed(0.1)).unwrap_err();
    match err {
        Error::Unit { unit, source } => {
            assert_eq!(unit, "A");
            assert_eq!(*source, Error::State("broke".into()));
        }
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn step_count_bound() {
    let model = reservoir_model(&ReservoirSetup::default(), &[unit_injection()]).unwrap();
    let tr = run(model, &RunConfig::new(0.0, 2.0).unwrap(), &mut fixed(0.03)).unwrap();
    let bound = (2.0f64 / 0.03).ceil() as usize + 1;
    assert!(tr.steps() <= bound, "{} > {bound}", tr.steps());
}

#[test]
fn step_by_step_matches_run() {
    let model = oscillator_model(&OscillatorSetup::default()).unwrap();
    let mut cosim = Cosimulation::new(model, &RunConfig::new(0.0, 0.5).unwrap()).unwrap();
    let mut ctl = fixed(0.1);
    let mut steps = 0;
    while cosim.step(&mut ctl).unwrap() {
        steps += 1;
    }
    assert!(cosim.is_finished());
    assert_eq!(steps + 1, cosim.trace().steps());
    let whole = run_oscillator(&OscillatorSetup::default(), 0.5, &mut fixed(0.1));
    assert_eq!(cosim.trace(), &whole);
}
