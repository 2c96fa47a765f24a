//! Experiment configs: TOML documents with a `[model]` table, a
//! `[controller]` table, optional `[[events]]`, and run bounds.
//!
//! ```toml
//! t_end = 40.0
//!
//! [model]
//! kind = "oscillator"
//! v2 = 1.0
//!
//! [controller]
//! kind = "fixed"
//! dt = 0.1
//! ```
//!
//! Every error is reported against the line it comes from.

use std::ops::Range;

use costep::setups::{
    flow_model, oscillator_model, reservoir_model, FlowSetup, OscillatorSetup, ReservoirSetup,
};
use costep::sim::{Event, TimePoint, VarKey};
use costep::stepctl::{
    BangBangController, BangBangParams, FixedController, PiController, PiParams,
    ScheduledController, StepController, StepSchedule,
};
use costep::units::Polynomial;
use costep::{Model, RunConfig};
use serde::Deserialize;
use toml::Spanned;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub description: Option<String>,
    pub t_start: Option<Spanned<f64>>,
    pub t_end: Spanned<f64>,
    pub model: Spanned<ModelSpec>,
    pub controller: Spanned<ControllerSpec>,
    #[serde(default)]
    pub events: Vec<Spanned<EventSpec>>,
    pub record_states: Option<Spanned<Vec<String>>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelSpec {
    Oscillator(OscillatorSpec),
    Reservoirs(ReservoirSpec),
    GeneralFlow(FlowSpec),
}

/// S1 = spring-damper (`k`, `c`, `x1`), S2 = mass (`m`, `x2`, `v2`).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OscillatorSpec {
    pub m: f64,
    pub c: f64,
    pub k: f64,
    pub x1: f64,
    pub x2: f64,
    pub v2: f64,
}

impl Default for OscillatorSpec {
    fn default() -> Self {
        let s = OscillatorSetup::default();
        OscillatorSpec {
            m: s.m,
            c: s.c,
            k: s.k,
            x1: s.x1,
            x2: s.x2,
            v2: s.v2,
        }
    }
}

/// S1 = first reservoir (`v1`), S2 = second reservoir with the pipe (`v2`).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReservoirSpec {
    pub c: f64,
    pub r: f64,
    pub v1: f64,
    pub v2: f64,
}

impl Default for ReservoirSpec {
    fn default() -> Self {
        let s = ReservoirSetup::default();
        ReservoirSpec {
            c: s.c,
            r: s.r,
            v1: s.v1,
            v2: s.v2,
        }
    }
}

/// S2 = polynomial flow source (ascending coefficients `q`), S1 = accumulator.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    pub q: Vec<f64>,
    #[serde(default)]
    pub x1: f64,
    #[serde(default)]
    pub x2: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ControllerSpec {
    Fixed(FixedSpec),
    Scheduled(ScheduledSpec),
    Bangbang(BangBangSpec),
    Pi(PiSpec),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedSpec {
    pub dt: f64,
}

/// `pieces = [[from_time, dt], ...]`, sorted by start time.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduledSpec {
    pub pieces: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BangBangSpec {
    pub monitor: String,
    pub threshold: f64,
    pub dt_small: f64,
    pub dt_large: f64,
}

impl Default for BangBangSpec {
    fn default() -> Self {
        let p = BangBangParams::default();
        BangBangSpec {
            monitor: p.monitor.to_string(),
            threshold: p.threshold,
            dt_small: p.dt_small,
            dt_large: p.dt_large,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PiSpec {
    pub dt0: f64,
    pub kp: f64,
    pub ki: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for PiSpec {
    fn default() -> Self {
        let p = PiParams::default();
        PiSpec {
            dt0: p.dt0,
            kp: p.kp,
            ki: p.ki,
            dt_min: p.dt_min,
            dt_max: p.dt_max,
            theta_min: p.theta_min,
            theta_max: p.theta_max,
            abs_tol: p.abs_tol,
            rel_tol: p.rel_tol,
        }
    }
}

impl From<&PiSpec> for PiParams {
    fn from(s: &PiSpec) -> Self {
        PiParams {
            dt0: s.dt0,
            kp: s.kp,
            ki: s.ki,
            dt_min: s.dt_min,
            dt_max: s.dt_max,
            theta_min: s.theta_min,
            theta_max: s.theta_max,
            abs_tol: s.abs_tol,
            rel_tol: s.rel_tol,
        }
    }
}

/// Adds `amount` to state `state` of unit `unit` at time `time`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSpec {
    pub time: f64,
    pub unit: String,
    pub state: String,
    pub amount: f64,
}

/// A parsed config together with its origin, for error reporting.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub name: String,
    pub origin: String,
    source: String,
    pub config: ExperimentConfig,
}

/// Everything needed to run an experiment.
pub struct Prepared {
    pub model: Model,
    pub run: RunConfig,
    pub controller: Box<dyn StepController>,
    pub events: Vec<Event>,
}

impl Experiment {
    pub fn parse(name: &str, origin: &str, source: &str) -> CliResult<Self> {
        let config: ExperimentConfig = toml::from_str(source).map_err(|e| CliError::Config {
            origin: origin.to_string(),
            line: e.span().map_or(1, |s| line_of(source, s.start)),
            message: e.message().trim_end().to_string(),
        })?;
        Ok(Experiment {
            name: name.to_string(),
            origin: origin.to_string(),
            source: source.to_string(),
            config,
        })
    }

    fn error_at(&self, span: Range<usize>, message: impl std::fmt::Display) -> CliError {
        CliError::Config {
            origin: self.origin.clone(),
            line: line_of(&self.source, span.start),
            message: message.to_string(),
        }
    }

    fn anchored<T>(&self, span: Range<usize>, r: costep::Result<T>) -> CliResult<T> {
        r.map_err(|e| self.error_at(span, e))
    }

    /// Builds the model, run bounds and controller. Every failure is
    /// reported as a config error on the line of the offending table or key.
    pub fn prepare(&self) -> CliResult<Prepared> {
        let c = &self.config;
        let t_start = c.t_start.as_ref().map_or(0.0, |t| *t.get_ref());
        let mut run = self.anchored(c.t_end.span(), RunConfig::new(t_start, *c.t_end.get_ref()))?;

        let mut events = Vec::with_capacity(c.events.len());
        for e in &c.events {
            let spec = e.get_ref();
            let time = self.anchored(e.span(), TimePoint::new(spec.time))?;
            if !spec.amount.is_finite() {
                return Err(self.error_at(e.span(), "event amount must be finite"));
            }
            events.push(Event::add_to_state(
                time,
                &spec.unit,
                &spec.state,
                spec.amount,
            ));
        }

        let model = match c.model.get_ref() {
            ModelSpec::Oscillator(s) => {
                if !events.is_empty() {
                    let span = c.events[0].span();
                    return Err(self.error_at(span, "the oscillator model takes no events"));
                }
                oscillator_model(&OscillatorSetup {
                    m: s.m,
                    c: s.c,
                    k: s.k,
                    x1: s.x1,
                    x2: s.x2,
                    v2: s.v2,
                })
            }
            ModelSpec::Reservoirs(s) => reservoir_model(
                &ReservoirSetup {
                    c: s.c,
                    r: s.r,
                    v1: s.v1,
                    v2: s.v2,
                },
                &[],
            ),
            ModelSpec::GeneralFlow(s) => {
                if !events.is_empty() {
                    let span = c.events[0].span();
                    return Err(self.error_at(span, "the general-flow model takes no events"));
                }
                Polynomial::new(s.q.clone()).and_then(|q| {
                    flow_model(&FlowSetup {
                        q,
                        t_start,
                        x1: s.x1,
                        x2: s.x2,
                    })
                })
            }
        };
        let mut model = self.anchored(c.model.span(), model)?;
        for (spec, event) in c.events.iter().zip(&events) {
            self.anchored(spec.span(), model.add_event(event.clone()))?;
        }
        self.anchored(c.model.span(), model.validate())?;

        if let Some(keys) = &c.record_states {
            let mut parsed = Vec::with_capacity(keys.get_ref().len());
            for k in keys.get_ref() {
                let key = VarKey::parse(k).ok_or_else(|| {
                    self.error_at(keys.span(), format!("'{k}' is not of the form unit.state"))
                })?;
                parsed.push(key);
            }
            run.record_states = Some(parsed);
        }

        let span = c.controller.span();
        let controller: Box<dyn StepController> = match c.controller.get_ref() {
            ControllerSpec::Fixed(s) => Box::new(self.anchored(span, FixedController::new(s.dt))?),
            ControllerSpec::Scheduled(s) => {
                let schedule = self.anchored(span.clone(), StepSchedule::new(s.pieces.clone()))?;
                if schedule.start() > t_start {
                    return Err(self.error_at(
                        span,
                        format!(
                            "schedule starts at {} but the run starts at {t_start}",
                            schedule.start()
                        ),
                    ));
                }
                Box::new(ScheduledController::new(schedule))
            }
            ControllerSpec::Bangbang(s) => {
                let monitor = VarKey::parse(&s.monitor).ok_or_else(|| {
                    self.error_at(
                        span.clone(),
                        format!("'{}' is not of the form unit.port", s.monitor),
                    )
                })?;
                let unit = model.unit(&monitor.unit);
                if !unit.is_some_and(|u| u.outputs().iter().any(|p| p.name == monitor.name)) {
                    return Err(self.error_at(span, format!("no output {monitor} to monitor")));
                }
                Box::new(self.anchored(
                    span,
                    BangBangController::new(BangBangParams {
                        monitor,
                        threshold: s.threshold,
                        dt_small: s.dt_small,
                        dt_large: s.dt_large,
                    }),
                )?)
            }
            ControllerSpec::Pi(s) => {
                if model.bonds().is_empty() {
                    return Err(self.error_at(span, "PI control needs a model with a power bond"));
                }
                let bonds = model.bonds().to_vec();
                Box::new(self.anchored(span, PiController::new(PiParams::from(s), bonds))?)
            }
        };

        Ok(Prepared {
            model,
            run,
            controller,
            events,
        })
    }
}

/// 1-based line number of byte offset `at`.
fn line_of(source: &str, at: usize) -> usize {
    source[..at.min(source.len())].matches('\n').count() + 1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(src: &str) -> CliResult<Experiment> {
        Experiment::parse("t", "t.toml", src)
    }

    fn line(err: CliError) -> usize {
        match err {
            CliError::Config { line, .. } => line,
            other => panic!("expected a config error, got {other}"),
        }
    }

    const BASE: &str =
        "t_end = 1.0\n[model]\nkind = \"oscillator\"\n[controller]\nkind = \"fixed\"\ndt = 0.1\n";

    #[test]
    fn minimal_config_prepares() {
        let p = parse(BASE).unwrap().prepare().unwrap();
        assert_eq!(p.run.t_end.value(), 1.0);
        assert!(p.events.is_empty());
    }

    #[test]
    fn unknown_key_is_anchored() {
        // keys inside a tagged table are reported on the table header
        let src = BASE.replace("dt = 0.1", "dt = 0.1\nfoo = 2");
        let err = parse(&src).unwrap_err();
        assert!(err.to_string().contains("foo"), "{err}");
        assert_eq!(line(err), 4);
        let src = BASE.replace("t_end = 1.0", "t_end = 1.0\nbar = 1");
        assert_eq!(line(parse(&src).unwrap_err()), 2);
    }

    #[test]
    fn unknown_kind_is_anchored() {
        let src = BASE.replace("\"fixed\"", "\"magic\"");
        assert_eq!(line(parse(&src).unwrap_err()), 5);
    }

    #[test]
    fn invalid_step_is_anchored_to_controller() {
        let src = BASE.replace("dt = 0.1", "dt = -0.1");
        let err = parse(&src).unwrap().prepare().err().unwrap();
        assert_eq!(line(err), 4);
    }

    #[test]
    fn bad_event_is_anchored() {
        let src = "t_end = 2.0\n[model]\nkind = \"reservoirs\"\n[controller]\nkind = \"fixed\"\ndt = 0.1\n\
                   [[events]]\ntime = 1.0\nunit = \"S1\"\nstate = \"V1\"\namount = 1.0\n\
                   [[events]]\ntime = 1.5\nunit = \"S7\"\nstate = \"V1\"\namount = 1.0\n";
        let err = parse(src).unwrap().prepare().err().unwrap();
        assert_eq!(line(err), 12);
    }

    #[test]
    fn end_before_start_is_anchored() {
        let src = BASE.replace("t_end = 1.0", "t_start = 2.0\nt_end = 1.0");
        let err = parse(&src).unwrap().prepare().err().unwrap();
        assert_eq!(line(err), 2);
    }
}
