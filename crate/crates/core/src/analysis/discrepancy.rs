//! Measured discrepancies between duplicated integral states, read from traces.

use std::io::{self, Write};

use crate::analysis::predict::{
    predict_exact_sum, predict_leading, predict_leading_with_jumps, FlowTrace, PiecewiseLinearFlow,
};
use crate::error::{Error, Result};
use crate::sim::{fmt_real, Event, StateAction, Trace, VarKey};
use crate::units::{pipe_flow, Polynomial};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscrepancyPoint {
    pub t: f64,
    pub measured: f64,
    pub predicted_exact: Option<f64>,
    pub predicted_leading: f64,
}

/// Measured discrepancy at every communication point, with predictions.
/// Predictions are offset by the measured initial discrepancy.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiscrepancySeries {
    pub points: Vec<DiscrepancyPoint>,
}

impl DiscrepancySeries {
    fn assemble(
        times: &[f64],
        measured: Vec<f64>,
        exact: Option<Vec<f64>>,
        leading: Vec<f64>,
    ) -> Self {
        let points = times
            .iter()
            .enumerate()
            .map(|(n, &t)| DiscrepancyPoint {
                t,
                measured: measured[n],
                predicted_exact: exact.as_ref().map(|e| e[n]),
                predicted_leading: leading[n],
            })
            .collect();
        DiscrepancySeries { points }
    }

    pub fn last(&self) -> Option<&DiscrepancyPoint> {
        self.points.last()
    }

    pub fn has_exact(&self) -> bool {
        self.points.iter().any(|p| p.predicted_exact.is_some())
    }

    pub fn measured(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.measured).collect()
    }

    /// CSV with columns `t,measured,predicted_leading` and, when available,
    /// `predicted_exact`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let exact = self.has_exact();
        if exact {
            writeln!(w, "t,measured,predicted_leading,predicted_exact")?;
        } else {
            writeln!(w, "t,measured,predicted_leading")?;
        }
        for p in &self.points {
            write!(
                w,
                "{},{},{}",
                fmt_real(p.t),
                fmt_real(p.measured),
                fmt_real(p.predicted_leading)
            )?;
            if exact {
                write!(
                    w,
                    ",{}",
                    p.predicted_exact.map(fmt_real).unwrap_or_default()
                )?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn difference(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn offset(series: Vec<f64>, by: f64) -> Vec<f64> {
    series.into_iter().map(|x| x + by).collect()
}

/// Flow samples from a recorded input, with the recorded schedule.
pub fn flow_from_input(trace: &Trace, key: &VarKey) -> Result<FlowTrace> {
    FlowTrace::new(trace.times(), trace.input_series(key)?, trace.schedule())
}

/// Flow samples from a recorded output, with the recorded schedule.
pub fn flow_from_output(trace: &Trace, key: &VarKey) -> Result<FlowTrace> {
    FlowTrace::new(trace.times(), trace.output_series(key)?, trace.schedule())
}

/// Unit ids and mass of an oscillator co-simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorProbe {
    pub spring: String,
    pub mass_unit: String,
    pub mass: f64,
}

impl Default for OscillatorProbe {
    fn default() -> Self {
        OscillatorProbe {
            spring: "S1".into(),
            mass_unit: "S2".into(),
            mass: 1.0,
        }
    }
}

/// `dx[n] = x1[n] - x2[n]`. The exact prediction uses the held force
/// (`q' = u2 / m` within each step); the leading-order one uses the velocity
/// samples seen by the spring-damper.
pub fn measure_oscillator_discrepancy(
    trace: &Trace,
    probe: &OscillatorProbe,
) -> Result<DiscrepancySeries> {
    let x1 = trace.state_series(&VarKey::new(&probe.spring, "x1"))?;
    let x2 = trace.state_series(&VarKey::new(&probe.mass_unit, "x2"))?;
    let measured = difference(&x1, &x2);
    let dx0 = measured.first().copied().unwrap_or(0.0);

    let flow = flow_from_input(trace, &VarKey::new(&probe.spring, "u1"))?;
    let force = trace.input_series(&VarKey::new(&probe.mass_unit, "u2"))?;
    let slopes = PiecewiseLinearFlow {
        slopes: force.iter().map(|f| f / probe.mass).collect(),
    };
    let exact = predict_exact_sum(&flow, &slopes, dx0)?;
    let leading = offset(predict_leading(&flow), dx0);
    Ok(DiscrepancySeries::assemble(
        flow.times(),
        measured,
        Some(exact),
        leading,
    ))
}

/// Unit ids and parameters of a two-reservoir co-simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirProbe {
    pub reservoir: String,
    pub pipe: String,
    pub c: f64,
    pub r: f64,
}

impl Default for ReservoirProbe {
    fn default() -> Self {
        ReservoirProbe {
            reservoir: "S1".into(),
            pipe: "S2".into(),
            c: 1.0,
            r: 1.0,
        }
    }
}

/// `dV[n] = V(t[n]) - V1[n] - V2[n]`, where `V` is the total volume put into
/// the system: the initial volumes plus every injection that has happened by `t[n]`.
///
/// The pipe flow depends directly on the held pressure, so it jumps at every
/// communication point. The leading-order prediction therefore uses the flow
/// just before each jump, reconstructed from the held pressure and the
/// pre-event volume at the end of the step.
pub fn measure_reservoir_discrepancy(
    trace: &Trace,
    injected: &[Event],
    probe: &ReservoirProbe,
) -> Result<DiscrepancySeries> {
    let v1 = trace.state_series(&VarKey::new(&probe.reservoir, "V1"))?;
    let v2 = trace.state_series(&VarKey::new(&probe.pipe, "V2"))?;
    let times = trace.times();
    let t0 = *times
        .first()
        .ok_or_else(|| Error::argument("empty trace"))?;

    let volume_events: Vec<(&Event, f64, bool)> = injected
        .iter()
        .filter_map(|e| match &e.action {
            StateAction::AddToState { state, amount } => {
                let into_v1 = e.unit_id == probe.reservoir && state == "V1";
                let into_v2 = e.unit_id == probe.pipe && state == "V2";
                (into_v1 || into_v2).then_some((e, *amount, into_v2))
            }
        })
        .collect();

    let initial_total = v1[0] + v2[0];
    let measured: Vec<f64> = times
        .iter()
        .enumerate()
        .map(|(n, &t)| {
            let added: f64 = volume_events
                .iter()
                .filter(|(e, _, _)| e.time.value() > t0 && e.time.value() <= t)
                .map(|(_, a, _)| a)
                .sum();
            initial_total + added - v1[n] - v2[n]
        })
        .collect();

    let flow = flow_from_output(trace, &VarKey::new(&probe.pipe, "y2"))?;
    let pressure = trace.input_series(&VarKey::new(&probe.pipe, "u2"))?;
    let step_end: Vec<f64> = (0..flow.schedule().len())
        .map(|i| {
            let t_end = times[i + 1];
            let v2_injected: f64 = volume_events
                .iter()
                .filter(|(e, _, into_v2)| *into_v2 && e.time.value() == t_end)
                .map(|(_, a, _)| a)
                .sum();
            pipe_flow(v2[i + 1] - v2_injected, pressure[i], probe.c, probe.r)
        })
        .collect();
    let dv0 = measured[0];
    let leading = offset(predict_leading_with_jumps(&flow, &step_end)?, dv0);
    Ok(DiscrepancySeries::assemble(&times, measured, None, leading))
}

/// Unit ids for the general setup: a scripted flow source and an accumulator.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowProbe {
    pub accumulator: String,
    pub source: String,
}

impl Default for FlowProbe {
    fn default() -> Self {
        FlowProbe {
            accumulator: "S1".into(),
            source: "S2".into(),
        }
    }
}

/// `dx[n] = x1[n] - x2[n]` for an accumulator fed by a polynomial flow source.
pub fn measure_flow_discrepancy(
    trace: &Trace,
    q: &Polynomial,
    probe: &FlowProbe,
) -> Result<DiscrepancySeries> {
    let x1 = trace.state_series(&VarKey::new(&probe.accumulator, "x1"))?;
    let x2 = trace.state_series(&VarKey::new(&probe.source, "x2"))?;
    let measured = difference(&x1, &x2);
    let dx0 = measured.first().copied().unwrap_or(0.0);
    let flow = flow_from_input(trace, &VarKey::new(&probe.accumulator, "u1"))?;
    let exact = predict_exact_sum(&flow, q, dx0)?;
    let leading = offset(predict_leading(&flow), dx0);
    Ok(DiscrepancySeries::assemble(
        flow.times(),
        measured,
        Some(exact),
        leading,
    ))
}
