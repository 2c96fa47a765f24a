//! Closed-form predictions of the discrepancy between a zero-order-hold
//! integral of a sampled flow and the exact integral of the same flow.

use crate::analysis::sum::cumulative;
use crate::error::{Error, Result};
use crate::units::Polynomial;

/// Flow samples `q[n] = q(t[n])` at communication points with the step sizes between them.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrace {
    times: Vec<f64>,
    q: Vec<f64>,
    schedule: Vec<f64>,
}

impl FlowTrace {
    /// `schedule[n]` is the step from `times[n]` to `times[n + 1]`.
    pub fn new(times: Vec<f64>, q: Vec<f64>, schedule: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.len() != q.len() || schedule.len() + 1 != times.len() {
            return Err(Error::argument(format!(
                "flow trace needs n samples and n-1 steps, got {} times, {} samples, {} steps",
                times.len(),
                q.len(),
                schedule.len()
            )));
        }
        for (i, &dt) in schedule.iter().enumerate() {
            let gap = times[i + 1] - times[i];
            if !(dt > 0.0 && dt.is_finite()) || (gap - dt).abs() > 1e-9 * dt.max(gap.abs()) {
                return Err(Error::argument(format!(
                    "step {i} of size {dt} does not match sample times {} and {}",
                    times[i],
                    times[i + 1]
                )));
            }
        }
        if q.iter().chain(&times).any(|x| !x.is_finite()) {
            return Err(Error::argument("flow trace values must be finite"));
        }
        Ok(FlowTrace { times, q, schedule })
    }

    /// Derives the step sizes from consecutive sample times.
    pub fn from_samples(times: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        let schedule = times.windows(2).map(|w| w[1] - w[0]).collect();
        Self::new(times, q, schedule)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn schedule(&self) -> &[f64] {
        &self.schedule
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }
}

/// Source of the derivatives `q^(k)` (k = 1, 2, ...) at the start of each step.
/// Returning `None` means they are not analytically known there.
pub trait FlowDerivatives {
    fn derivatives(&self, step: usize, t: f64) -> Option<Vec<f64>>;
}

impl FlowDerivatives for Polynomial {
    fn derivatives(&self, _step: usize, t: f64) -> Option<Vec<f64>> {
        Some(self.derivatives_at(t))
    }
}

/// A flow that is linear within each step, with the given slope per step.
/// The oscillator's velocity under a held force is of this kind.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearFlow {
    pub slopes: Vec<f64>,
}

impl FlowDerivatives for PiecewiseLinearFlow {
    fn derivatives(&self, step: usize, _t: f64) -> Option<Vec<f64>> {
        self.slopes.get(step).map(|&s| vec![s])
    }
}

/// Exact discrepancy series
/// `dx[n] = dx0 - sum_{i<n} sum_{k>=1} q^(k)[i] dt[i]^(k+1) / (k+1)!`.
/// Only finite derivative series are supported.
pub fn predict_exact_sum(
    flow: &FlowTrace,
    derivs: &dyn FlowDerivatives,
    dx0: f64,
) -> Result<Vec<f64>> {
    let mut terms = Vec::with_capacity(flow.schedule.len());
    for (i, (&t, &dt)) in flow.times.iter().zip(&flow.schedule).enumerate() {
        let d = derivs.derivatives(i, t).ok_or_else(|| {
            Error::Unsupported(format!("flow derivatives unknown at step {i} (t={t})"))
        })?;
        // dt^(k+1)/(k+1)! built up incrementally, starting at k=1
        let mut factor = dt * dt / 2.0;
        let mut term = 0.0;
        for (k, &dk) in d.iter().enumerate() {
            term += dk * factor;
            factor *= dt / (k + 3) as f64;
        }
        terms.push(-term);
    }
    Ok(cumulative(dx0, terms))
}

/// Leading-order discrepancy `-1/2 sum_{i<n} (q[i+1] - q[i]) dt[i]`, assuming `dx[0] = 0`.
pub fn predict_leading(flow: &FlowTrace) -> Vec<f64> {
    let terms = flow
        .q
        .windows(2)
        .zip(&flow.schedule)
        .map(|(w, &dt)| -0.5 * (w[1] - w[0]) * dt);
    cumulative(0.0, terms)
}

/// Leading-order discrepancy for a flow that jumps at communication points,
/// as happens when the flow depends directly on a held input. `step_end[i]`
/// is the flow just before the end of step `i`, i.e. before the jump.
pub fn predict_leading_with_jumps(flow: &FlowTrace, step_end: &[f64]) -> Result<Vec<f64>> {
    if step_end.len() != flow.schedule.len() {
        return Err(Error::argument(format!(
            "expected {} step-end flows, got {}",
            flow.schedule.len(),
            step_end.len()
        )));
    }
    let terms = flow
        .q
        .iter()
        .zip(step_end)
        .zip(&flow.schedule)
        .map(|((&start, &end), &dt)| -0.5 * (end - start) * dt);
    Ok(cumulative(0.0, terms))
}

/// The leading-order series rewritten by summation by parts:
/// `1/2 q[0] dt[0] + 1/2 sum_{i=1}^{n-1} q[i] (dt[i] - dt[i-1]) - 1/2 q[n] dt[n-1]`.
///
/// Each entry is evaluated from its own closed form rather than as a running
/// difference, so it serves as an independent route to [`predict_leading`].
pub fn predict_regrouped(flow: &FlowTrace) -> Vec<f64> {
    let q = &flow.q;
    let dt = &flow.schedule;
    let inner = cumulative(0.0, (1..dt.len()).map(|i| 0.5 * q[i] * (dt[i] - dt[i - 1])));
    let mut out = Vec::with_capacity(q.len());
    out.push(0.0);
    for n in 1..q.len() {
        out.push(0.5 * q[0] * dt[0] + inner[n - 1] - 0.5 * q[n] * dt[n - 1]);
    }
    out
}

/// Long-run oscillator discrepancy when the step changes once, from `dt1` to
/// `dt2`, at a point where the mass velocity is `v2_k`:
/// `1/2 v2[0] dt1 + 1/2 v2[K] (dt2 - dt1)`.
pub fn oscillator_single_change_limit(v2_0: f64, v2_k: f64, dt1: f64, dt2: f64) -> f64 {
    0.5 * v2_0 * dt1 + 0.5 * v2_k * (dt2 - dt1)
}
