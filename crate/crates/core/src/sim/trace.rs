use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::sim::port::VarKey;

/// One communication point.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub n: usize,
    pub t: f64,
    /// Step taken from this point, `None` on the final row.
    pub dt: Option<f64>,
    /// Whether `dt` was cut short to land on an event or the end time.
    pub clamped: bool,
    /// Inputs as held during step `n`.
    pub inputs: Vec<f64>,
    /// Outputs as read at `t[n]`.
    pub outputs: Vec<f64>,
    pub states: Vec<f64>,
}

/// Record of every communication point of a run. All rows share the key sets
/// stored on the trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    input_keys: Vec<VarKey>,
    output_keys: Vec<VarKey>,
    state_keys: Vec<VarKey>,
    rows: Vec<TraceRow>,
}

impl Trace {
    pub fn new(input_keys: Vec<VarKey>, output_keys: Vec<VarKey>, state_keys: Vec<VarKey>) -> Self {
        Trace {
            input_keys,
            output_keys,
            state_keys,
            rows: Vec::new(),
        }
    }

    pub fn input_keys(&self) -> &[VarKey] {
        &self.input_keys
    }

    pub fn output_keys(&self) -> &[VarKey] {
        &self.output_keys
    }

    pub fn state_keys(&self) -> &[VarKey] {
        &self.state_keys
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    /// Number of macro steps taken.
    pub fn steps(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }

    pub(crate) fn push(&mut self, row: TraceRow) -> Result<()> {
        if row.n != self.rows.len()
            || row.inputs.len() != self.input_keys.len()
            || row.outputs.len() != self.output_keys.len()
            || row.states.len() != self.state_keys.len()
        {
            return Err(Error::State(format!("malformed trace row {}", row.n)));
        }
        self.rows.push(row);
        Ok(())
    }

    pub(crate) fn set_step(&mut self, n: usize, dt: f64, clamped: bool) {
        let row = &mut self.rows[n];
        row.dt = Some(dt);
        row.clamped = clamped;
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    /// Step sizes of all completed steps (one fewer than rows).
    pub fn schedule(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.dt).collect()
    }

    fn column(keys: &[VarKey], key: &VarKey, kind: &str) -> Result<usize> {
        keys.iter()
            .position(|k| k == key)
            .ok_or_else(|| Error::config(format!("trace does not record {kind} `{key}`")))
    }

    pub fn input_column(&self, key: &VarKey) -> Result<usize> {
        Self::column(&self.input_keys, key, "input")
    }

    pub fn output_column(&self, key: &VarKey) -> Result<usize> {
        Self::column(&self.output_keys, key, "output")
    }

    pub fn state_column(&self, key: &VarKey) -> Result<usize> {
        Self::column(&self.state_keys, key, "state")
    }

    pub fn input(&self, n: usize, key: &VarKey) -> Result<f64> {
        let c = self.input_column(key)?;
        Ok(self.row(n)?.inputs[c])
    }

    pub fn output(&self, n: usize, key: &VarKey) -> Result<f64> {
        let c = self.output_column(key)?;
        Ok(self.row(n)?.outputs[c])
    }

    pub fn state(&self, n: usize, key: &VarKey) -> Result<f64> {
        let c = self.state_column(key)?;
        Ok(self.row(n)?.states[c])
    }

    pub fn input_series(&self, key: &VarKey) -> Result<Vec<f64>> {
        let c = self.input_column(key)?;
        Ok(self.rows.iter().map(|r| r.inputs[c]).collect())
    }

    pub fn output_series(&self, key: &VarKey) -> Result<Vec<f64>> {
        let c = self.output_column(key)?;
        Ok(self.rows.iter().map(|r| r.outputs[c]).collect())
    }

    pub fn state_series(&self, key: &VarKey) -> Result<Vec<f64>> {
        let c = self.state_column(key)?;
        Ok(self.rows.iter().map(|r| r.states[c]).collect())
    }

    fn row(&self, n: usize) -> Result<&TraceRow> {
        self.rows
            .get(n)
            .ok_or_else(|| Error::argument(format!("trace has no row {n}")))
    }

    /// Writes the trace as CSV: `n,t,dt`, then inputs, outputs and states
    /// named `unit.name`. Reals use 17 significant digits; the final row has
    /// an empty `dt`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let mut header = vec!["n".to_string(), "t".to_string(), "dt".to_string()];
        header.extend(
            self.input_keys
                .iter()
                .chain(&self.output_keys)
                .chain(&self.state_keys)
                .map(ToString::to_string),
        );
        writeln!(w, "{}", header.join(","))?;
        for row in &self.rows {
            let mut fields = vec![row.n.to_string(), fmt_real(row.t)];
            fields.push(row.dt.map(fmt_real).unwrap_or_default());
            fields.extend(
                row.inputs
                    .iter()
                    .chain(&row.outputs)
                    .chain(&row.states)
                    .map(|&v| fmt_real(v)),
            );
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }
}

/// Formats a real with 17 significant digits, enough to round-trip any f64.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}
