//! The `run`, `predict` and `list` subcommands.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use costep::analysis::{
    measure_flow_discrepancy, measure_oscillator_discrepancy, measure_reservoir_discrepancy,
    oscillator_single_change_limit, predict_leading, predict_regrouped, DiscrepancySeries,
    FlowProbe, FlowTrace, OscillatorProbe, ReservoirProbe,
};
use costep::sim::{fmt_real, Trace, VarKey};
use costep::units::Polynomial;

use crate::builtins::{self, BUILTINS};
use crate::config::{ControllerSpec, Experiment, ModelSpec};
use crate::error::{CliError, CliResult};

/// Environment variable naming the base output directory.
pub const OUT_ENV: &str = "COSTEP_OUT";
const DEFAULT_OUT: &str = "costep-out";

/// `--out` if given, otherwise `<base>/<name>` where the base comes from
/// `COSTEP_OUT` or defaults to `costep-out`.
pub fn output_dir(out: Option<&Path>, name: &str) -> PathBuf {
    match out {
        Some(dir) => dir.to_path_buf(),
        None => std::env::var_os(OUT_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
            .join(name),
    }
}

/// Looks `arg` up among the built-ins first, then as a config file path.
pub fn load_experiment(arg: &str) -> CliResult<Experiment> {
    if let Some(b) = builtins::find(arg) {
        return Experiment::parse(b.name, &format!("builtin:{}", b.name), b.source);
    }
    let path = Path::new(arg);
    if !path.is_file() {
        return Err(CliError::Input(format!(
            "'{arg}' is neither a built-in experiment nor a config file (see `costep list`)"
        )));
    }
    let source = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let name = path
        .file_stem()
        .map_or_else(|| "experiment".into(), |s| s.to_string_lossy().into_owned());
    Experiment::parse(&name, arg, &source)
}

/// Result of a completed run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub dir: PathBuf,
    pub summary: Vec<(String, String)>,
}

pub fn cmd_run(arg: &str, out: Option<&Path>) -> CliResult<RunReport> {
    let experiment = load_experiment(arg)?;
    let mut prepared = experiment.prepare()?;
    let trace = costep::run(prepared.model, &prepared.run, prepared.controller.as_mut())?;

    let config = &experiment.config;
    let (label, series) = match config.model.get_ref() {
        ModelSpec::Oscillator(s) => {
            let probe = OscillatorProbe {
                mass: s.m,
                ..Default::default()
            };
            ("dx", measure_oscillator_discrepancy(&trace, &probe)?)
        }
        ModelSpec::Reservoirs(s) => {
            let probe = ReservoirProbe {
                c: s.c,
                r: s.r,
                ..Default::default()
            };
            let series = measure_reservoir_discrepancy(&trace, &prepared.events, &probe)?;
            ("dV", series)
        }
        ModelSpec::GeneralFlow(s) => {
            let q = Polynomial::new(s.q.clone())?;
            (
                "dx",
                measure_flow_discrepancy(&trace, &q, &FlowProbe::default())?,
            )
        }
    };

    let last = trace
        .last()
        .ok_or_else(|| CliError::Input("run produced an empty trace".into()))?;
    let final_point = series
        .last()
        .ok_or_else(|| CliError::Input("run produced no discrepancy points".into()))?;
    let mut summary = vec![
        ("experiment".to_string(), experiment.name.clone()),
        ("model".into(), model_kind(config.model.get_ref()).into()),
        (
            "controller".into(),
            controller_kind(config.controller.get_ref()).into(),
        ),
        ("final_t".into(), fmt_real(last.t)),
        ("steps".into(), trace.steps().to_string()),
        (format!("final_{label}"), fmt_real(final_point.measured)),
        (
            format!("final_{label}_predicted_leading"),
            fmt_real(final_point.predicted_leading),
        ),
    ];
    if let Some(exact) = final_point.predicted_exact {
        summary.push((format!("final_{label}_predicted_exact"), fmt_real(exact)));
    }
    if let Some(limit) = closed_form_limit(&experiment, &trace, &series)? {
        summary.push((format!("{label}_closed_form_limit"), fmt_real(limit)));
    }

    let dir = output_dir(out, &experiment.name);
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    write_file(&dir.join("trace.csv"), |w| trace.write_csv(w))?;
    write_file(&dir.join("discrepancy.csv"), |w| series.write_csv(w))?;
    write_file(&dir.join("summary.txt"), |w| {
        summary
            .iter()
            .try_for_each(|(k, v)| writeln!(w, "{k} = {v}"))
    })?;
    Ok(RunReport { dir, summary })
}

fn model_kind(m: &ModelSpec) -> &'static str {
    match m {
        ModelSpec::Oscillator(_) => "oscillator",
        ModelSpec::Reservoirs(_) => "reservoirs",
        ModelSpec::GeneralFlow(_) => "general-flow",
    }
}

fn controller_kind(c: &ControllerSpec) -> &'static str {
    match c {
        ControllerSpec::Fixed(_) => "fixed",
        ControllerSpec::Scheduled(_) => "scheduled",
        ControllerSpec::Bangbang(_) => "bangbang",
        ControllerSpec::Pi(_) => "pi",
    }
}

/// Long-run oscillator discrepancy for a fixed step or a single step change,
/// valid once the motion has decayed.
fn closed_form_limit(
    experiment: &Experiment,
    trace: &Trace,
    series: &DiscrepancySeries,
) -> CliResult<Option<f64>> {
    let ModelSpec::Oscillator(_) = experiment.config.model.get_ref() else {
        return Ok(None);
    };
    let dx0 = series.points[0].measured;
    let v2 = trace.state_series(&VarKey::new("S2", "v2"))?;
    let limit = match experiment.config.controller.get_ref() {
        ControllerSpec::Fixed(f) => Some(oscillator_single_change_limit(v2[0], 0.0, f.dt, f.dt)),
        ControllerSpec::Scheduled(s) if s.pieces.len() == 2 => {
            let ((_, dt1), (from, dt2)) = (s.pieces[0], s.pieces[1]);
            let tol = 1e-9 * dt1;
            trace
                .times()
                .iter()
                .position(|&t| t >= from - tol)
                .map(|k| oscillator_single_change_limit(v2[0], v2[k], dt1, dt2))
        }
        _ => None,
    };
    Ok(limit.map(|l| l + dx0))
}

/// Predicted discrepancies written by `predict`.
#[derive(Debug, Clone)]
pub struct PredictReport {
    pub path: PathBuf,
    pub final_leading: f64,
    pub final_regrouped: f64,
}

/// Reads `t` and the `flow_column` samples from a CSV, takes the steps from
/// a `dt` column when present (as in exported traces) or else from the time
/// differences, and writes the leading-order and regrouped predictions.
pub fn cmd_predict(
    csv_path: &Path,
    flow_column: &str,
    out: Option<&Path>,
) -> CliResult<PredictReport> {
    let flow = read_flow_csv(csv_path, flow_column)?;
    let leading = predict_leading(&flow);
    let regrouped = predict_regrouped(&flow);

    let stem = csv_path
        .file_stem()
        .map_or_else(|| "flow".into(), |s| s.to_string_lossy().into_owned());
    let dir = output_dir(out, &format!("predict-{stem}"));
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let path = dir.join("prediction.csv");
    write_file(&path, |w| {
        writeln!(w, "t,predicted_leading,predicted_regrouped")?;
        for ((t, a), b) in flow.times().iter().zip(&leading).zip(&regrouped) {
            writeln!(w, "{},{},{}", fmt_real(*t), fmt_real(*a), fmt_real(*b))?;
        }
        Ok(())
    })?;
    Ok(PredictReport {
        path,
        final_leading: *leading.last().expect("non-empty flow"),
        final_regrouped: *regrouped.last().expect("non-empty flow"),
    })
}

fn read_flow_csv(path: &Path, flow_column: &str) -> CliResult<FlowTrace> {
    let origin = path.display().to_string();
    let malformed = |line: u64, msg: String| CliError::Input(format!("{origin}:{line}: {msg}"));
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(&origin, e))?;
    let headers = reader.headers().map_err(|e| csv_error(&origin, e))?.clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let t_col = column("t").ok_or_else(|| malformed(1, "missing column 't'".into()))?;
    let q_col = column(flow_column)
        .ok_or_else(|| malformed(1, format!("missing flow column '{flow_column}'")))?;
    let dt_col = column("dt");

    let (mut times, mut q, mut dt) = (Vec::new(), Vec::new(), Vec::new());
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(&origin, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |c: usize, name: &str| -> CliResult<Option<f64>> {
            let raw = record.get(c).unwrap_or("");
            if raw.is_empty() {
                return Ok(None);
            }
            match raw.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(Some(x)),
                _ => Err(malformed(
                    line,
                    format!("'{raw}' in column '{name}' is not a finite number"),
                )),
            }
        };
        let need = |c: usize, name: &str| {
            field(c, name)?.ok_or_else(|| malformed(line, format!("empty '{name}' value")))
        };
        times.push(need(t_col, "t")?);
        q.push(need(q_col, flow_column)?);
        if let Some(c) = dt_col {
            dt.push((line, field(c, "dt")?));
        }
    }
    if times.is_empty() {
        return Err(malformed(1, "no samples".into()));
    }

    let flow = match dt_col {
        None => FlowTrace::from_samples(times, q),
        Some(_) => {
            let n = times.len();
            let mut schedule = Vec::with_capacity(n - 1);
            for &(line, step) in &dt[..n - 1] {
                schedule.push(step.ok_or_else(|| malformed(line, "empty 'dt' value".into()))?);
            }
            FlowTrace::new(times, q, schedule)
        }
    };
    flow.map_err(|e| CliError::Input(format!("{origin}: {e}")))
}

fn csv_error(origin: &str, e: csv::Error) -> CliError {
    match e.position() {
        Some(p) => CliError::Input(format!("{origin}:{}: {e}", p.line())),
        None => match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::io(origin, io),
            kind => CliError::Input(format!("{origin}: {kind:?}")),
        },
    }
}

fn write_file(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(path, e))
}

/// Built-in experiment names with one-line descriptions.
pub fn cmd_list() -> String {
    let width = BUILTINS.iter().map(|b| b.name.len()).max().unwrap_or(0);
    BUILTINS
        .iter()
        .map(|b| format!("{:width$}  {}\n", b.name, b.description))
        .collect()
}
