//! Energy-residual PI step size control.
//!
//! The residual on a power bond compares the power that was held constant
//! over the last macro step with the power at its end. Residuals are
//! normalized against mixed absolute/relative tolerances, and a PI law maps
//! the normalized error to a bounded step size ratio.

use crate::error::{Error, Result};
use crate::sim::{PowerBond, Trace};
use crate::stepctl::StepController;

/// Floor applied to normalized errors before taking powers.
pub const EPS_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PiParams {
    pub dt0: f64,
    pub kp: f64,
    pub ki: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Largest allowed relative reduction from one step to the next.
    pub theta_min: f64,
    /// Largest allowed relative increase from one step to the next.
    pub theta_max: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for PiParams {
    fn default() -> Self {
        PiParams {
            dt0: 0.1,
            kp: 0.2,
            ki: 0.1,
            dt_min: 1e-5,
            dt_max: 0.1,
            theta_min: 0.2,
            theta_max: 1.2,
            abs_tol: 1e-6,
            rel_tol: 1e-6,
        }
    }
}

impl PiParams {
    pub fn validate(&self) -> Result<()> {
        let all_finite = [
            self.dt0,
            self.kp,
            self.ki,
            self.dt_min,
            self.dt_max,
            self.theta_min,
            self.theta_max,
            self.abs_tol,
            self.rel_tol,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !all_finite {
            return Err(Error::config("PI parameters must be finite"));
        }
        if !(0.0 < self.dt_min && self.dt_min <= self.dt0 && self.dt0 <= self.dt_max) {
            return Err(Error::config(format!(
                "PI steps need 0 < dt_min <= dt0 <= dt_max, got {}, {}, {}",
                self.dt_min, self.dt0, self.dt_max
            )));
        }
        if !(0.0 < self.theta_min && self.theta_min < 1.0 && 1.0 < self.theta_max) {
            return Err(Error::config(format!(
                "PI ratios need 0 < theta_min < 1 < theta_max, got {} and {}",
                self.theta_min, self.theta_max
            )));
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::config("PI tolerances must be positive"));
        }
        Ok(())
    }
}

/// Energy residual on `bond` over the step ending at communication point `n`:
/// `dt[n-1] * (P[n-1] - P[n])` with `P = effort * flow`.
pub fn ecco_residual(bond: &PowerBond, trace: &Trace, n: usize) -> Result<f64> {
    Ok(bond_residual(bond, trace, n)?.residual)
}

/// Residual together with the energy scale used to normalize it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BondResidual {
    pub residual: f64,
    /// `dt * max(|P[n]|, |P[n-1]|)`.
    pub energy_scale: f64,
}

pub fn bond_residual(bond: &PowerBond, trace: &Trace, n: usize) -> Result<BondResidual> {
    if n == 0 {
        return Err(Error::argument(
            "energy residual is undefined at the first communication point",
        ));
    }
    let dt = trace.rows()[n - 1]
        .dt
        .ok_or_else(|| Error::State(format!("step {} has no recorded size", n - 1)))?;
    let effort = bond.effort.source.key();
    let flow = bond.flow.source.key();
    let power =
        |i: usize| -> Result<f64> { Ok(trace.output(i, &effort)? * trace.output(i, &flow)?) };
    let (before, after) = (power(n - 1)?, power(n)?);
    Ok(BondResidual {
        residual: dt * (before - after),
        energy_scale: dt * before.abs().max(after.abs()),
    })
}

/// Root mean square of the residuals, each divided by `abs_tol + rel_tol * scale`.
pub fn normalize_error(residuals: &[BondResidual], abs_tol: f64, rel_tol: f64) -> f64 {
    if residuals.is_empty() {
        return 0.0;
    }
    let sum_sq: f64 = residuals
        .iter()
        .map(|r| {
            let e = r.residual / (abs_tol + rel_tol * r.energy_scale);
            e * e
        })
        .sum();
    (sum_sq / residuals.len() as f64).sqrt()
}

/// PI step size law: `theta = eps^-ki * (eps_prev / eps)^kp`, with theta and
/// the resulting step both clamped to their configured ranges.
pub fn pi_next(eps: f64, eps_prev: f64, dt_prev: f64, p: &PiParams) -> f64 {
    let eps = eps.max(EPS_FLOOR);
    let eps_prev = eps_prev.max(EPS_FLOOR);
    let theta = eps.powf(-p.ki) * (eps_prev / eps).powf(p.kp);
    let theta = theta.clamp(p.theta_min, p.theta_max);
    (theta * dt_prev).clamp(p.dt_min, p.dt_max)
}

/// Stateful PI controller over all power bonds of a model.
#[derive(Debug, Clone)]
pub struct PiController {
    params: PiParams,
    bonds: Vec<PowerBond>,
    eps_prev: f64,
    last_eps: Option<f64>,
}

impl PiController {
    pub fn new(params: PiParams, bonds: Vec<PowerBond>) -> Result<Self> {
        params.validate()?;
        if bonds.is_empty() {
            return Err(Error::config(
                "the PI controller needs at least one power bond",
            ));
        }
        Ok(PiController {
            params,
            bonds,
            eps_prev: 1.0,
            last_eps: None,
        })
    }

    pub fn params(&self) -> &PiParams {
        &self.params
    }

    /// Normalized error from the most recent call, if any step has been taken.
    pub fn last_error(&self) -> Option<f64> {
        self.last_eps
    }
}

impl StepController for PiController {
    fn next_step(&mut self, trace: &Trace) -> Result<f64> {
        let n = trace
            .len()
            .checked_sub(1)
            .ok_or_else(|| Error::Controller("trace has no communication points".into()))?;
        if n == 0 {
            self.eps_prev = 1.0;
            return Ok(self.params.dt0);
        }
        let residuals = self
            .bonds
            .iter()
            .map(|b| bond_residual(b, trace, n))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Controller(e.to_string()))?;
        let eps = normalize_error(&residuals, self.params.abs_tol, self.params.rel_tol);
        let dt_prev = trace.rows()[n - 1].dt.unwrap_or(self.params.dt0);
        let dt = pi_next(eps, self.eps_prev, dt_prev, &self.params);
        self.eps_prev = eps;
        self.last_eps = Some(eps);
        Ok(dt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{Connection, Direction, PortRef, Role, TraceRow, VarKey};

    fn port(unit: &str, name: &str, direction: Direction, role: Role) -> PortRef {
        PortRef {
            unit_id: unit.into(),
            port_name: name.into(),
            direction,
            role,
        }
    }

    fn oscillator_bond() -> PowerBond {
        PowerBond {
            effort: Connection {
                source: port("S1", "y1", Direction::Output, Role::Effort),
                dest: port("S2", "u2", Direction::Input, Role::Effort),
            },
            flow: Connection {
                source: port("S2", "y2", Direction::Output, Role::Flow),
                dest: port("S1", "u1", Direction::Input, Role::Flow),
            },
        }
    }

    fn two_row_trace(e: [f64; 2], f: [f64; 2], dt: f64) -> Trace {
        let mut tr = Trace::new(
            vec![],
            vec![VarKey::new("S1", "y1"), VarKey::new("S2", "y2")],
            vec![],
        );
        for n in 0..2 {
            tr.push(TraceRow {
                n,
                t: n as f64 * dt,
                dt: None,
                clamped: false,
                inputs: vec![],
                outputs: vec![e[n], f[n]],
                states: vec![],
            })
            .unwrap();
        }
        tr.set_step(0, dt, false);
        tr
    }

    #[test]
    fn residual_worked_example() {
        let tr = two_row_trace([-1.0, -1.0005], [0.0, -0.1], 0.1);
        let r = ecco_residual(&oscillator_bond(), &tr, 1).unwrap();
        assert!((r + 0.010005).abs() < 1e-15, "{r}");
        assert!(matches!(
            ecco_residual(&oscillator_bond(), &tr, 0),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn residual_vanishes_at_steady_state() {
        let tr = two_row_trace([0.7, 0.7], [-0.3, -0.3], 0.05);
        assert_eq!(ecco_residual(&oscillator_bond(), &tr, 1).unwrap(), 0.0);
    }

    #[test]
    fn residual_is_linear_in_effort() {
        let base = two_row_trace([0.4, -0.9], [1.5, 0.25], 0.02);
        let scaled = two_row_trace([0.4 * 3.0, -0.9 * 3.0], [1.5, 0.25], 0.02);
        let a = ecco_residual(&oscillator_bond(), &base, 1).unwrap();
        let b = ecco_residual(&oscillator_bond(), &scaled, 1).unwrap();
        assert!((b - 3.0 * a).abs() <= 1e-15 * b.abs());
    }

    #[test]
    fn table_defaults() {
        let p = PiParams::default();
        assert_eq!(
            (p.dt0, p.kp, p.ki, p.dt_min, p.dt_max),
            (0.1, 0.2, 0.1, 1e-5, 0.1)
        );
        assert_eq!(
            (p.theta_min, p.theta_max, p.abs_tol, p.rel_tol),
            (0.2, 1.2, 1e-6, 1e-6)
        );
        p.validate().unwrap();
    }

    #[test]
    fn on_tolerance_keeps_step() {
        let p = PiParams::default();
        assert_eq!(pi_next(1.0, 1.0, 0.05, &p), 0.05);
    }

    #[test]
    fn large_error_reduces_at_most_eighty_percent() {
        let p = PiParams::default();
        assert!((pi_next(1e12, 1.0, 0.05, &p) - 0.01).abs() < 1e-17);
    }

    #[test]
    fn growth_capped_by_dt_max() {
        let p = PiParams::default();
        assert_eq!(pi_next(0.0, 1.0, 0.1, &p), 0.1);
        assert!((pi_next(0.0, 0.0, 0.05, &p) - 0.06).abs() < 1e-16);
    }

    #[test]
    fn floors_avoid_division_by_zero() {
        let p = PiParams::default();
        let dt = pi_next(0.0, 0.0, 1e-3, &p);
        assert!(dt.is_finite() && dt > 0.0);
        assert_eq!(pi_next(1e30, 0.0, 1e-5, &p), 1e-5);
    }

    #[test]
    fn normalization() {
        let zero = BondResidual {
            residual: 0.0,
            energy_scale: 3.0,
        };
        assert_eq!(normalize_error(&[zero], 1e-6, 1e-6), 0.0);
        let unit = BondResidual {
            residual: 1e-6,
            energy_scale: 0.0,
        };
        assert_eq!(normalize_error(&[unit], 1e-6, 1e-6), 1.0);
        let r = BondResidual {
            residual: 3e-5,
            energy_scale: 2.0,
        };
        let one = normalize_error(&[r], 1e-6, 1e-6);
        assert!((normalize_error(&[r, r], 1e-6, 1e-6) - one).abs() <= 1e-15 * one);
    }

    #[test]
    fn parameter_validation() {
        let bad = PiParams {
            dt0: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = PiParams {
            theta_max: 0.9,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert!(PiController::new(PiParams::default(), vec![]).is_err());
    }
}
