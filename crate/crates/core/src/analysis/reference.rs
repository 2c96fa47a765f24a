use crate::error::{Error, Result};

/// Parameters and initial state of a free damped oscillator `m x'' + c x' + k x = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    pub m: f64,
    pub c: f64,
    pub k: f64,
    pub x0: f64,
    pub v0: f64,
}

impl Default for OscillatorParams {
    fn default() -> Self {
        OscillatorParams {
            m: 1.0,
            c: 1.0,
            k: 1.0,
            x0: 1.0,
            v0: 0.0,
        }
    }
}

/// Analytic position and velocity of an underdamped oscillator at time `t`
/// (measured from the initial state).
pub fn reference_oscillator(p: &OscillatorParams, t: f64) -> Result<(f64, f64)> {
    if !(p.m > 0.0 && p.k > 0.0 && p.c >= 0.0) {
        return Err(Error::argument("oscillator needs m > 0, k > 0, c >= 0"));
    }
    let gamma = p.c / (2.0 * p.m);
    let omega0_sq = p.k / p.m;
    let omega_d_sq = omega0_sq - gamma * gamma;
    if omega_d_sq <= 0.0 {
        return Err(Error::Unsupported(
            "reference solution covers the underdamped case only".into(),
        ));
    }
    let wd = omega_d_sq.sqrt();
    let decay = (-gamma * t).exp();
    let (s, c) = (wd * t).sin_cos();
    let x = decay * (p.x0 * c + (p.v0 + gamma * p.x0) / wd * s);
    let v = decay * (p.v0 * c - (omega0_sq * p.x0 + gamma * p.v0) / wd * s);
    Ok((x, v))
}
