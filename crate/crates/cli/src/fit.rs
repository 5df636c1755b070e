//! Least-squares fits of an energy trace against two decay families:
//! `A exp(-2 omega t)` and `(C / log(2 + t))^2`. Both are fitted in log
//! space and reported side by side; nothing is concluded about which one
//! the continuum system follows.

use crate::error::{CliError, CliResult};

pub const MIN_ROWS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFit {
    /// Amplitude decay rate; the energy decays like `exp(-2 omega t)`.
    pub omega: f64,
    pub amplitude: f64,
    /// Root mean square of `log e - log model`.
    pub rms_log_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogFit {
    pub c: f64,
    pub rms_log_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FitReport {
    /// Every energy sample is zero.
    AtEquilibrium,
    Fitted { rows: usize, exponential: ExpFit, logarithmic: LogFit },
}

fn rms(v: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut n) = (0.0, 0usize);
    for x in v {
        s += x * x;
        n += 1;
    }
    (s / n as f64).sqrt()
}

pub fn fit_decay(t: &[f64], energy: &[f64]) -> CliResult<FitReport> {
    if t.len() != energy.len() {
        return Err(CliError::Validation("time and energy columns differ in length".into()));
    }
    if energy.iter().all(|&e| e == 0.0) {
        return Ok(FitReport::AtEquilibrium);
    }
    if t.len() < MIN_ROWS {
        return Err(CliError::Validation(format!("need at least {MIN_ROWS} rows, got {}", t.len())));
    }
    if let Some(i) = energy.iter().position(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(CliError::Validation(format!("energy must be positive and finite, row {i} has {}", energy[i])));
    }
    if t.iter().any(|&x| !(x > -1.0) || !x.is_finite()) {
        return Err(CliError::Validation("times must be finite and greater than -1".into()));
    }
    let n = t.len() as f64;
    let loge: Vec<f64> = energy.iter().map(|e| e.ln()).collect();

    let tm = t.iter().sum::<f64>() / n;
    let lm = loge.iter().sum::<f64>() / n;
    let sxx: f64 = t.iter().map(|x| (x - tm) * (x - tm)).sum();
    if !(sxx > 0.0) {
        return Err(CliError::Validation("times must not all coincide".into()));
    }
    let sxy: f64 = t.iter().zip(&loge).map(|(x, y)| (x - tm) * (y - lm)).sum();
    let slope = sxy / sxx;
    let intercept = lm - slope * tm;
    let exponential = ExpFit {
        omega: -slope / 2.0,
        amplitude: intercept.exp(),
        rms_log_residual: rms(t.iter().zip(&loge).map(|(x, y)| y - (intercept + slope * x))),
    };

    // log e = 2 log C - 2 log log(2 + t)
    let shape: Vec<f64> = t.iter().map(|x| -2.0 * (2.0 + x).ln().ln()).collect();
    let two_log_c = loge.iter().zip(&shape).map(|(y, s)| y - s).sum::<f64>() / n;
    let logarithmic = LogFit {
        c: (two_log_c / 2.0).exp(),
        rms_log_residual: rms(loge.iter().zip(&shape).map(|(y, s)| y - s - two_log_c)),
    };
    Ok(FitReport::Fitted { rows: t.len(), exponential, logarithmic })
}

impl FitReport {
    pub fn describe(&self) -> String {
        match self {
            FitReport::AtEquilibrium => "energy is identically zero: already at equilibrium\n".into(),
            FitReport::Fitted { rows, exponential: e, logarithmic: l } => format!(
                "rows = {rows}\n\
                 exp family   E(t) = A exp(-2 omega t): omega = {:.6e}, A = {:.6e}, rms log residual = {:.6e}\n\
                 log family   E(t) = (C / log(2 + t))^2: C = {:.6e}, rms log residual = {:.6e}\n",
                e.omega, e.amplitude, e.rms_log_residual, l.c, l.rms_log_residual
            ),
        }
    }
}
