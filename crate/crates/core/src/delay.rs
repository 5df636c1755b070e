//! Delay-line transport `tau u_t + u_rho = 0`, `u(0, t) = z(L, t)`.
//!
//! [`DelayLine`] is the production path: with `dt = tau / M` the transport
//! is an exact index shift along characteristics. [`HistoryBuffer`] is an
//! independent oracle that stores `(t, z(L, t))` samples and reads the
//! delayed value back by linear interpolation.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Relative tolerance on `dt * M == tau`.
const LOCK_TOL: f64 = 1e-10;

/// Shifts the line by one cell: `u'_j = u_{j-1}`, `u'_0 = inflow`.
pub fn advance_delay(u: &mut [f64], inflow: f64) {
    if u.is_empty() {
        return;
    }
    u.copy_within(0..u.len() - 1, 1);
    u[0] = inflow;
}

/// Last cell of the line, `u_M ~ y_t(L, t - tau)`.
pub fn delayed_value(u: &[f64]) -> f64 {
    *u.last().expect("empty delay line")
}

/// Linear interpolation in a history buffer.
pub fn oracle_lookup(buffer: &HistoryBuffer, t_query: f64) -> Result<f64> {
    buffer.lookup(t_query)
}

/// Source of the delayed boundary velocity for the stepper.
pub trait DelayFeedback {
    /// `z(L, t - tau)` for the level at time `t`. Every level strictly
    /// before `t` has already been pushed.
    fn lookback(&self, t: f64) -> Result<f64>;
    /// Records the boundary velocity of the level at time `t`.
    fn push(&mut self, t: f64, velocity: f64) -> Result<()>;
    /// Writes `out[j] ~ z(L, t - tau rho_j)`, `rho_j = j / (out.len() - 1)`,
    /// for the most recently pushed level `t`.
    fn profile(&self, t: f64, out: &mut [f64]) -> Result<()>;
    /// Overwrites the value of the newest level.
    fn seed_inflow(&mut self, velocity: f64);
}

/// Shift-register delay line with `M + 1` cells and step `tau / M`.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayLine {
    cells: Vec<f64>,
    tau: f64,
    dt: f64,
    newest: f64,
}

impl DelayLine {
    /// `cells[j]` holds `z(L, t0 - tau j / M)`.
    pub fn new(cells: Vec<f64>, tau: f64, t0: f64) -> Result<Self> {
        if cells.len() < 2 {
            return Err(Error::DegenerateGrid { what: "M", value: cells.len().saturating_sub(1), min: 1 });
        }
        let dt = tau / (cells.len() - 1) as f64;
        Ok(Self { cells, tau, dt, newest: t0 })
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn step(&self) -> f64 {
        self.dt
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Advances by one characteristic step; `dt` must equal `tau / M`.
    pub fn advance(&mut self, inflow: f64, dt: f64) -> Result<()> {
        if (dt - self.dt).abs() > LOCK_TOL * self.dt {
            return Err(Error::CharacteristicLock { dt, expected: self.dt });
        }
        advance_delay(&mut self.cells, inflow);
        self.newest += dt;
        Ok(())
    }

    pub fn delayed(&self) -> f64 {
        delayed_value(&self.cells)
    }
}

impl DelayFeedback for DelayLine {
    fn lookback(&self, t: f64) -> Result<f64> {
        let ahead = libm::round((t - self.newest) / self.dt);
        let m = self.cells.len() - 1;
        match ahead as i64 {
            0 => Ok(self.cells[m]),
            1 => Ok(self.cells[m - 1]),
            _ => Err(Error::CharacteristicLock { dt: t - self.newest, expected: self.dt }),
        }
    }

    fn push(&mut self, t: f64, velocity: f64) -> Result<()> {
        self.advance(velocity, t - self.newest)
    }

    fn profile(&self, _t: f64, out: &mut [f64]) -> Result<()> {
        out.copy_from_slice(&self.cells);
        Ok(())
    }

    fn seed_inflow(&mut self, velocity: f64) {
        self.cells[0] = velocity;
    }
}

/// Ring buffer of `(time, boundary velocity)` samples covering at least
/// `[t - tau - dt, t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryBuffer {
    samples: VecDeque<(f64, f64)>,
    tau: f64,
    /// Length of the span retained behind the newest sample.
    keep: f64,
}

impl HistoryBuffer {
    pub fn new(tau: f64, dt: f64) -> Self {
        Self { samples: VecDeque::new(), tau, keep: tau + 2.0 * dt }
    }

    /// Buffer pre-filled with the history `f` on a `dt`-spaced mesh reaching
    /// back past `-tau - dt`, followed by `(0, z0_at_boundary)`.
    pub fn from_history(f: impl Fn(f64) -> f64, tau: f64, dt: f64, z0_at_boundary: f64) -> Self {
        let mut buf = Self::new(tau, dt);
        let back = libm::ceil(tau / dt) as usize + 1;
        for k in (1..=back).rev() {
            let s = -(k as f64) * dt;
            buf.samples.push_back((s, f(s)));
        }
        buf.samples.push_back((0.0, z0_at_boundary));
        buf
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn span(&self) -> Option<(f64, f64)> {
        Some((self.samples.front()?.0, self.samples.back()?.0))
    }

    pub fn push(&mut self, t: f64, v: f64) -> Result<()> {
        if let Some(&(last, _)) = self.samples.back() {
            if t <= last {
                return Err(Error::NonMonotoneTime { last, t });
            }
        }
        self.samples.push_back((t, v));
        let horizon = t - self.keep;
        while self.samples.len() > 2 && self.samples[1].0 <= horizon {
            self.samples.pop_front();
        }
        Ok(())
    }

    pub fn lookup(&self, t: f64) -> Result<f64> {
        let (start, end) = self.span().ok_or(Error::OutOfSpan { t, start: 0.0, end: 0.0 })?;
        let slack = 1e-12 * (1.0 + t.abs());
        if t < start - slack || t > end + slack {
            return Err(Error::OutOfSpan { t, start, end });
        }
        let t = t.clamp(start, end);
        // first sample with time > t
        let hi = self.samples.partition_point(|&(s, _)| s <= t);
        if hi == 0 {
            return Ok(self.samples[0].1);
        }
        if hi == self.samples.len() {
            return Ok(self.samples[hi - 1].1);
        }
        let (t0, v0) = self.samples[hi - 1];
        let (t1, v1) = self.samples[hi];
        if t == t0 {
            return Ok(v0);
        }
        let w = (t - t0) / (t1 - t0);
        Ok(v0 + w * (v1 - v0))
    }
}

impl DelayFeedback for HistoryBuffer {
    fn lookback(&self, t: f64) -> Result<f64> {
        self.lookup(t - self.tau)
    }

    fn push(&mut self, t: f64, velocity: f64) -> Result<()> {
        HistoryBuffer::push(self, t, velocity)
    }

    fn profile(&self, t: f64, out: &mut [f64]) -> Result<()> {
        let m = out.len().saturating_sub(1).max(1) as f64;
        for (j, o) in out.iter_mut().enumerate() {
            *o = self.lookup(t - self.tau * j as f64 / m)?;
        }
        Ok(())
    }

    fn seed_inflow(&mut self, velocity: f64) {
        if let Some(last) = self.samples.back_mut() {
            last.1 = velocity;
        }
    }
}
