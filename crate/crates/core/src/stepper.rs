//! Explicit leapfrog integration of the closed loop.
//!
//! Interior nodes use the standard three-level stencil. At `x = 0` a ghost
//! node mirrors `y_1` (homogeneous Neumann). At `x = L` the ghost node
//! carries the feedback law
//!
//! ```text
//! (y_{N+1} - y_{N-1}) / (2 dx) = -alpha z_N - beta u_M,
//! z_N = (y_N^{n+1} - y_N^{n-1}) / (2 dt),
//! ```
//!
//! which is linear in `y_N^{n+1}` and solved in closed form. The time step
//! is locked to `dt = tau / M`, so the delay line is advanced by an exact
//! shift.
//!
//! The stepper runs one level ahead: at level `n` it already holds
//! `y^{n+1}`, which makes the stored velocity the centered difference
//! `z^n = (y^{n+1} - y^{n-1}) / (2 dt)`, the same value that entered the
//! boundary closure and the delay line.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::delay::{DelayFeedback, DelayLine};
use crate::functionals::{self, FunctionalRecord};
use crate::grid::{Grid1D, InitialData, State};
use crate::params::SystemParams;
use crate::{Error, Result};

/// Any entry above this magnitude aborts the run.
pub const BLOW_UP_THRESHOLD: f64 = 1e12;
pub const DEFAULT_CFL: f64 = 0.9;

type SourceFn = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type BoundaryFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Verification-only forcing: an interior source `s(x, t)` added to
/// `y_tt - y_xx` and a boundary term `g(t)` added to the right side of the
/// feedback law. Physics runs never carry one.
pub struct Forcing {
    pub interior: SourceFn,
    pub boundary: BoundaryFn,
}

impl Forcing {
    pub fn new(
        interior: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        boundary: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { interior: Box::new(interior), boundary: Box::new(boundary) }
    }
}

impl core::fmt::Debug for Forcing {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("Forcing { .. }")
    }
}

/// Smallest `M >= m_min` with `tau / M <= cfl * dx`.
pub fn delay_cells_for(tau: f64, dx: f64, cfl: f64, m_min: usize) -> usize {
    let mut m = libm::ceil(tau / (cfl * dx)).max(1.0) as usize;
    while tau / (m as f64) > cfl * dx {
        m += 1;
    }
    m.max(m_min)
}

#[derive(Debug)]
pub struct Stepper<D = DelayLine> {
    params: SystemParams,
    grid: Grid1D,
    dt: f64,
    /// `(dt / dx)^2`
    nu2: f64,
    state: State,
    /// `y^{n+1}`
    ahead: Vec<f64>,
    scratch: Vec<f64>,
    delay: D,
    forcing: Option<Forcing>,
    steps: usize,
}

impl Stepper<DelayLine> {
    /// Locked stepper with `dt = tau / M`, `M = grid.m`.
    pub fn new(params: SystemParams, grid: Grid1D, cfl: f64, initial: State) -> Result<Self> {
        Self::build(params, grid, cfl, initial, None)
    }

    /// Locked stepper with verification forcing.
    pub fn with_forcing(
        params: SystemParams,
        grid: Grid1D,
        cfl: f64,
        initial: State,
        forcing: Forcing,
    ) -> Result<Self> {
        Self::build(params, grid, cfl, initial, Some(forcing))
    }

    fn build(
        params: SystemParams,
        grid: Grid1D,
        cfl: f64,
        initial: State,
        forcing: Option<Forcing>,
    ) -> Result<Self> {
        let dt = params.tau / grid.m as f64;
        let line = DelayLine::new(initial.u.clone(), params.tau, initial.t)?;
        Self::with_feedback(params, grid, dt, cfl, initial, line, forcing)
    }

    /// Scheme-level Lyapunov functional at the half level `n + 1/2`,
    /// exactly nonincreasing under the update without forcing:
    ///
    /// `sum w_i d_i^2 + sum_cells (Dy^{n+1})(Dy^n)/dx + xi drho sum_{j<M} u_j^2
    ///  + varpi Q^2`, with `d = (y^{n+1} - y^n)/dt` and `Q` from
    /// [`Stepper::staggered_invariant`].
    pub fn staggered_energy(&self) -> f64 {
        let p = &self.params;
        let g = &self.grid;
        let (y, a) = (&self.state.y, &self.ahead);
        let mut kinetic = 0.0;
        for i in 0..=g.n {
            let w = if i == 0 || i == g.n { 0.5 * g.dx } else { g.dx };
            let d = (a[i] - y[i]) / self.dt;
            kinetic += w * d * d;
        }
        let mut potential = 0.0;
        for i in 0..g.n {
            potential += (a[i + 1] - a[i]) * (y[i + 1] - y[i]);
        }
        potential /= g.dx;
        let m = g.m;
        let line: f64 = self.state.u[..m].iter().map(|v| v * v).sum::<f64>() * g.drho;
        let q = self.staggered_invariant();
        kinetic + potential + p.xi * line + p.varpi * q * q
    }

    /// Discrete invariant at the half level, conserved to roundoff:
    /// `sum w_i d_i + (alpha + beta) (y_N^{n+1} + y_N^n)/2 - beta dt sum_{j<M} u_j`.
    pub fn staggered_invariant(&self) -> f64 {
        let p = &self.params;
        let g = &self.grid;
        let (y, a) = (&self.state.y, &self.ahead);
        let mut flux = 0.0;
        for i in 0..=g.n {
            let w = if i == 0 || i == g.n { 0.5 * g.dx } else { g.dx };
            flux += w * (a[i] - y[i]) / self.dt;
        }
        let line: f64 = self.state.u[..g.m].iter().sum();
        flux + p.gain() * 0.5 * (a[g.n] + y[g.n]) - p.beta * self.dt * line
    }
}

impl<D: DelayFeedback> Stepper<D> {
    /// Stepper with an arbitrary delay source and step `dt`. The shift line
    /// enforces `dt = tau / M` itself; other sources accept any `dt <= tau`.
    pub fn with_feedback(
        params: SystemParams,
        grid: Grid1D,
        dt: f64,
        cfl: f64,
        initial: State,
        delay: D,
        forcing: Option<Forcing>,
    ) -> Result<Self> {
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(Error::InvalidArgument { name: "cfl", value: cfl, reason: "must lie in (0, 1]" });
        }
        if dt > cfl * grid.dx * (1.0 + 1e-12) {
            return Err(Error::Cfl { dt, dx: grid.dx, cfl });
        }
        if dt > params.tau * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument { name: "dt", value: dt, reason: "must not exceed tau" });
        }
        if initial.y.len() != grid.nodes() || initial.z.len() != grid.nodes() || initial.u.len() != grid.m + 1 {
            return Err(Error::InvalidArgument {
                name: "state",
                value: initial.y.len() as f64,
                reason: "state does not match grid",
            });
        }
        let mut stepper = Self {
            params,
            grid,
            dt,
            nu2: (dt / grid.dx) * (dt / grid.dx),
            ahead: alloc::vec![0.0; grid.nodes()],
            scratch: alloc::vec![0.0; grid.nodes()],
            state: initial,
            delay,
            forcing,
            steps: 0,
        };
        stepper.start()?;
        Ok(stepper)
    }

    /// Taylor start `y^1 = y^0 + dt z^0 + dt^2/2 (Delta_h y^0 + s^0)`.
    /// The closure at `L` and the inflow cell use the boundary trace.
    fn start(&mut self) -> Result<()> {
        let t0 = self.state.t;
        let delayed = self.delay.lookback(t0)?;
        let n = self.grid.n;
        let dx = self.grid.dx;
        let p = self.params;
        let y = &self.state.y;
        let z = &self.state.z;
        let g = self.forcing.as_ref().map_or(0.0, |f| (f.boundary)(t0));
        // Boundary velocity at t = 0+ from the incoming characteristic
        // z - y_x. Equals z0(L) up to O(dx^2) when the data satisfy the
        // boundary condition.
        let yx = (3.0 * y[n] - 4.0 * y[n - 1] + y[n - 2]) / (2.0 * dx);
        let trace = (z[n] - yx - p.beta * delayed + g) / (1.0 + p.alpha);
        let flux = -p.alpha * trace - p.beta * delayed + g;
        self.delay.seed_inflow(trace);
        self.state.u[0] = trace;
        let inv = 1.0 / (dx * dx);
        let half = 0.5 * self.dt * self.dt;
        for i in 0..=n {
            let lap = if i == 0 {
                2.0 * (y[1] - y[0]) * inv
            } else if i == n {
                2.0 * (y[n - 1] - y[n]) * inv + 2.0 * flux / dx
            } else {
                (y[i + 1] - 2.0 * y[i] + y[i - 1]) * inv
            };
            let src = self.source(i, t0);
            self.ahead[i] = y[i] + self.dt * z[i] + half * (lap + src);
        }
        self.check(0)
    }

    fn source(&self, i: usize, t: f64) -> f64 {
        match &self.forcing {
            Some(f) => (f.interior)(self.grid.x(i), t),
            None => 0.0,
        }
    }

    /// Advances one level.
    pub fn step(&mut self) -> Result<()> {
        let n = self.grid.n;
        let dt = self.dt;
        let dx = self.grid.dx;
        let nu2 = self.nu2;
        let p = self.params;
        let t_next = self.time_of(self.steps + 1);
        let delayed = self.delay.lookback(t_next)?;
        let dt2 = dt * dt;

        {
            let y = &self.state.y;
            let a = &self.ahead;
            let out = &mut self.scratch;
            out[0] = 2.0 * a[0] - y[0] + nu2 * 2.0 * (a[1] - a[0]);
            for i in 1..n {
                out[i] = 2.0 * a[i] - y[i] + nu2 * (a[i + 1] - 2.0 * a[i] + a[i - 1]);
            }
            // ghost closure at x = L, implicit in the centered boundary velocity
            let c = (dt / dx) * p.alpha;
            let mut g = -p.beta * delayed;
            if let Some(f) = &self.forcing {
                g += (f.boundary)(t_next);
            }
            let rhs = 2.0 * a[n] - (1.0 - c) * y[n]
                + nu2 * 2.0 * (a[n - 1] - a[n])
                + 2.0 * nu2 * dx * g;
            out[n] = rhs / (1.0 + c);
        }
        if self.forcing.is_some() {
            for i in 0..=n {
                let s = self.source(i, t_next);
                self.scratch[i] += dt2 * s;
            }
        }

        let inv = 0.5 / dt;
        for i in 0..=n {
            self.state.z[i] = (self.scratch[i] - self.state.y[i]) * inv;
        }
        core::mem::swap(&mut self.state.y, &mut self.ahead);
        core::mem::swap(&mut self.ahead, &mut self.scratch);
        self.steps += 1;
        self.state.t = t_next;
        self.delay.push(t_next, self.state.z[n])?;
        self.delay.profile(t_next, &mut self.state.u)?;
        self.check(self.steps)
    }

    fn check(&self, step: usize) -> Result<()> {
        let bad = |v: &f64| !v.is_finite() || v.abs() > BLOW_UP_THRESHOLD;
        if self.ahead.iter().any(bad) || self.state.z.iter().any(bad) || self.state.u.iter().any(bad) {
            return Err(Error::BlowUp { step, t: self.state.t });
        }
        Ok(())
    }

    fn time_of(&self, step: usize) -> f64 {
        self.t0() + step as f64 * self.dt
    }

    fn t0(&self) -> f64 {
        self.state.t - self.steps as f64 * self.dt
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn into_state(self) -> State {
        self.state
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    /// Neumann data at `x = L` for the current level, `-alpha z_N - beta u_M`.
    pub fn boundary_feedback(&self) -> f64 {
        -self.params.alpha * self.state.boundary_velocity()
            - self.params.beta * self.state.delayed_velocity()
    }

    pub fn record(&self) -> FunctionalRecord {
        functionals::record(&self.state, &self.params, &self.grid)
    }
}

/// Inputs of a physics run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: SystemParams,
    /// Spatial mesh; `grid.m` is the minimum number of delay cells.
    pub grid: Grid1D,
    pub initial: InitialData,
    pub t_final: f64,
    pub record_every: usize,
    pub cfl: f64,
    /// Run even when the admissibility conditions fail.
    pub allow_inadmissible: bool,
}

impl Scenario {
    /// Grid with `M` raised until `tau / M <= cfl * dx`.
    pub fn locked_grid(&self) -> Result<Grid1D> {
        let m = delay_cells_for(self.params.tau, self.grid.dx, self.cfl, self.grid.m);
        self.grid.with_delay_cells(m)
    }

    pub fn time_step(&self) -> Result<f64> {
        Ok(self.params.tau / self.locked_grid()?.m as f64)
    }

    pub fn step_count(&self) -> Result<usize> {
        let dt = self.time_step()?;
        Ok(step_count(self.t_final, dt))
    }

    pub fn validate(&self) -> Result<()> {
        if !self.allow_inadmissible {
            let report = self.params.report();
            if !report.accepted() {
                return Err(Error::Inadmissible(report.violations));
            }
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidArgument { name: "T_final", value: self.t_final, reason: "must be >= 0" });
        }
        if self.record_every == 0 {
            return Err(Error::InvalidArgument { name: "record_every", value: 0.0, reason: "must be >= 1" });
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidArgument { name: "cfl", value: self.cfl, reason: "must lie in (0, 1]" });
        }
        Ok(())
    }
}

/// Number of steps needed to reach `t_final`.
pub fn step_count(t_final: f64, dt: f64) -> usize {
    libm::ceil(t_final / dt - 1e-9).max(0.0) as usize
}

/// Functional records of a run plus the discretization actually used.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub records: Vec<FunctionalRecord>,
    pub dt: f64,
    /// Delay cells after the characteristic lock.
    pub m: usize,
    pub steps: usize,
    pub params: SystemParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub series: TimeSeries,
    pub final_state: State,
    /// `|f(0) - z0(L)|` of the initial data.
    pub junction_mismatch: f64,
}

/// Integrates a scenario from `t = 0` to `t_final`, recording every
/// `record_every` steps.
pub fn run(scenario: &Scenario) -> Result<RunOutput> {
    run_with(scenario, |_, _| {})
}

/// As [`run`], calling `observe` after every step (and once at `t = 0`).
pub fn run_with(
    scenario: &Scenario,
    mut observe: impl FnMut(usize, &Stepper),
) -> Result<RunOutput> {
    scenario.validate()?;
    let grid = scenario.locked_grid()?;
    let init = scenario.initial.sample(&grid, scenario.params.tau)?;
    let mut stepper = Stepper::new(scenario.params, grid, scenario.cfl, init.state)?;
    let steps = step_count(scenario.t_final, stepper.dt());
    let mut records = Vec::with_capacity(1 + steps / scenario.record_every);
    records.push(stepper.record());
    observe(0, &stepper);
    for k in 1..=steps {
        stepper.step()?;
        observe(k, &stepper);
        if k % scenario.record_every == 0 {
            records.push(stepper.record());
        }
    }
    Ok(RunOutput {
        series: TimeSeries { records, dt: stepper.dt(), m: grid.m, steps, params: scenario.params },
        final_state: stepper.into_state(),
        junction_mismatch: init.junction_mismatch,
    })
}
