//! Meshes on `(0, L)` and on the delay interval `rho in (0, 1)`, the state
//! triple `(y, z, u)` and sampling of initial data.
//!
//! Boundary integrals over the feedback boundary reduce to evaluation at
//! `x = L` (counting measure, `mes = 1`). All domain integrals use the
//! composite trapezoid rule.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::{Error, Result};

pub const MIN_CELLS: usize = 8;
pub const MIN_DELAY_CELLS: usize = 4;
/// Tolerance above which a history/velocity mismatch at the junction is flagged.
pub const JUNCTION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub length: f64,
    /// Spatial cells; nodes are `x_i = i dx`, `i = 0..=n`.
    pub n: usize,
    /// Delay cells; nodes are `rho_j = j drho`, `j = 0..=m`.
    pub m: usize,
    pub dx: f64,
    pub drho: f64,
}

impl Grid1D {
    pub fn new(length: f64, n: usize, m: usize) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidArgument { name: "L", value: length, reason: "must be > 0" });
        }
        if n < MIN_CELLS {
            return Err(Error::DegenerateGrid { what: "N", value: n, min: MIN_CELLS });
        }
        if m < MIN_DELAY_CELLS {
            return Err(Error::DegenerateGrid { what: "M", value: m, min: MIN_DELAY_CELLS });
        }
        Ok(Self { length, n, m, dx: length / n as f64, drho: 1.0 / m as f64 })
    }

    /// Same spatial mesh with a different number of delay cells.
    pub fn with_delay_cells(&self, m: usize) -> Result<Self> {
        Self::new(self.length, self.n, m)
    }

    pub fn nodes(&self) -> usize {
        self.n + 1
    }

    pub fn x(&self, i: usize) -> f64 {
        if i == self.n {
            self.length
        } else {
            i as f64 * self.dx
        }
    }

    pub fn rho(&self, j: usize) -> f64 {
        if j == self.m {
            1.0
        } else {
            j as f64 * self.drho
        }
    }
}

/// Shorthand for [`Grid1D::new`].
pub fn make_grid(length: f64, n: usize, m: usize) -> Result<Grid1D> {
    Grid1D::new(length, n, m)
}

/// Sampled state at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    /// Displacement at the `N + 1` nodes.
    pub y: Vec<f64>,
    /// Velocity at the `N + 1` nodes.
    pub z: Vec<f64>,
    /// Delay line, `u[j] ~ y_t(L, t - tau rho_j)`, `M + 1` cells.
    pub u: Vec<f64>,
    pub t: f64,
}

impl State {
    pub fn zeros(grid: &Grid1D) -> Self {
        Self {
            y: alloc::vec![0.0; grid.nodes()],
            z: alloc::vec![0.0; grid.nodes()],
            u: alloc::vec![0.0; grid.m + 1],
            t: 0.0,
        }
    }

    pub fn boundary_velocity(&self) -> f64 {
        *self.z.last().expect("non-empty state")
    }

    pub fn delayed_velocity(&self) -> f64 {
        *self.u.last().expect("non-empty delay line")
    }

    /// `|u_0 - z(L)|`.
    pub fn junction_mismatch(&self) -> f64 {
        (self.u[0] - self.boundary_velocity()).abs()
    }

    pub fn is_finite(&self) -> bool {
        self.y.iter().chain(&self.z).chain(&self.u).all(|v| v.is_finite())
    }

    /// Multiplies every component by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let f = |v: &Vec<f64>| v.iter().map(|x| s * x).collect();
        Self { y: f(&self.y), z: f(&self.z), u: f(&self.u), t: self.t }
    }

    pub fn max_abs(&self) -> f64 {
        self.y.iter().chain(&self.z).chain(&self.u).fold(0.0, |a, v| a.max(v.abs()))
    }
}

/// Named spatial profiles for `y0` and `z0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    Zero,
    Constant(f64),
    Gaussian { center: f64, width: f64, amplitude: f64 },
    /// `sin(k pi x / L)`.
    Sine { k: f64 },
    /// `cos(k pi x / L)`; satisfies the homogeneous Neumann condition at both ends.
    Cosine { k: f64 },
}

impl Profile {
    pub fn eval(&self, x: f64, length: f64) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::Constant(c) => c,
            Profile::Gaussian { center, width, amplitude } => {
                let s = (x - center) / width;
                amplitude * libm::exp(-s * s)
            }
            Profile::Sine { k } => libm::sin(k * PI * x / length),
            Profile::Cosine { k } => libm::cos(k * PI * x / length),
        }
    }
}

/// Named presets for the boundary velocity history `f(s)`, `s in (-tau, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum History {
    Zero,
    Constant(f64),
    /// `f(s) = slope * s`.
    Ramp { slope: f64 },
}

impl History {
    pub fn eval(&self, s: f64) -> f64 {
        match *self {
            History::Zero => 0.0,
            History::Constant(c) => c,
            History::Ramp { slope } => slope * s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialData {
    pub y0: Profile,
    pub z0: Profile,
    pub history: History,
}

impl InitialData {
    pub const ZERO: Self =
        Self { y0: Profile::Zero, z0: Profile::Zero, history: History::Zero };

    pub fn sample(&self, grid: &Grid1D, tau: f64) -> Result<Initialized> {
        let length = grid.length;
        init_state(
            grid,
            tau,
            |x| self.y0.eval(x, length),
            |x| self.z0.eval(x, length),
            |s| self.history.eval(s),
        )
    }
}

/// Result of sampling initial data.
#[derive(Debug, Clone, PartialEq)]
pub struct Initialized {
    pub state: State,
    /// `|f(0) - z0(L)|`; the data lies outside the generator domain when
    /// this exceeds [`JUNCTION_TOL`].
    pub junction_mismatch: f64,
}

impl Initialized {
    pub fn has_junction_warning(&self) -> bool {
        self.junction_mismatch > JUNCTION_TOL
    }
}

/// Samples `y_i = y0(x_i)`, `z_i = z0(x_i)`, `u_j = f(-tau rho_j)` for
/// `j >= 1` and `u_0 = z0(L)`.
pub fn init_state(
    grid: &Grid1D,
    tau: f64,
    y0: impl Fn(f64) -> f64,
    z0: impl Fn(f64) -> f64,
    f: impl Fn(f64) -> f64,
) -> Result<Initialized> {
    let y: Vec<f64> = (0..grid.nodes()).map(|i| y0(grid.x(i))).collect();
    let z: Vec<f64> = (0..grid.nodes()).map(|i| z0(grid.x(i))).collect();
    let mut u: Vec<f64> = (0..=grid.m).map(|j| f(-tau * grid.rho(j))).collect();
    check_finite("y0", &y)?;
    check_finite("z0", &z)?;
    check_finite("history", &u)?;
    let f_at_zero = u[0];
    u[0] = z[grid.n];
    Ok(Initialized {
        junction_mismatch: (f_at_zero - u[0]).abs(),
        state: State { y, z, u, t: 0.0 },
    })
}

fn check_finite(component: &'static str, v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(Error::NonFiniteInitialData { component, index }),
        None => Ok(()),
    }
}
