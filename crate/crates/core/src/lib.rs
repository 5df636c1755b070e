//! Numerical laboratory for the one-dimensional wave equation with delayed
//! boundary velocity feedback and no displacement term:
//!
//! ```text
//! y_tt - y_xx = 0                          on (0, L) x (0, inf)
//! y_x(0, t)   = 0
//! y_x(L, t)   = -alpha y_t(L, t) - beta y_t(L, t - tau)
//! ```
//!
//! The delayed trace is carried as a transport variable `u(rho, t) =
//! y_t(L, t - tau rho)` on `rho in (0, 1)`, so the closed loop is the
//! abstract system `Phi' = A Phi` on the triple `Phi = (y, z, u)`.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, configuration and
//! the command line live in the `delaywave` companion crate.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod delay;
pub mod error;
pub mod functionals;
pub mod grid;
pub mod params;
pub mod quad;
pub mod spectral;
pub mod stepper;

pub use error::{Error, Result};
pub use grid::{Grid1D, History, InitialData, Profile, State};
pub use params::SystemParams;
pub use stepper::{Scenario, Stepper, TimeSeries};
