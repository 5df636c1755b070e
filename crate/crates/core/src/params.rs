//! Physical and Lyapunov parameters of the closed loop.
//!
//! Admissibility is `0 < beta < alpha` together with
//! `tau * beta < xi < tau * (2 alpha - beta)`. Under these conditions the
//! generator is dissipative in the weighted inner product built from `xi` and
//! the coupling weight `varpi`, and that inner product is equivalent to the
//! standard `H^1 x L^2 x L^2` one as long as `varpi` stays below an explicit
//! three-term bound.

use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

pub const DEFAULT_SAFETY: f64 = 0.9;

/// One failed admissibility condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Violation {
    NonFinite(&'static str),
    NonPositive(&'static str),
    /// `beta < alpha` must hold strictly.
    BetaNotBelowAlpha { alpha: f64, beta: f64 },
    /// `xi > tau * beta` fails.
    XiTooSmall { xi: f64, lower: f64 },
    /// `xi < tau * (2 alpha - beta)` fails.
    XiTooLarge { xi: f64, upper: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::NonFinite(name) => write!(f, "{name} is not finite"),
            Violation::NonPositive(name) => write!(f, "{name} must be > 0"),
            Violation::BetaNotBelowAlpha { alpha, beta } => {
                write!(f, "condition 0 < beta < alpha fails: beta = {beta}, alpha = {alpha}")
            }
            Violation::XiTooSmall { xi, lower } => {
                write!(f, "condition tau*beta < xi fails: xi = {xi} <= {lower}")
            }
            Violation::XiTooLarge { xi, upper } => {
                write!(f, "condition xi < tau*(2*alpha - beta) fails: xi = {xi} >= {upper}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn accepted(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the admissibility conditions for `(alpha, beta, tau, xi)`.
pub fn validate(alpha: f64, beta: f64, tau: f64, xi: f64) -> ValidationReport {
    let mut violations = Vec::new();
    let named = [("alpha", alpha), ("beta", beta), ("tau", tau), ("xi", xi)];
    for (name, v) in named {
        if !v.is_finite() {
            violations.push(Violation::NonFinite(name));
        }
    }
    if !violations.is_empty() {
        return ValidationReport { violations };
    }
    for (name, v) in named {
        if v <= 0.0 {
            violations.push(Violation::NonPositive(name));
        }
    }
    if beta >= alpha {
        violations.push(Violation::BetaNotBelowAlpha { alpha, beta });
    }
    let lower = tau * beta;
    let upper = tau * (2.0 * alpha - beta);
    if xi <= lower {
        violations.push(Violation::XiTooSmall { xi, lower });
    }
    if xi >= upper {
        violations.push(Violation::XiTooLarge { xi, upper });
    }
    ValidationReport { violations }
}

/// Midpoint of the admissible `xi` interval, which is `alpha * tau`.
pub fn default_xi(alpha: f64, beta: f64, tau: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < alpha && alpha.is_finite()) {
        return Err(Error::InvalidArgument {
            name: "beta",
            value: beta,
            reason: "default xi needs 0 < beta < alpha",
        });
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidArgument { name: "tau", value: tau, reason: "must be > 0" });
    }
    Ok(0.5 * tau * (beta + (2.0 * alpha - beta)))
}

/// Upper bound on `varpi` for norm equivalence, with `mes(Omega) = length`
/// and a single boundary point at `x = L`.
pub fn varpi_bound(alpha: f64, beta: f64, xi: f64, delta: f64, length: f64) -> f64 {
    let s = alpha + beta;
    let gap = s - delta;
    let a = 1.0 / (s * gap);
    let b = delta / (2.0 * gap * length);
    let c = delta * xi / (2.0 * gap);
    a.min(b).min(c)
}

/// Returns `(delta, varpi)` with `delta = (alpha + beta) / 2` and `varpi` a
/// `safety` fraction of the bound.
pub fn select_weight(
    alpha: f64,
    beta: f64,
    xi: f64,
    length: f64,
    safety: f64,
) -> Result<(f64, f64)> {
    if !(safety > 0.0 && safety < 1.0) {
        return Err(Error::InvalidArgument {
            name: "safety",
            value: safety,
            reason: "must lie in (0, 1)",
        });
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::InvalidArgument { name: "L", value: length, reason: "must be > 0" });
    }
    if !(alpha + beta > 0.0 && xi > 0.0) {
        return Err(Error::InvalidArgument {
            name: "xi",
            value: xi,
            reason: "weight selection needs alpha + beta > 0 and xi > 0",
        });
    }
    let delta = 0.5 * (alpha + beta);
    let varpi = safety * varpi_bound(alpha, beta, xi, delta, length);
    Ok((delta, varpi))
}

/// Complete parameter set of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub alpha: f64,
    pub beta: f64,
    pub tau: f64,
    pub xi: f64,
    pub varpi: f64,
    pub delta: f64,
    /// Domain length `L`.
    pub length: f64,
}

impl SystemParams {
    /// Validated parameters; `xi` defaults to the interval midpoint and
    /// `safety` to [`DEFAULT_SAFETY`].
    pub fn new(
        alpha: f64,
        beta: f64,
        tau: f64,
        xi: Option<f64>,
        length: f64,
        safety: Option<f64>,
    ) -> Result<Self> {
        let xi = match xi {
            Some(xi) => xi,
            None => {
                let report = validate(alpha, beta, tau, tau * alpha);
                if !report.accepted() {
                    return Err(Error::Inadmissible(report.violations));
                }
                default_xi(alpha, beta, tau)?
            }
        };
        let report = validate(alpha, beta, tau, xi);
        if !report.accepted() {
            return Err(Error::Inadmissible(report.violations));
        }
        Self::complete(alpha, beta, tau, xi, length, safety)
    }

    /// Skips admissibility. Only finiteness, `tau > 0`, `alpha + beta > 0`
    /// and `xi > 0` are still required so that every functional is defined.
    pub fn new_unchecked(
        alpha: f64,
        beta: f64,
        tau: f64,
        xi: Option<f64>,
        length: f64,
        safety: Option<f64>,
    ) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta), ("tau", tau)] {
            if !v.is_finite() {
                return Err(Error::InvalidArgument { name, value: v, reason: "not finite" });
            }
        }
        if tau <= 0.0 {
            return Err(Error::InvalidArgument { name: "tau", value: tau, reason: "must be > 0" });
        }
        let xi = xi.unwrap_or(alpha * tau);
        Self::complete(alpha, beta, tau, xi, length, safety)
    }

    fn complete(
        alpha: f64,
        beta: f64,
        tau: f64,
        xi: f64,
        length: f64,
        safety: Option<f64>,
    ) -> Result<Self> {
        let (delta, varpi) =
            select_weight(alpha, beta, xi, length, safety.unwrap_or(DEFAULT_SAFETY))?;
        Ok(Self { alpha, beta, tau, xi, varpi, delta, length })
    }

    pub fn report(&self) -> ValidationReport {
        validate(self.alpha, self.beta, self.tau, self.xi)
    }

    pub fn is_admissible(&self) -> bool {
        self.report().accepted()
    }

    /// `alpha + beta`, the weight of the boundary trace in the invariant.
    pub fn gain(&self) -> f64 {
        self.alpha + self.beta
    }

    /// Coefficients `(c_z, c_u)` of the dissipation bound
    /// `<A Phi, Phi> <= c_z z(L)^2 + c_u u(1)^2`.
    pub fn dissipation_coefficients(&self) -> (f64, f64) {
        let r = self.xi / self.tau;
        (0.5 * (self.beta - 2.0 * self.alpha + r), 0.5 * (self.beta - r))
    }
}
