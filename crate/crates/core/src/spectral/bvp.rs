//! Resolvent equation `(lambda I - A_h) Phi = (F, G, V)` solved two ways:
//! densely, and by elimination to a scalar two-point problem
//!
//! ```text
//! lambda^2 y - Delta_h y = lambda F + G
//! ```
//!
//! with a Robin closure at `x = L` obtained by integrating the transport
//! rows explicitly, then `z = lambda y - F` and `u` from the same
//! integration.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::generator::{assemble_generator, GeneratorMatrix, Layout};
use crate::grid::Grid1D;
use crate::params::SystemParams;
use crate::{Error, Result};

/// How the transport rows are integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Kernel {
    /// Exact solution of the upwind rows:
    /// `u_j = r u_{j-1} + V_j / (lambda + M/tau)`, `r = (1 + lambda tau / M)^{-1}`.
    #[default]
    Upwind,
    /// Continuum formula `u(rho) = e^{-lambda tau rho} z(L)
    /// + tau int_0^rho e^{-lambda tau (rho - s)} V(s) ds`, trapezoid in `s`.
    Continuum,
}

/// Right side `(F, G, V)`; `v` holds `V_1..V_M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventRhs {
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub v: Vec<f64>,
}

impl ResolventRhs {
    pub fn zeros(grid: &Grid1D) -> Self {
        Self { f: vec![0.0; grid.n + 1], g: vec![0.0; grid.n + 1], v: vec![0.0; grid.m] }
    }

    /// `(lambda I - A_h) phi` for a real state vector.
    pub fn from_state(gen: &GeneratorMatrix, lambda: f64, phi: &DVector<f64>) -> Self {
        let r = phi * lambda - gen.apply(phi);
        let (f, g, v) = gen.layout.unpack(r.as_slice());
        Self { f: f.to_vec(), g: g.to_vec(), v: v.to_vec() }
    }

    fn packed(&self, layout: &Layout) -> DVector<f64> {
        let mut u = Vec::with_capacity(self.v.len() + 1);
        u.push(0.0);
        u.extend_from_slice(&self.v);
        layout.pack(&self.f, &self.g, &u)
    }

    fn check(&self, layout: &Layout) -> Result<()> {
        if self.f.len() != layout.n + 1 || self.g.len() != layout.n + 1 || self.v.len() != layout.m {
            return Err(Error::InvalidArgument {
                name: "rhs",
                value: self.f.len() as f64,
                reason: "block lengths must be N+1, N+1 and M",
            });
        }
        Ok(())
    }
}

/// Solution of the resolvent equation; `u` holds `u_0..u_M` with
/// `u_0 = z_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventSolution {
    pub y: Vec<Complex64>,
    pub z: Vec<Complex64>,
    pub u: Vec<Complex64>,
    /// `|(lambda I - A_h) Phi - rhs|_inf`.
    pub residual: f64,
}

impl ResolventSolution {
    /// Packed `(y, z, u_1..u_M)`.
    pub fn packed(&self) -> Vec<Complex64> {
        self.y.iter().chain(self.z.iter()).chain(self.u[1..].iter()).copied().collect()
    }

    pub fn max_diff(&self, other: &[Complex64]) -> f64 {
        self.packed().iter().zip(other).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

fn residual(gen: &GeneratorMatrix, lambda: Complex64, sol: &[Complex64], rhs: &DVector<f64>) -> f64 {
    let re = DVector::from_iterator(sol.len(), sol.iter().map(|c| c.re));
    let im = DVector::from_iterator(sol.len(), sol.iter().map(|c| c.im));
    let (are, aim) = (gen.apply(&re), gen.apply(&im));
    (0..sol.len())
        .map(|k| (lambda * sol[k] - Complex64::new(are[k], aim[k]) - rhs[k]).norm())
        .fold(0.0, f64::max)
}

fn check_lambda(lambda: Complex64) -> Result<()> {
    if !(lambda.re > 0.0) || !lambda.im.is_finite() {
        return Err(Error::InvalidArgument {
            name: "lambda",
            value: lambda.re,
            reason: "real part must be positive",
        });
    }
    Ok(())
}

/// Solves `(lambda I - A_h) Phi = rhs` through the scalar two-point problem
/// and reports the residual against the dense generator.
pub fn resolvent_bvp_check(
    params: &SystemParams,
    grid: &Grid1D,
    lambda: Complex64,
    rhs: &ResolventRhs,
    kernel: Kernel,
) -> Result<ResolventSolution> {
    check_lambda(lambda)?;
    let gen = assemble_generator(params, grid);
    let lay = gen.layout;
    rhs.check(&lay)?;
    let (n, m) = (lay.n, lay.m);
    let dx = grid.dx;
    let inv = 1.0 / (dx * dx);
    let c = |v: f64| Complex64::new(v, 0.0);

    // Transport: u_M = k_m z_N + s_m, and the map z_N -> (u_j).
    let lt = lambda * params.tau;
    let (k_m, s_m, cells): (Complex64, Complex64, Vec<(Complex64, Complex64)>) = match kernel {
        Kernel::Upwind => {
            let rate = c(m as f64 / params.tau);
            let r = rate / (lambda + rate);
            let mut a = c(1.0);
            let mut b = c(0.0);
            let mut cells = vec![(a, b)];
            for j in 1..=m {
                a *= r;
                b = r * b + rhs.v[j - 1] / (lambda + rate);
                cells.push((a, b));
            }
            (a, b, cells)
        }
        Kernel::Continuum => {
            let h = grid.drho;
            let decay = (-lt * h).exp();
            let mut v0 = rhs.v[0];
            if m >= 2 {
                v0 = 2.0 * rhs.v[0] - rhs.v[1];
            }
            let v = |j: usize| if j == 0 { v0 } else { rhs.v[j - 1] };
            let mut a = c(1.0);
            let mut b = c(0.0);
            let mut cells = vec![(a, b)];
            for j in 1..=m {
                a *= decay;
                b = decay * b + 0.5 * params.tau * h * (decay * v(j - 1) + v(j));
                cells.push((a, b));
            }
            (a, b, cells)
        }
    };

    // Tridiagonal system in y.
    let l2 = lambda * lambda;
    let mut sub = vec![Complex64::default(); n + 1];
    let mut diag = vec![Complex64::default(); n + 1];
    let mut sup = vec![Complex64::default(); n + 1];
    let mut b: Vec<Complex64> = (0..=n).map(|i| lambda * rhs.f[i] + rhs.g[i]).collect();
    diag[0] = l2 + 2.0 * inv;
    sup[0] = c(-2.0 * inv);
    for i in 1..n {
        sub[i] = c(-inv);
        diag[i] = l2 + 2.0 * inv;
        sup[i] = c(-inv);
    }
    let k = lambda + (params.alpha + params.beta * k_m) * (2.0 / dx);
    sub[n] = c(-2.0 * inv);
    diag[n] = k * lambda + 2.0 * inv;
    b[n] = rhs.g[n] - s_m * (2.0 * params.beta / dx) + k * rhs.f[n];
    let y = thomas(&sub, &diag, &sup, &mut b)?;

    let z: Vec<Complex64> = (0..=n).map(|i| lambda * y[i] - rhs.f[i]).collect();
    let u: Vec<Complex64> = cells.iter().map(|&(a, s)| a * z[n] + s).collect();
    let mut sol = ResolventSolution { y, z, u, residual: 0.0 };
    sol.residual = residual(&gen, lambda, &sol.packed(), &rhs.packed(&lay));
    Ok(sol)
}

fn thomas(
    sub: &[Complex64],
    diag: &[Complex64],
    sup: &[Complex64],
    rhs: &mut [Complex64],
) -> Result<Vec<Complex64>> {
    let n = diag.len();
    let mut c = vec![Complex64::default(); n];
    let scale = diag.iter().map(|d| d.norm()).fold(0.0, f64::max);
    let mut pivot = diag[0];
    for i in 0..n {
        if i > 0 {
            pivot = diag[i] - sub[i] * c[i - 1];
            let prev = rhs[i - 1];
            rhs[i] -= sub[i] * prev;
        }
        if !(pivot.norm() > 1e-14 * scale) {
            return Err(Error::SingularShift { shift: pivot, nearest: None });
        }
        c[i] = sup[i] / pivot;
        rhs[i] /= pivot;
    }
    for i in (0..n - 1).rev() {
        let next = rhs[i + 1];
        rhs[i] -= c[i] * next;
    }
    Ok(rhs.to_vec())
}

/// Dense LU solve of `(lambda I - A_h) Phi = rhs`, packed.
pub fn dense_resolvent_solve(
    gen: &GeneratorMatrix,
    lambda: Complex64,
    rhs: &ResolventRhs,
) -> Result<Vec<Complex64>> {
    let lay = gen.layout;
    rhs.check(&lay)?;
    let d = lay.dim();
    let m = DMatrix::from_fn(d, d, |r, col| {
        let v = Complex64::new(-gen.matrix[(r, col)], 0.0);
        if r == col {
            v + lambda
        } else {
            v
        }
    });
    let packed = rhs.packed(&lay);
    let b = DVector::from_iterator(d, packed.iter().map(|&v| Complex64::new(v, 0.0)));
    let x = m.lu().solve(&b).ok_or(Error::SingularShift { shift: lambda, nearest: None })?;
    Ok(x.iter().copied().collect())
}
