//! Spectral analysis of the semi-discrete generator.
//!
//! The generator has the constants `(1, 0, 0)` in its kernel and conserves
//! the discrete invariant `l`, so it is compressed to `ker l` before the
//! spectrum and the resolvent along the imaginary axis are computed.
//! Eigenvalues and resolvent norms use the Euclidean metric; the weighted
//! inner product enters through [`gram_matrix`] and
//! [`ResolventSolver::norm_h`].

mod bvp;
mod generator;

use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, Schur, SVD};
use num_complex::Complex64;

use crate::grid::Grid1D;
use crate::params::SystemParams;
use crate::{Error, Result};

pub use bvp::{dense_resolvent_solve, resolvent_bvp_check, Kernel, ResolventRhs, ResolventSolution};
pub use generator::{
    assemble_generator, dissipation_bound, dissipation_check, gram_matrix, h_inner,
    invariant_functional, laplacian_of_cosine, random_state, DissipationReport, GeneratorMatrix,
    Layout,
};

/// Dense solver budget.
pub const MAX_DIM: usize = 2000;

const SVD_EPS: f64 = f64::EPSILON;

fn max_iter(dim: usize) -> usize {
    200 * dim.max(10)
}

/// Compression of `A_h` to `ker l`.
#[derive(Debug, Clone, PartialEq)]
pub struct Deflated {
    /// `Q^T A_h Q`, dimension `d - 1`.
    pub matrix: DMatrix<f64>,
    /// Orthonormal basis of `ker l`, `d x (d - 1)`.
    pub basis: DMatrix<f64>,
    /// `|l^T A_h Q|_2`, zero up to roundoff when `l` is conserved.
    pub residual: f64,
}

/// Householder basis of the orthogonal complement of `l`.
pub fn null_basis(l: &DVector<f64>) -> Result<DMatrix<f64>> {
    let d = l.len();
    let norm = l.norm();
    if !(norm > 0.0) || l.amax() <= f64::EPSILON * norm {
        return Err(Error::ZeroFunctional);
    }
    let mut v = l.clone();
    v[0] += if l[0] < 0.0 { -norm } else { norm };
    let vv = v.dot(&v);
    let mut q = DMatrix::zeros(d, d - 1);
    for c in 1..d {
        let s = 2.0 * v[c] / vv;
        for r in 0..d {
            q[(r, c - 1)] = if r == c { 1.0 } else { 0.0 } - s * v[r];
        }
    }
    Ok(q)
}

pub fn deflate(gen: &GeneratorMatrix, params: &SystemParams, grid: &Grid1D) -> Result<Deflated> {
    let l = invariant_functional(params, grid);
    let q = null_basis(&l)?;
    let aq = &gen.matrix * &q;
    let residual = (l.transpose() * &aq).norm();
    let matrix = q.transpose() * aq;
    Ok(Deflated { matrix, basis: q, residual })
}

fn check_dim(dim: usize) -> Result<()> {
    if dim > MAX_DIM {
        return Err(Error::TooLarge { dim, max: MAX_DIM });
    }
    Ok(())
}

/// Full spectrum of a real matrix, sorted by real part and then by
/// imaginary part.
pub fn eigenvalues(matrix: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    check_dim(matrix.nrows())?;
    if !matrix.is_square() {
        return Err(Error::InvalidArgument {
            name: "matrix",
            value: matrix.ncols() as f64,
            reason: "must be square",
        });
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure);
    }
    let schur = Schur::try_new(matrix.clone(), f64::EPSILON, max_iter(matrix.nrows()))
        .ok_or(Error::EigenFailure)?;
    let mut ev: Vec<Complex64> =
        schur.complex_eigenvalues().iter().map(|c| Complex64::new(c.re, c.im)).collect();
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(ev)
}

/// Smallest singular value of a real matrix and its right singular vector.
pub fn kernel_vector(matrix: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    check_dim(matrix.nrows())?;
    let svd = SVD::try_new(matrix.clone(), false, true, SVD_EPS, max_iter(matrix.nrows()))
        .ok_or(Error::EigenFailure)?;
    let k = svd.singular_values.len() - 1;
    let v_t = svd.v_t.ok_or(Error::EigenFailure)?;
    Ok((svd.singular_values[k], v_t.row(k).transpose()))
}

fn nearest(spectrum: &[Complex64], shift: Complex64) -> Option<Complex64> {
    spectrum.iter().copied().min_by(|a, b| (a - shift).norm().total_cmp(&(b - shift).norm()))
}

/// `1 / dist(i gamma, spectrum)`.
pub fn resolvent_lower_bound(spectrum: &[Complex64], gamma: f64) -> f64 {
    let shift = Complex64::new(0.0, gamma);
    match nearest(spectrum, shift) {
        Some(e) => 1.0 / (e - shift).norm(),
        None => 0.0,
    }
}

fn shifted(matrix: &DMatrix<f64>, shift: Complex64) -> DMatrix<Complex64> {
    let d = matrix.nrows();
    DMatrix::from_fn(d, d, |r, c| {
        let v = Complex64::new(-matrix[(r, c)], 0.0);
        if r == c {
            v + shift
        } else {
            v
        }
    })
}

fn inverse_smallest_singular(m: DMatrix<Complex64>) -> Option<(f64, f64)> {
    let d = m.nrows();
    let svd = SVD::<Complex64, Dyn, Dyn>::try_new(m, false, false, SVD_EPS, max_iter(d))?;
    let s = &svd.singular_values;
    Some((s[0], s[s.len() - 1]))
}

/// `|(i gamma I - matrix)^{-1}|_2` as the reciprocal of the smallest
/// singular value of the shifted matrix.
pub fn resolvent_norm(matrix: &DMatrix<f64>, gamma: f64) -> Result<f64> {
    check_dim(matrix.nrows())?;
    let shift = Complex64::new(0.0, gamma);
    let (hi, lo) = inverse_smallest_singular(shifted(matrix, shift)).ok_or(Error::EigenFailure)?;
    if !(lo > (matrix.nrows() as f64) * f64::EPSILON * hi) {
        let spectrum = eigenvalues(matrix).unwrap_or_default();
        return Err(Error::SingularShift { shift, nearest: nearest(&spectrum, shift) });
    }
    Ok(1.0 / lo)
}

/// One point of a resolvent sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventPoint {
    pub gamma: f64,
    pub norm: f64,
    pub lower_bound: f64,
}

/// Deflated operator with its spectrum, ready for repeated resolvent
/// evaluations. Shareable across threads.
#[derive(Debug, Clone)]
pub struct ResolventSolver {
    pub deflated: Deflated,
    pub spectrum: Vec<Complex64>,
    /// `C^T Q^T A Q C^{-T}` where `Q^T G Q = C C^T`.
    weighted: Option<DMatrix<f64>>,
}

impl ResolventSolver {
    pub fn new(params: &SystemParams, grid: &Grid1D) -> Result<Self> {
        let gen = assemble_generator(params, grid);
        check_dim(gen.dim())?;
        let deflated = deflate(&gen, params, grid)?;
        let spectrum = eigenvalues(&deflated.matrix)?;
        let q = &deflated.basis;
        let gq = q.transpose() * gram_matrix(params, grid) * q;
        let weighted = Cholesky::new(gq).and_then(|ch| {
            let c = ch.l();
            let x = c.solve_lower_triangular(&deflated.matrix.transpose())?.transpose();
            Some(c.transpose() * x)
        });
        Ok(Self { deflated, spectrum, weighted })
    }

    pub fn max_real_part(&self) -> f64 {
        self.spectrum.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Euclidean resolvent norm at `i gamma`.
    pub fn norm(&self, gamma: f64) -> Result<f64> {
        resolvent_norm(&self.deflated.matrix, gamma).map_err(|e| self.name_nearest(e))
    }

    /// Resolvent norm at `i gamma` in the weighted metric.
    pub fn norm_h(&self, gamma: f64) -> Result<f64> {
        let w = self.weighted.as_ref().ok_or(Error::EigenFailure)?;
        resolvent_norm(w, gamma).map_err(|e| self.name_nearest(e))
    }

    fn name_nearest(&self, e: Error) -> Error {
        match e {
            Error::SingularShift { shift, .. } => {
                Error::SingularShift { shift, nearest: nearest(&self.spectrum, shift) }
            }
            other => other,
        }
    }

    pub fn point(&self, gamma: f64) -> Result<ResolventPoint> {
        Ok(ResolventPoint {
            gamma,
            norm: self.norm(gamma)?,
            lower_bound: resolvent_lower_bound(&self.spectrum, gamma),
        })
    }

    pub fn sweep(&self, gammas: &[f64]) -> Result<Vec<ResolventPoint>> {
        gammas.iter().map(|&g| self.point(g)).collect()
    }
}

/// `count` equispaced points in `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect(),
    }
}

/// Spectrum and resolvent profile of the deflated generator.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    /// Dimension of the undeflated generator.
    pub dim: usize,
    pub eigenvalues: Vec<Complex64>,
    pub max_real_part: f64,
    pub gamma_grid: Vec<f64>,
    pub resolvent_norms: Vec<f64>,
    pub lower_bounds: Vec<f64>,
    pub deflation_residual: f64,
}

pub fn analyze(params: &SystemParams, grid: &Grid1D, gammas: &[f64]) -> Result<SpectralReport> {
    let solver = ResolventSolver::new(params, grid)?;
    let points = solver.sweep(gammas)?;
    Ok(SpectralReport {
        dim: Layout::new(grid).dim(),
        max_real_part: solver.max_real_part(),
        gamma_grid: gammas.to_vec(),
        resolvent_norms: points.iter().map(|p| p.norm).collect(),
        lower_bounds: points.iter().map(|p| p.lower_bound).collect(),
        deflation_residual: solver.deflated.residual,
        eigenvalues: solver.spectrum,
    })
}
