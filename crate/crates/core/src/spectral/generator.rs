//! Semi-discrete generator `A_h` on the state vector
//! `(y_0..y_N, z_0..z_N, u_1..u_M)`.
//!
//! The inflow cell is not a separate unknown: `u_0 = z_N` is substituted
//! into the first transport row, so the dimension is `2 (N + 1) + M`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::Grid1D;
use crate::params::SystemParams;
use crate::{Error, Result};

/// Index map of the flattened state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub n: usize,
    pub m: usize,
}

impl Layout {
    pub fn new(grid: &Grid1D) -> Self {
        Self { n: grid.n, m: grid.m }
    }

    pub fn dim(&self) -> usize {
        2 * (self.n + 1) + self.m
    }

    pub fn y(&self, i: usize) -> usize {
        i
    }

    pub fn z(&self, i: usize) -> usize {
        self.n + 1 + i
    }

    /// Cell `j` of the delay line, `1 <= j <= M`.
    pub fn u(&self, j: usize) -> usize {
        debug_assert!(j >= 1 && j <= self.m);
        2 * (self.n + 1) + j - 1
    }

    /// Row carrying the Neumann closure at `x = 0`.
    pub fn neumann_row(&self) -> usize {
        self.z(0)
    }

    /// Row carrying the feedback closure at `x = L`.
    pub fn feedback_row(&self) -> usize {
        self.z(self.n)
    }

    /// Transport row that reads the inflow `u_0 = z_N`.
    pub fn inflow_row(&self) -> usize {
        self.u(1)
    }

    /// Flattens `(y, z, u_1..u_M)`; `u` may include `u_0`, which is dropped.
    pub fn pack(&self, y: &[f64], z: &[f64], u: &[f64]) -> DVector<f64> {
        let skip = u.len() - self.m;
        DVector::from_iterator(
            self.dim(),
            y.iter().chain(z.iter()).chain(u[skip..].iter()).copied(),
        )
    }

    pub fn unpack<'a, T>(&self, v: &'a [T]) -> (&'a [T], &'a [T], &'a [T]) {
        let (y, rest) = v.split_at(self.n + 1);
        let (z, u) = rest.split_at(self.n + 1);
        (y, z, u)
    }
}

/// Dense `A_h` with its index map.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    pub matrix: DMatrix<f64>,
    pub layout: Layout,
}

impl GeneratorMatrix {
    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.matrix * v
    }
}

/// `y' = z`, `z' = Delta_h y` with ghost closures
/// `y_x(0) = 0` and `y_x(L) = -alpha z_N - beta u_M`, and the upwind
/// transport `u_j' = -(M / tau)(u_j - u_{j-1})`.
pub fn assemble_generator(params: &SystemParams, grid: &Grid1D) -> GeneratorMatrix {
    let lay = Layout::new(grid);
    let (n, m) = (lay.n, lay.m);
    let mut a = DMatrix::zeros(lay.dim(), lay.dim());
    let inv = 1.0 / (grid.dx * grid.dx);
    for i in 0..=n {
        a[(lay.y(i), lay.z(i))] = 1.0;
    }
    a[(lay.z(0), lay.y(0))] = -2.0 * inv;
    a[(lay.z(0), lay.y(1))] = 2.0 * inv;
    for i in 1..n {
        a[(lay.z(i), lay.y(i - 1))] = inv;
        a[(lay.z(i), lay.y(i))] = -2.0 * inv;
        a[(lay.z(i), lay.y(i + 1))] = inv;
    }
    let r = lay.feedback_row();
    a[(r, lay.y(n - 1))] = 2.0 * inv;
    a[(r, lay.y(n))] = -2.0 * inv;
    a[(r, lay.z(n))] = -2.0 * params.alpha / grid.dx;
    a[(r, lay.u(m))] = -2.0 * params.beta / grid.dx;
    let c = m as f64 / params.tau;
    a[(lay.u(1), lay.z(n))] = c;
    a[(lay.u(1), lay.u(1))] = -c;
    for j in 2..=m {
        a[(lay.u(j), lay.u(j - 1))] = c;
        a[(lay.u(j), lay.u(j))] = -c;
    }
    GeneratorMatrix { matrix: a, layout: lay }
}

/// Coefficients of the discrete conserved functional
/// `sum_i w_i z_i + (alpha + beta) y_N - beta tau drho sum_{j>=1} u_j`,
/// with trapezoid weights `w_i` in `x`. The `rho` sum uses the right-point
/// rule, which is the quadrature the upwind transport conserves exactly.
pub fn invariant_functional(params: &SystemParams, grid: &Grid1D) -> DVector<f64> {
    let lay = Layout::new(grid);
    let mut l = DVector::zeros(lay.dim());
    for i in 0..=lay.n {
        l[lay.z(i)] = node_weight(grid, i);
    }
    l[lay.y(lay.n)] = params.gain();
    for j in 1..=lay.m {
        l[lay.u(j)] = -params.beta * params.tau * grid.drho;
    }
    l
}

fn node_weight(grid: &Grid1D, i: usize) -> f64 {
    if i == 0 || i == grid.n {
        0.5 * grid.dx
    } else {
        grid.dx
    }
}

/// Gram matrix of the discrete weighted inner product:
/// `sum_cells (Dy)(Dy~)/dx + sum_i w_i z_i z~_i + xi drho sum_{j>=1} u_j u~_j
///  + varpi l(Phi) l(Phi~)`.
pub fn gram_matrix(params: &SystemParams, grid: &Grid1D) -> DMatrix<f64> {
    let lay = Layout::new(grid);
    let mut g = DMatrix::zeros(lay.dim(), lay.dim());
    let k = 1.0 / grid.dx;
    for i in 0..lay.n {
        let (p, q) = (lay.y(i), lay.y(i + 1));
        g[(p, p)] += k;
        g[(q, q)] += k;
        g[(p, q)] -= k;
        g[(q, p)] -= k;
    }
    for i in 0..=lay.n {
        g[(lay.z(i), lay.z(i))] = node_weight(grid, i);
    }
    for j in 1..=lay.m {
        g[(lay.u(j), lay.u(j))] = params.xi * grid.drho;
    }
    let l = invariant_functional(params, grid);
    g += (&l * l.transpose()) * params.varpi;
    g
}

/// `<a, b>_H` through the Gram matrix.
pub fn h_inner(gram: &DMatrix<f64>, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.dot(&(gram * b))
}

/// Right side of the dissipation estimate,
/// `(beta - 2 alpha + xi/tau) z_N^2 / 2 + (beta - xi/tau) u_M^2 / 2`.
pub fn dissipation_bound(params: &SystemParams, z_l: f64, u_m: f64) -> f64 {
    let (cz, cu) = params.dissipation_coefficients();
    cz * z_l * z_l + cu * u_m * u_m
}

/// Uniform `[-1, 1]` entries, reproducible from the rng state.
pub fn random_state(layout: &Layout, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(layout.dim(), |_, _| rng.random_range(-1.0..=1.0))
}

/// Outcome of [`dissipation_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct DissipationReport {
    pub samples: usize,
    /// Largest `<A Phi, Phi>_H - bound`.
    pub max_excess: f64,
    /// Largest `(<A Phi, Phi>_H - bound) / (|Phi|_H^2 dx)`.
    pub max_scaled_excess: f64,
    /// Largest `<A Phi, Phi>_H / |Phi|_H^2`.
    pub max_rate: f64,
}

/// Evaluates `<A_h Phi, Phi>_H` against [`dissipation_bound`] on seeded
/// random states.
pub fn dissipation_check(
    params: &SystemParams,
    grid: &Grid1D,
    samples: usize,
    seed: u64,
) -> Result<DissipationReport> {
    if samples == 0 {
        return Err(Error::InvalidArgument { name: "samples", value: 0.0, reason: "must be positive" });
    }
    let gen = assemble_generator(params, grid);
    let gram = gram_matrix(params, grid);
    let lay = gen.layout;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = DissipationReport {
        samples,
        max_excess: f64::NEG_INFINITY,
        max_scaled_excess: f64::NEG_INFINITY,
        max_rate: f64::NEG_INFINITY,
    };
    for _ in 0..samples {
        let phi = random_state(&lay, &mut rng);
        let a_phi = gen.apply(&phi);
        let form = h_inner(&gram, &a_phi, &phi);
        let norm = h_inner(&gram, &phi, &phi);
        let excess = form - dissipation_bound(params, phi[lay.z(lay.n)], phi[lay.u(lay.m)]);
        report.max_excess = report.max_excess.max(excess);
        report.max_scaled_excess = report.max_scaled_excess.max(excess / (norm * grid.dx));
        report.max_rate = report.max_rate.max(form / norm);
    }
    Ok(report)
}

/// Samples `y = cos(k pi x / L)` and returns the `z` block of `A_h` applied
/// to `(y, 0, 0)`.
pub fn laplacian_of_cosine(params: &SystemParams, grid: &Grid1D, k: f64) -> Vec<f64> {
    let gen = assemble_generator(params, grid);
    let lay = gen.layout;
    let mut phi = DVector::zeros(lay.dim());
    for i in 0..=lay.n {
        phi[lay.y(i)] = libm::cos(k * core::f64::consts::PI * grid.x(i) / grid.length);
    }
    let out = gen.apply(&phi);
    (0..=lay.n).map(|i| out[lay.z(i)]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use proptest::prelude::*;

    fn setup(n: usize, m: usize) -> (SystemParams, Grid1D) {
        let p = SystemParams::new(1.0, 0.5, 1.0, Some(1.0), 1.0, None).unwrap();
        (p, make_grid(1.0, n, m).unwrap())
    }

    #[test]
    fn dimension_and_rows() {
        let (p, g) = setup(40, 16);
        let a = assemble_generator(&p, &g);
        assert_eq!(a.dim(), 98);
        assert_eq!(a.layout.feedback_row(), 81);
        assert_eq!(a.layout.inflow_row(), 82);
        assert_eq!(a.layout.u(16), 97);
    }

    #[test]
    fn constants_are_in_the_kernel() {
        let (p, g) = setup(20, 8);
        let a = assemble_generator(&p, &g);
        let lay = a.layout;
        let mut phi = DVector::zeros(lay.dim());
        for i in 0..=lay.n {
            phi[lay.y(i)] = 3.5;
        }
        assert_eq!(a.apply(&phi).amax(), 0.0);
    }

    #[test]
    fn functional_annihilates_range() {
        let (p, g) = setup(20, 8);
        let a = assemble_generator(&p, &g);
        let l = invariant_functional(&p, &g);
        let row = l.transpose() * &a.matrix;
        assert!(row.amax() < 1e-12 * a.matrix.amax());
    }

    #[test]
    fn stencil_is_second_order_inside() {
        let (p, _) = setup(20, 8);
        let pi2 = core::f64::consts::PI * core::f64::consts::PI;
        let err = |n: usize| {
            let g = make_grid(1.0, n, 8).unwrap();
            let lap = laplacian_of_cosine(&p, &g, 1.0);
            (1..n)
                .map(|i| (lap[i] + pi2 * libm::cos(core::f64::consts::PI * g.x(i))).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(20) / err(40);
        assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn gram_is_positive_definite() {
        let (p, g) = setup(12, 6);
        let gram = gram_matrix(&p, &g);
        assert!(nalgebra::Cholesky::new(gram.clone()).is_some());
        assert!((&gram - gram.transpose()).amax() == 0.0);
    }

    #[test]
    fn pack_drops_inflow_cell() {
        let (_, g) = setup(8, 4);
        let lay = Layout::new(&g);
        let y: Vec<f64> = (0..9).map(|i| i as f64).collect();
        let z: Vec<f64> = (0..9).map(|i| 10.0 + i as f64).collect();
        let u = [-1.0, 1.0, 2.0, 3.0, 4.0];
        let v = lay.pack(&y, &z, &u);
        assert_eq!(v.len(), lay.dim());
        assert_eq!(v[lay.u(1)], 1.0);
        let (yy, zz, uu) = lay.unpack(v.as_slice());
        assert_eq!(yy, &y[..]);
        assert_eq!(zz, &z[..]);
        assert_eq!(uu, &u[1..]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn dissipation_holds_exactly(seed in any::<u64>(), n in 8usize..30, m in 4usize..20) {
            let (p, g) = setup(n, m);
            let r = dissipation_check(&p, &g, 8, seed).unwrap();
            prop_assert!(r.max_excess <= 1e-10, "excess {}", r.max_excess);
        }

        #[test]
        fn functional_is_conserved(seed in any::<u64>()) {
            let (p, g) = setup(16, 8);
            let a = assemble_generator(&p, &g);
            let l = invariant_functional(&p, &g);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let phi = random_state(&a.layout, &mut rng);
            prop_assert!(l.dot(&a.apply(&phi)).abs() < 1e-10);
        }
    }
}
