//! Scalar functionals of a state: the weighted Lyapunov norm, the basic
//! energy, the conserved linear functional `E` and the equilibrium constant.
//!
//! `E(Phi) = int z dx + (alpha + beta) y(L) - beta tau int_0^1 u drho` is
//! conserved along solutions, so solutions settle at the constant
//! `chi = E(Phi_0) / (alpha + beta)`.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{Grid1D, State};
use crate::params::SystemParams;
use crate::quad::{gradient, trapezoid, trapezoid_map};
use crate::{Error, Result};

/// One row of a simulation time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionalRecord {
    pub t: f64,
    pub lyap_norm_sq: f64,
    pub basic_energy: f64,
    pub invariant_e: f64,
    pub boundary_velocity: f64,
    pub delayed_velocity: f64,
}

pub fn record(state: &State, params: &SystemParams, grid: &Grid1D) -> FunctionalRecord {
    FunctionalRecord {
        t: state.t,
        lyap_norm_sq: lyapunov_norm_sq(state, params, grid),
        basic_energy: basic_energy(state, params, grid),
        invariant_e: invariant_e(state, params, grid),
        boundary_velocity: state.boundary_velocity(),
        delayed_velocity: state.delayed_velocity(),
    }
}

fn gradient_sq(y: &[f64], dx: f64) -> f64 {
    let mut g = vec![0.0; y.len()];
    gradient(y, dx, &mut g);
    trapezoid_map(&g, dx, |v| v * v)
}

/// `int |y_x|^2 + z^2 dx + xi int u^2 drho`.
pub fn basic_energy(state: &State, params: &SystemParams, grid: &Grid1D) -> f64 {
    gradient_sq(&state.y, grid.dx)
        + trapezoid_map(&state.z, grid.dx, |v| v * v)
        + params.xi * trapezoid_map(&state.u, grid.drho, |v| v * v)
}

/// `int z dx + (alpha + beta) y(L) - beta tau int_0^1 u drho`.
pub fn invariant_e(state: &State, params: &SystemParams, grid: &Grid1D) -> f64 {
    trapezoid(&state.z, grid.dx) + params.gain() * state.y[grid.n]
        - params.beta * params.tau * trapezoid(&state.u, grid.drho)
}

/// Squared norm of the weighted inner product: basic energy plus
/// `varpi E(Phi)^2`.
pub fn lyapunov_norm_sq(state: &State, params: &SystemParams, grid: &Grid1D) -> f64 {
    let e = invariant_e(state, params, grid);
    basic_energy(state, params, grid) + params.varpi * e * e
}

/// Standard `H^1 x L^2 x L^2` norm squared.
pub fn standard_norm_sq(state: &State, grid: &Grid1D) -> f64 {
    trapezoid_map(&state.y, grid.dx, |v| v * v)
        + gradient_sq(&state.y, grid.dx)
        + trapezoid_map(&state.z, grid.dx, |v| v * v)
        + trapezoid_map(&state.u, grid.drho, |v| v * v)
}

/// Limit constant `chi` of the solution issued from `(y0, z0, f)`, with
/// every integral evaluated by the trapezoid rule on `grid`.
pub fn equilibrium_chi(
    y0: impl Fn(f64) -> f64,
    z0: impl Fn(f64) -> f64,
    f: impl Fn(f64) -> f64,
    params: &SystemParams,
    grid: &Grid1D,
) -> f64 {
    let z: Vec<f64> = (0..grid.nodes()).map(|i| z0(grid.x(i))).collect();
    let h: Vec<f64> = (0..=grid.m).map(|j| f(-params.tau * grid.rho(j))).collect();
    let e = trapezoid(&z, grid.dx) + params.gain() * y0(grid.length)
        - params.beta * params.tau * trapezoid(&h, grid.drho);
    e / params.gain()
}

/// Extremal ratios `lyapunov_norm_sq / standard_norm_sq` over random states
/// with entries uniform in `[-1, 1]`.
pub fn norm_equivalence_check(
    params: &SystemParams,
    grid: &Grid1D,
    n_samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if n_samples < 100 {
        return Err(Error::InvalidArgument {
            name: "n_samples",
            value: n_samples as f64,
            reason: "need at least 100 samples",
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = State::zeros(grid);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let mut taken = 0;
    while taken < n_samples {
        for v in state.y.iter_mut().chain(state.z.iter_mut()).chain(state.u.iter_mut()) {
            *v = rng.random_range(-1.0..=1.0);
        }
        let standard = standard_norm_sq(&state, grid);
        if standard <= f64::MIN_POSITIVE {
            continue;
        }
        let ratio = lyapunov_norm_sq(&state, params, grid) / standard;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
        taken += 1;
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, History, InitialData, Profile};
    use proptest::prelude::*;

    fn reference() -> (SystemParams, Grid1D) {
        // alpha + beta = 1.5, varpi = 0.45
        let p = SystemParams::new(1.0, 0.5, 1.0, None, 1.0, None).unwrap();
        (p, make_grid(1.0, 20, 8).unwrap())
    }

    fn sample(data: InitialData, p: &SystemParams, g: &Grid1D) -> State {
        data.sample(g, p.tau).unwrap().state
    }

    #[test]
    fn zero_state_has_zero_functionals() {
        let (p, g) = reference();
        let s = State::zeros(&g);
        assert_eq!(lyapunov_norm_sq(&s, &p, &g), 0.0);
        assert_eq!(invariant_e(&s, &p, &g), 0.0);
    }

    #[test]
    fn constant_displacement() {
        let (p, g) = reference();
        let s = sample(InitialData { y0: Profile::Constant(2.0), ..InitialData::ZERO }, &p, &g);
        assert!((invariant_e(&s, &p, &g) - 1.5 * 2.0).abs() < 1e-14);
        let expected = p.varpi * 1.5 * 1.5 * 4.0;
        assert!((lyapunov_norm_sq(&s, &p, &g) - expected).abs() < 1e-13);
    }

    #[test]
    fn unit_velocity() {
        let (p, g) = reference();
        let s = sample(
            InitialData { z0: Profile::Constant(1.0), history: History::Constant(1.0), ..InitialData::ZERO },
            &p,
            &g,
        );
        // 1 + xi * 1 + varpi (1 - beta tau)^2 with the matching history
        let e = 1.0 - 0.5;
        assert!((invariant_e(&s, &p, &g) - e).abs() < 1e-14);
        let s = State { u: vec![0.0; g.m + 1], ..s };
        // u = 0 everywhere: 1 + 0.45 * 1^2
        assert!((lyapunov_norm_sq(&s, &p, &g) - 1.45).abs() < 1e-13);
    }

    #[test]
    fn chi_reference_values() {
        let g = make_grid(1.0, 50, 8).unwrap();
        let p = SystemParams::new(1.0, 0.25, 0.5, None, 1.0, None).unwrap();
        assert_eq!(equilibrium_chi(|_| 0.0, |_| 0.0, |_| 0.0, &p, &g), 0.0);
        assert!((equilibrium_chi(|_| 3.0, |_| 0.0, |_| 0.0, &p, &g) - 3.0).abs() < 1e-15);
        assert!((equilibrium_chi(|_| 0.0, |_| 1.0, |_| 0.0, &p, &g) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn chi_matches_invariant_on_compatible_data() {
        let g = make_grid(1.0, 40, 8).unwrap();
        let p = SystemParams::new(1.0, 0.25, 0.5, None, 1.0, None).unwrap();
        let data = InitialData {
            y0: Profile::Sine { k: 1.0 },
            z0: Profile::Constant(0.7),
            history: History::Constant(0.7),
        };
        let s = data.sample(&g, p.tau).unwrap().state;
        let chi = equilibrium_chi(
            |x| data.y0.eval(x, 1.0),
            |x| data.z0.eval(x, 1.0),
            |t| data.history.eval(t),
            &p,
            &g,
        );
        assert!((chi - invariant_e(&s, &p, &g) / p.gain()).abs() < 1e-14);
    }

    #[test]
    fn quadratures_are_second_order_on_polynomials() {
        let p = SystemParams::new(1.0, 0.5, 1.0, None, 1.0, None).unwrap();
        let exact_grad = 4.0 / 3.0; // int_0^1 (2x)^2
        let mut errs = vec![];
        for n in [20, 40, 80] {
            let g = make_grid(1.0, n, 8).unwrap();
            let s = init_quadratic(&g);
            let e = basic_energy(&s, &p, &g);
            errs.push((e - exact_grad).abs());
        }
        assert!(errs[0] / errs[1] > 3.5 && errs[1] / errs[2] > 3.5);
    }

    fn init_quadratic(g: &Grid1D) -> State {
        crate::grid::init_state(g, 1.0, |x| x * x, |_| 0.0, |_| 0.0).unwrap().state
    }

    #[test]
    fn norm_ratio_for_constant_displacement() {
        let (p, g) = reference();
        let s = sample(InitialData { y0: Profile::Constant(1.0), ..InitialData::ZERO }, &p, &g);
        let ratio = lyapunov_norm_sq(&s, &p, &g) / standard_norm_sq(&s, &g);
        assert!((ratio - 1.0125).abs() < 1e-13);
    }

    #[test]
    fn equivalence_check_is_seeded() {
        let (p, g) = reference();
        let a = norm_equivalence_check(&p, &g, 200, 7).unwrap();
        let b = norm_equivalence_check(&p, &g, 200, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.0 > 0.0 && a.0 <= a.1 && a.1.is_finite());
        assert!(norm_equivalence_check(&p, &g, 10, 7).is_err());
    }

    #[test]
    fn vanishing_weight_loses_constant_control() {
        let (mut p, g) = reference();
        p.varpi = 0.0;
        let s = sample(InitialData { y0: Profile::Constant(1.0), ..InitialData::ZERO }, &p, &g);
        assert_eq!(lyapunov_norm_sq(&s, &p, &g), 0.0);
    }

    fn arb_state(g: Grid1D) -> impl Strategy<Value = State> {
        (
            proptest::collection::vec(-1.0f64..1.0, g.nodes()),
            proptest::collection::vec(-1.0f64..1.0, g.nodes()),
            proptest::collection::vec(-1.0f64..1.0, g.m + 1),
        )
            .prop_map(|(y, z, u)| State { y, z, u, t: 0.0 })
    }

    proptest! {
        #[test]
        fn lyapunov_norm_is_quadratic(s in arb_state(make_grid(1.0, 10, 4).unwrap()), c in -3.0f64..3.0) {
            let (p, _) = reference();
            let g = make_grid(1.0, 10, 4).unwrap();
            let a = lyapunov_norm_sq(&s.scaled(c), &p, &g);
            let b = c * c * lyapunov_norm_sq(&s, &p, &g);
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }

        #[test]
        fn invariant_is_linear(
            s in arb_state(make_grid(1.0, 10, 4).unwrap()),
            r in arb_state(make_grid(1.0, 10, 4).unwrap()),
            c in -3.0f64..3.0,
        ) {
            let (p, _) = reference();
            let g = make_grid(1.0, 10, 4).unwrap();
            let sum = State {
                y: s.y.iter().zip(&r.y).map(|(a, b)| a + c * b).collect(),
                z: s.z.iter().zip(&r.z).map(|(a, b)| a + c * b).collect(),
                u: s.u.iter().zip(&r.u).map(|(a, b)| a + c * b).collect(),
                t: 0.0,
            };
            let lhs = invariant_e(&sum, &p, &g);
            let rhs = invariant_e(&s, &p, &g) + c * invariant_e(&r, &p, &g);
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
