//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use delaywave_core::delay::HistoryBuffer;
use delaywave_core::functionals::{equilibrium_chi, norm_equivalence_check};
use delaywave_core::grid::{init_state, make_grid};
use delaywave_core::spectral::{
    assemble_generator, deflate, dense_resolvent_solve, dissipation_check, eigenvalues,
    kernel_vector, linspace, resolvent_bvp_check, Kernel, ResolventRhs, ResolventSolver,
};
use delaywave_core::stepper::{run_with, Forcing, Scenario};
use delaywave_core::{Grid1D, InitialData, Profile, Stepper, SystemParams};
use num_complex::Complex64;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn max_abs_dev(v: &[f64], c: f64) -> f64 {
    v.iter().map(|x| (x - c).abs()).fold(0.0, f64::max)
}

/// Everything measured on one run of the reference scenario.
struct ReferenceRun {
    n: usize,
    dt: f64,
    err_100: f64,
    z_100: f64,
    err_200: f64,
    e_drift_rel: f64,
    /// Largest `|Phi(t)|_H - min_{s <= t} |Phi(s)|_H`.
    norm_rise: f64,
    /// Sum of all step-to-step increases of `|Phi|_H`.
    norm_jitter: f64,
    norm_0: f64,
    /// Largest increase of the scheme's discrete energy over one step.
    max_step_increase: f64,
}

fn reference_params() -> SystemParams {
    SystemParams::new(1.0, 0.25, 0.5, None, 1.0, None).unwrap()
}

fn reference_run(n: usize) -> ReferenceRun {
    let scenario = Scenario {
        params: reference_params(),
        grid: make_grid(1.0, n, 4).unwrap(),
        initial: InitialData { z0: Profile::Constant(1.0), ..InitialData::ZERO },
        t_final: 200.0,
        record_every: 1,
        cfl: 0.9,
        allow_inadmissible: false,
    };
    let mut r = ReferenceRun {
        n,
        dt: 0.0,
        err_100: f64::NAN,
        z_100: f64::NAN,
        err_200: f64::NAN,
        e_drift_rel: 0.0,
        norm_rise: 0.0,
        norm_jitter: 0.0,
        norm_0: 0.0,
        max_step_increase: f64::NEG_INFINITY,
    };
    let (mut e0, mut prev_norm, mut prev_energy) = (0.0, 0.0, 0.0);
    let mut min_norm = f64::INFINITY;
    let out = run_with(&scenario, |k, s| {
        let rec = s.record();
        let norm = rec.lyap_norm_sq.sqrt();
        let energy = s.staggered_energy();
        if k == 0 {
            e0 = rec.invariant_e;
            r.norm_0 = norm;
            r.dt = s.dt();
        } else {
            r.norm_jitter += (norm - prev_norm).max(0.0);
            r.max_step_increase = r.max_step_increase.max(energy - prev_energy);
        }
        min_norm = min_norm.min(norm);
        r.norm_rise = r.norm_rise.max(norm - min_norm);
        prev_norm = norm;
        prev_energy = energy;
        r.e_drift_rel = r.e_drift_rel.max((rec.invariant_e - e0).abs() / e0.abs());
        if (s.state().t - 100.0).abs() < 0.5 * s.dt() {
            r.err_100 = max_abs_dev(&s.state().y, 0.8);
            r.z_100 = max_abs_dev(&s.state().z, 0.0);
        }
    })
    .unwrap();
    r.err_200 = max_abs_dev(&out.final_state.y, 0.8);
    r
}

fn criterion_1(run: &ReferenceRun) -> Outcome {
    let g = make_grid(1.0, run.n, 4).unwrap();
    let chi = equilibrium_chi(|_| 0.0, |_| 1.0, |_| 0.0, &reference_params(), &g);
    let pass = (chi - 0.8).abs() < 1e-15
        && run.err_100 <= 1e-3
        && run.z_100 <= 1e-3
        && run.err_200 <= run.err_100;
    outcome(
        pass,
        format!(
            "chi={chi} |y-chi|(100)={:.3e} |z|(100)={:.3e} |y-chi|(200)={:.3e}",
            run.err_100, run.z_100, run.err_200
        ),
    )
}

fn criterion_2(coarse: &ReferenceRun, fine: &ReferenceRun) -> Outcome {
    let ratio = coarse.e_drift_rel / fine.e_drift_rel;
    let pass = coarse.e_drift_rel <= 1e-4 && (3.0..=5.0).contains(&ratio);
    outcome(
        pass,
        format!(
            "drift N={}: {:.3e}, N={}: {:.3e}, ratio {ratio:.3}",
            coarse.n, coarse.e_drift_rel, fine.n, fine.e_drift_rel
        ),
    )
}

fn criterion_3(coarse: &ReferenceRun, fine: &ReferenceRun) -> Outcome {
    let slack_ok = [coarse, fine].iter().all(|r| r.norm_rise <= 1e-3 * r.norm_0);
    let pass = slack_ok && fine.max_step_increase <= 1e-10;
    outcome(
        pass,
        format!(
            "max rise above running min N={}: {:.3e}, N={}: {:.3e} (limit {:.3e}); \
             summed step increases {:.3e}, {:.3e}; max per-step energy increase N={}: {:.3e}",
            coarse.n,
            coarse.norm_rise,
            fine.n,
            fine.norm_rise,
            1e-3 * coarse.norm_0,
            coarse.norm_jitter,
            fine.norm_jitter,
            fine.n,
            fine.max_step_increase
        ),
    )
}

fn criterion_4() -> Outcome {
    let p = reference_params();
    let g = make_grid(1.0, 50, 32).unwrap();
    let state = init_state(&g, p.tau, |_| 3.0, |_| 0.0, |_| 0.0).unwrap().state;
    let mut s = Stepper::new(p, g, 0.9, state).unwrap();
    for _ in 0..10_000 {
        s.step().unwrap();
    }
    let st = s.state();
    let drift = max_abs_dev(&st.y, 3.0).max(max_abs_dev(&st.z, 0.0)).max(max_abs_dev(&st.u, 0.0));
    outcome(drift <= 1e-12, format!("max drift after 10^4 steps {drift:.3e}"))
}

fn spectral_params() -> SystemParams {
    SystemParams::new(1.0, 0.5, 1.0, Some(1.0), 1.0, None).unwrap()
}

fn criterion_5() -> Outcome {
    let p = spectral_params();
    let g = Grid1D::new(1.0, 40, 16).unwrap();
    let gen = assemble_generator(&p, &g);
    let full = eigenvalues(&gen.matrix).unwrap();
    let nearest_zero = full.iter().map(|e| e.norm()).fold(f64::INFINITY, f64::min);
    let (_, v) = kernel_vector(&gen.matrix).unwrap();
    let ones = (0..=g.n).map(|i| v[gen.layout.y(i)]).sum::<f64>() / ((g.n + 1) as f64).sqrt();
    let cosine = ones.abs() / v.norm();
    let deflated = deflate(&gen, &p, &g).unwrap();
    let ev = eigenvalues(&deflated.matrix).unwrap();
    let max_re = ev.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max);
    let min_abs_re = ev.iter().map(|e| e.re.abs()).fold(f64::INFINITY, f64::min);
    let pass = nearest_zero <= 1e-10 && cosine >= 1.0 - 1e-8 && max_re < 0.0 && min_abs_re > 1e-6;
    outcome(
        pass,
        format!(
            "d={} |lambda_0|={nearest_zero:.3e} cos={cosine:.12} max Re={max_re:.4e} min|Re|={min_abs_re:.4e} deflation residual={:.2e}",
            gen.dim(),
            deflated.residual
        ),
    )
}

fn criterion_6() -> Outcome {
    let p = spectral_params();
    let g = Grid1D::new(1.0, 80, 32).unwrap();
    let r = dissipation_check(&p, &g, 1000, 2024).unwrap();
    outcome(
        r.max_scaled_excess <= 1e-2,
        format!("max (form - bound)/(|Phi|^2 dx) over {} states = {:.3e}", r.samples, r.max_scaled_excess),
    )
}

fn criterion_7() -> Outcome {
    let p = spectral_params();
    let g = Grid1D::new(1.0, 40, 16).unwrap();
    let solver = ResolventSolver::new(&p, &g).unwrap();
    let gammas = linspace(-50.0, 50.0, 101);
    let mut pass = true;
    let (mut lo, mut hi, mut worst) = (f64::INFINITY, 0.0f64, f64::INFINITY);
    for &gamma in &gammas {
        match solver.point(gamma) {
            Ok(pt) => {
                let margin = pt.norm / pt.lower_bound;
                worst = worst.min(margin);
                pass &= pt.norm.is_finite() && pt.norm >= pt.lower_bound * (1.0 - 1e-8);
                lo = lo.min(pt.norm);
                hi = hi.max(pt.norm);
            }
            Err(_) => pass = false,
        }
    }
    outcome(pass, format!("norms in [{lo:.4e}, {hi:.4e}], min norm/lower bound = {worst:.6}"))
}

/// Boundary feedback `-alpha z_N - beta u_M` along a run.
fn feedback_trace<D: delaywave_core::delay::DelayFeedback>(mut s: Stepper<D>, t_final: f64) -> Vec<(f64, f64)> {
    let mut trace = vec![(s.state().t, s.boundary_feedback())];
    while s.state().t < t_final {
        s.step().unwrap();
        trace.push((s.state().t, s.boundary_feedback()));
    }
    trace
}

/// Four-point Lagrange interpolation on a uniform trace.
fn interpolate(trace: &[(f64, f64)], dt: f64, t: f64) -> f64 {
    let k = ((t / dt).floor() as usize).clamp(1, trace.len() - 3);
    let nodes = [k - 1, k, k + 1, k + 2];
    let mut acc = 0.0;
    for &a in &nodes {
        let mut w = 1.0;
        for &b in &nodes {
            if a != b {
                w *= (t - trace[b].0) / (trace[a].0 - trace[b].0);
            }
        }
        acc += w * trace[a].1;
    }
    acc
}

fn oracle_difference(n: usize, m: usize) -> (f64, f64, f64) {
    let p = SystemParams::new(1.0, 0.5, 0.5, None, 1.0, None).unwrap();
    let g = make_grid(1.0, n, m).unwrap();
    let y0 = |x: f64| (-((x - 0.5) / 0.1).powi(2)).exp();
    let state = init_state(&g, p.tau, y0, |_| 0.0, |_| 0.0).unwrap().state;
    let t_final = 3.0;
    let shift = Stepper::new(p, g, 0.9, state.clone()).unwrap();
    let dt = shift.dt();
    let a = feedback_trace(shift, t_final);
    let dt_o = p.tau / (m as f64 + 0.5);
    let buffer = HistoryBuffer::from_history(|_| 0.0, p.tau, dt_o, 0.0);
    let oracle = Stepper::with_feedback(p, g, dt_o, 0.9, state, buffer, None).unwrap();
    let b = feedback_trace(oracle, t_final - dt);
    let diff = b.iter().map(|&(t, v)| (v - interpolate(&a, dt, t)).abs()).fold(0.0, f64::max);
    // z_N'' from the shift run
    let mut s = Stepper::new(p, g, 0.9, init_state(&g, p.tau, y0, |_| 0.0, |_| 0.0).unwrap().state).unwrap();
    let mut z = vec![s.state().boundary_velocity()];
    while s.state().t < t_final {
        s.step().unwrap();
        z.push(s.state().boundary_velocity());
    }
    let zpp = z.windows(3).map(|w| (w[2] - 2.0 * w[1] + w[0]).abs() / (dt * dt)).fold(0.0, f64::max);
    (diff, dt, zpp)
}

fn criterion_8() -> Outcome {
    let (d1, dt1, zpp1) = oracle_difference(50, 50);
    let (d2, dt2, zpp2) = oracle_difference(100, 100);
    let bound1 = 5.0 * dt1 * dt1 * zpp1;
    let bound2 = 5.0 * dt2 * dt2 * zpp2;
    let ratio = d1 / d2;
    let pass = d1 <= bound1 && d2 <= bound2 && ratio >= 3.5;
    outcome(
        pass,
        format!("diff {d1:.3e} (bound {bound1:.3e}), {d2:.3e} (bound {bound2:.3e}), ratio {ratio:.3}"),
    )
}

fn mms_error(n: usize) -> f64 {
    let p = SystemParams::new(1.0, 0.5, 0.5, None, 1.0, None).unwrap();
    let g = make_grid(1.0, n, n).unwrap();
    let (alpha, beta, tau) = (p.alpha, p.beta, p.tau);
    let state =
        init_state(&g, tau, |x| (PI * x).cos(), |_| 0.0, |s| PI * (PI * s).sin()).unwrap().state;
    let boundary = move |t: f64| alpha * PI * (PI * t).sin() + beta * PI * (PI * (t - tau)).sin();
    let forcing = Forcing::new(|_, _| 0.0, boundary);
    let mut s = Stepper::with_forcing(p, g, 0.9, state, forcing).unwrap();
    let t_final = 2.0;
    let steps = (t_final / s.dt()).round() as usize;
    for _ in 0..steps {
        s.step().unwrap();
    }
    let t = s.state().t;
    (0..=n).map(|i| (s.state().y[i] - (PI * g.x(i)).cos() * (PI * t).cos()).abs()).fold(0.0, f64::max)
}

fn criterion_9() -> Outcome {
    let e: Vec<f64> = [20, 40, 80].iter().map(|&n| mms_error(n)).collect();
    let (r1, r2) = (e[0] / e[1], e[1] / e[2]);
    let pass = (3.6..=4.4).contains(&r1) && (3.6..=4.4).contains(&r2);
    outcome(pass, format!("errors {:.3e} {:.3e} {:.3e}, ratios {r1:.3} {r2:.3}", e[0], e[1], e[2]))
}

fn criterion_10() -> Outcome {
    let p = spectral_params();
    let g = Grid1D::new(1.0, 80, 32).unwrap();
    let gen = assemble_generator(&p, &g);
    let rhs = ResolventRhs {
        f: (0..=g.n).map(|i| (0.5 * PI * g.x(i)).sin()).collect(),
        g: (0..=g.n).map(|i| (PI * g.x(i)).cos()).collect(),
        v: (1..=g.m).map(|j| g.rho(j)).collect(),
    };
    let lambda = Complex64::new(1.0, 0.0);
    let bvp = resolvent_bvp_check(&p, &g, lambda, &rhs, Kernel::Upwind).unwrap();
    let dense = dense_resolvent_solve(&gen, lambda, &rhs).unwrap();
    let diff = bvp.max_diff(&dense);
    let tol = 10.0 * g.dx * g.dx;
    let pass = diff <= tol && bvp.residual <= 1e-10;
    outcome(pass, format!("max diff {diff:.3e} (limit {tol:.3e}), residual {:.3e}", bvp.residual))
}

fn criterion_11() -> Outcome {
    let p = reference_params();
    let g = Grid1D::new(1.0, 80, 40).unwrap();
    let (lo, hi) = norm_equivalence_check(&p, &g, 10_000, 11).unwrap();
    let (lo2, hi2) = norm_equivalence_check(&p, &g, 10_000, 11).unwrap();
    let reproducible = lo.to_bits() == lo2.to_bits() && hi.to_bits() == hi2.to_bits();
    let pass = lo > 0.0 && hi.is_finite() && lo >= 1e-4 && reproducible;
    outcome(pass, format!("varpi={:.6e} ratio in [{lo:.6e}, {hi:.6e}], reproducible={reproducible}", p.varpi))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let coarse = reference_run(200);
    let fine = reference_run(400);
    let results: Vec<(&str, Outcome)> = vec![
        ("1 equilibrium convergence", criterion_1(&coarse)),
        ("2 invariant conservation", criterion_2(&coarse, &fine)),
        ("3 contraction", criterion_3(&coarse, &fine)),
        ("4 fixed point", criterion_4()),
        ("5 deflated spectrum", criterion_5()),
        ("6 dissipativity", criterion_6()),
        ("7 resolvent on the imaginary axis", criterion_7()),
        ("8 delay line vs interpolating oracle", criterion_8()),
        ("9 manufactured solution order", criterion_9()),
        ("10 resolvent two-path cross-check", criterion_10()),
        ("11 norm equivalence", criterion_11()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed ({:.1}s)",
        results.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
