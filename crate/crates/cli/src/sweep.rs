//! Parameter sweeps over `(alpha, beta, tau)` triples, run on a fixed pool
//! of worker threads.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use delaywave_core::functionals::equilibrium_chi;
use delaywave_core::spectral::ResolventSolver;
use delaywave_core::stepper::run_with;

use crate::config::Config;
use crate::csvio::fmt_f64;
use crate::error::CliResult;

/// Applies `f` to every item on up to `workers` threads, preserving order.
pub fn parallel_map<T: Sync, R: Send>(items: &[T], workers: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = workers.clamp(1, items.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<R>>> = items.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                *slots[i].lock().expect("worker panicked") = Some(r);
            });
        }
    });
    slots.into_iter().map(|m| m.into_inner().expect("worker panicked").expect("slot filled")).collect()
}

/// Cartesian product in `alpha`-major order; duplicates are kept.
pub fn triples(config: &Config) -> Vec<(f64, f64, f64)> {
    let s = &config.sweep;
    let mut out = Vec::with_capacity(s.alpha.len() * s.beta.len() * s.tau.len());
    for &a in &s.alpha {
        for &b in &s.beta {
            for &t in &s.tau {
                out.push((a, b, t));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub beta: f64,
    pub tau: f64,
    pub admissible: bool,
    pub chi: f64,
    /// `max |y(T) - chi|`.
    pub final_error: f64,
    pub basic_energy: f64,
    /// `max_t |E(t) - E(0)|`.
    pub invariant_drift: f64,
    pub max_real_eigenvalue: Option<f64>,
    pub converged: bool,
    pub status: String,
}

pub const SWEEP_HEADER: [&str; 11] = [
    "alpha",
    "beta",
    "tau",
    "admissible",
    "chi",
    "final_error",
    "basic_energy",
    "invariant_drift",
    "max_re_eigenvalue",
    "converged",
    "status",
];

fn run_triple(config: &Config, (alpha, beta, tau): (f64, f64, f64), allow_unsafe: bool) -> SweepRow {
    let mut row = SweepRow {
        alpha,
        beta,
        tau,
        admissible: false,
        chi: f64::NAN,
        final_error: f64::NAN,
        basic_energy: f64::NAN,
        invariant_drift: f64::NAN,
        max_real_eigenvalue: None,
        converged: false,
        status: String::new(),
    };
    let params = match config.params_for(alpha, beta, tau, None, false) {
        Ok(p) => {
            row.admissible = true;
            p
        }
        Err(e) if !allow_unsafe => {
            row.status = format!("skipped: {e}");
            return row;
        }
        Err(_) => match config.params_for(alpha, beta, tau, None, true) {
            Ok(p) => p,
            Err(e) => {
                row.status = format!("error: {e}");
                return row;
            }
        },
    };
    let result = (|| -> CliResult<()> {
        let scenario = config.scenario(params, allow_unsafe)?;
        let grid = scenario.locked_grid()?;
        let len = grid.length;
        let data = config.initial;
        row.chi = equilibrium_chi(
            |x| data.y0.eval(x, len),
            |x| data.z0.eval(x, len),
            |s| data.history.eval(s),
            &params,
            &grid,
        );
        let (mut e0, mut drift) = (0.0, 0.0f64);
        let out = run_with(&scenario, |k, s| {
            let e = s.record().invariant_e;
            if k == 0 {
                e0 = e;
            }
            drift = drift.max((e - e0).abs());
        })?;
        row.final_error = out.final_state.y.iter().map(|y| (y - row.chi).abs()).fold(0.0, f64::max);
        row.basic_energy = out.series.records.last().map_or(f64::NAN, |r| r.basic_energy);
        row.invariant_drift = drift;
        row.converged = row.final_error <= config.sweep.tolerance;
        if config.sweep.spectral {
            let solver = ResolventSolver::new(&params, &config.spectral_grid()?)?;
            row.max_real_eigenvalue = Some(solver.max_real_part());
        }
        Ok(())
    })();
    row.status = match result {
        Ok(()) => "ok".into(),
        Err(e) => format!("error: {e}"),
    };
    row
}

/// One row per triple. Inadmissible triples are flagged and skipped unless
/// `allow_unsafe` is set; failures are recorded in the row.
pub fn sweep(config: &Config, allow_unsafe: bool, workers: usize) -> Vec<SweepRow> {
    let items = triples(config);
    parallel_map(&items, workers, |&t| run_triple(config, t, allow_unsafe))
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(SWEEP_HEADER).expect("writing to memory");
    for r in rows {
        out.write_record([
            fmt_f64(r.alpha),
            fmt_f64(r.beta),
            fmt_f64(r.tau),
            r.admissible.to_string(),
            fmt_f64(r.chi),
            fmt_f64(r.final_error),
            fmt_f64(r.basic_energy),
            fmt_f64(r.invariant_drift),
            r.max_real_eigenvalue.map_or(String::new(), fmt_f64),
            r.converged.to_string(),
            r.status.clone(),
        ])
        .expect("writing to memory");
    }
    String::from_utf8(out.into_inner().expect("flush to memory")).expect("utf8 output")
}
