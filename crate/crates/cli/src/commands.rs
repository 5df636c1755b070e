use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use delaywave_core::functionals::{equilibrium_chi, norm_equivalence_check};
use delaywave_core::params::{validate, varpi_bound};
use delaywave_core::spectral::ResolventSolver;
use delaywave_core::stepper::run;

use crate::config::{check_writable, load_config, parse_config, Config};
use crate::csvio::{emit, fmt_f64, read_table, timeseries_csv, write_preamble, write_table};
use crate::error::{CliError, CliResult};
use crate::fit::{fit_decay, FitReport};
use crate::sweep::{parallel_map, sweep, sweep_csv};

/// Flags shared by every subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct Options {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub allow_unsafe: bool,
    pub seed: u64,
    pub workers: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self { config: None, out: None, allow_unsafe: false, seed: 0, workers: 1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    CheckParams,
    Simulate,
    Spectrum,
    ResolventSweep,
    Sweep,
    /// Fits an existing time series, or simulates from the config first.
    FitDecay { input: Option<PathBuf> },
}

fn config_path(opts: &Options) -> CliResult<&Path> {
    opts.config.as_deref().ok_or_else(|| CliError::Validation("--config <path> is required".into()))
}

fn output_target(opts: &Options, fallback: Option<&Path>) -> CliResult<Option<PathBuf>> {
    let target = opts.out.clone().or_else(|| fallback.map(Path::to_path_buf));
    if let Some(p) = &target {
        check_writable(p)?;
    }
    Ok(target)
}

pub fn execute(cmd: &Command, opts: &Options) -> CliResult<()> {
    match cmd {
        Command::CheckParams => check_params(opts),
        Command::Simulate => simulate(opts),
        Command::Spectrum => spectrum(opts),
        Command::ResolventSweep => resolvent_sweep(opts),
        Command::Sweep => run_sweep(opts),
        Command::FitDecay { input } => fit(opts, input.as_deref()),
    }
}

fn check_params(opts: &Options) -> CliResult<()> {
    let path = config_path(opts)?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
    let config = parse_config(&text, &path.display().to_string())?;
    let p = &config.params;
    let report = match p.xi {
        Some(xi) => validate(p.alpha, p.beta, p.tau, xi),
        None => validate(p.alpha, p.beta, p.tau, p.tau * p.alpha),
    };
    let mut s = String::new();
    let _ = writeln!(s, "alpha = {}, beta = {}, tau = {}", p.alpha, p.beta, p.tau);
    let _ = writeln!(s, "xi interval = ({}, {})", p.tau * p.beta, p.tau * (2.0 * p.alpha - p.beta));
    if !report.accepted() {
        let _ = writeln!(s, "admissible = false");
        for v in &report.violations {
            let _ = writeln!(s, "  violation: {v}");
        }
        emit(&s, opts.out.as_deref())?;
        return Err(CliError::Validation("parameters are not admissible".into()));
    }
    let params = config.system_params(false)?;
    let grid = config.scenario(params, false)?.locked_grid()?;
    let len = grid.length;
    let chi = equilibrium_chi(
        |x| config.initial.y0.eval(x, len),
        |x| config.initial.z0.eval(x, len),
        |t| config.initial.history.eval(t),
        &params,
        &grid,
    );
    let (lo, hi) = norm_equivalence_check(&params, &grid, 1000, opts.seed)?;
    let _ = writeln!(s, "admissible = true");
    let _ = writeln!(s, "xi = {}", params.xi);
    let _ = writeln!(s, "delta = {}", params.delta);
    let _ = writeln!(
        s,
        "varpi = {} (bound {})",
        params.varpi,
        varpi_bound(params.alpha, params.beta, params.xi, params.delta, params.length)
    );
    let (cz, cu) = params.dissipation_coefficients();
    let _ = writeln!(s, "dissipation coefficients = ({cz}, {cu})");
    let _ = writeln!(s, "chi = {chi}");
    let _ = writeln!(s, "M = {}, dt = {}", grid.m, params.tau / grid.m as f64);
    let _ = writeln!(s, "norm ratio over 1000 states (seed {}) in [{lo}, {hi}]", opts.seed);
    emit(&s, opts.out.as_deref())
}

fn run_metadata(config: &Config, opts: &Options) -> CliResult<(String, Option<PathBuf>)> {
    let params = config.system_params(opts.allow_unsafe)?;
    let scenario = config.scenario(params, opts.allow_unsafe)?;
    let target = output_target(opts, config.run.output.as_deref())?;
    let out = run(&scenario)?;
    if out.junction_mismatch > delaywave_core::grid::JUNCTION_TOL {
        eprintln!(
            "warning: |f(0) - z0(L)| = {:.3e}; the initial data lie outside the generator domain",
            out.junction_mismatch
        );
    }
    let series = &out.series;
    let meta = vec![
        ("format".to_string(), "delaywave time series".to_string()),
        ("seed".to_string(), opts.seed.to_string()),
        ("unsafe".to_string(), opts.allow_unsafe.to_string()),
        ("dt".to_string(), fmt_f64(series.dt)),
        ("M".to_string(), series.m.to_string()),
        ("steps".to_string(), series.steps.to_string()),
        ("xi".to_string(), fmt_f64(params.xi)),
        ("varpi".to_string(), fmt_f64(params.varpi)),
        ("delta".to_string(), fmt_f64(params.delta)),
        ("junction_mismatch".to_string(), fmt_f64(out.junction_mismatch)),
    ];
    let text = timeseries_csv(&series.records, &meta, Some(&config.to_ini(Some(&params))));
    Ok((text, target))
}

fn simulate(opts: &Options) -> CliResult<()> {
    let config = load_config(config_path(opts)?, opts.allow_unsafe)?;
    let (text, target) = run_metadata(&config, opts)?;
    emit(&text, target.as_deref())
}

fn solver(config: &Config, opts: &Options) -> CliResult<ResolventSolver> {
    let params = config.system_params(opts.allow_unsafe)?;
    Ok(ResolventSolver::new(&params, &config.spectral_grid()?)?)
}

fn spectrum(opts: &Options) -> CliResult<()> {
    let config = load_config(config_path(opts)?, opts.allow_unsafe)?;
    let target = output_target(opts, None)?;
    let s = solver(&config, opts)?;
    let meta = vec![
        ("dim".to_string(), (s.deflated.matrix.nrows() + 1).to_string()),
        ("deflated_dim".to_string(), s.deflated.matrix.nrows().to_string()),
        ("max_real_part".to_string(), fmt_f64(s.max_real_part())),
        ("deflation_residual".to_string(), fmt_f64(s.deflated.residual)),
        ("metric".to_string(), "euclidean".to_string()),
    ];
    let rows: Vec<Vec<f64>> = s.spectrum.iter().map(|e| vec![e.re, e.im]).collect();
    let mut buf = Vec::new();
    write_preamble(&mut buf, &meta, Some(&config.to_ini(None))).map_err(|e| CliError::io("<memory>", e))?;
    write_table(&mut buf, &["re", "im"], &rows).map_err(|e| CliError::io("<memory>", e))?;
    eprintln!(
        "d = {}, max Re = {:.6e}, deflation residual = {:.3e}",
        s.deflated.matrix.nrows() + 1,
        s.max_real_part(),
        s.deflated.residual
    );
    emit(&String::from_utf8_lossy(&buf), target.as_deref())
}

fn resolvent_sweep(opts: &Options) -> CliResult<()> {
    let config = load_config(config_path(opts)?, opts.allow_unsafe)?;
    let target = output_target(opts, None)?;
    let s = solver(&config, opts)?;
    let gammas = config.gammas();
    let points = parallel_map(&gammas, opts.workers, |&g| -> CliResult<Vec<f64>> {
        let p = s.point(g)?;
        Ok(vec![p.gamma, p.norm, p.lower_bound, s.norm_h(g)?])
    });
    let rows = points.into_iter().collect::<CliResult<Vec<_>>>()?;
    if let Some(bad) = rows.iter().find(|r| !r[1].is_finite()) {
        return Err(CliError::Numerical(format!("non-finite resolvent norm at gamma = {}", bad[0])));
    }
    let meta = vec![
        ("max_real_part".to_string(), fmt_f64(s.max_real_part())),
        ("deflation_residual".to_string(), fmt_f64(s.deflated.residual)),
        ("resolvent_norm".to_string(), "euclidean spectral norm".to_string()),
        ("resolvent_norm_h".to_string(), "spectral norm in the weighted inner product".to_string()),
    ];
    let mut buf = Vec::new();
    write_preamble(&mut buf, &meta, Some(&config.to_ini(None))).map_err(|e| CliError::io("<memory>", e))?;
    write_table(&mut buf, &["gamma", "resolvent_norm", "lower_bound", "resolvent_norm_h"], &rows)
        .map_err(|e| CliError::io("<memory>", e))?;
    emit(&String::from_utf8_lossy(&buf), target.as_deref())
}

fn run_sweep(opts: &Options) -> CliResult<()> {
    let path = config_path(opts)?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
    let config = parse_config(&text, &path.display().to_string())?;
    if config.sweep.alpha.is_empty() || config.sweep.beta.is_empty() || config.sweep.tau.is_empty() {
        return Err(CliError::Validation("[sweep] needs non-empty alpha, beta and tau lists".into()));
    }
    let target = output_target(opts, None)?;
    let rows = sweep(&config, opts.allow_unsafe, opts.workers);
    let failed = rows.iter().filter(|r| r.status.starts_with("error")).count();
    eprintln!("{} rows, {} admissible, {failed} failed", rows.len(), rows.iter().filter(|r| r.admissible).count());
    emit(&sweep_csv(&rows), target.as_deref())
}

fn fit(opts: &Options, input: Option<&Path>) -> CliResult<()> {
    let records = match input {
        Some(p) => read_table(p)?.records()?,
        None => {
            let config = load_config(config_path(opts)?, opts.allow_unsafe)?;
            let params = config.system_params(opts.allow_unsafe)?;
            run(&config.scenario(params, opts.allow_unsafe)?)?.series.records
        }
    };
    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    let e: Vec<f64> = records.iter().map(|r| r.basic_energy).collect();
    let report = fit_decay(&t, &e)?;
    let mut text = report.describe();
    if let FitReport::Fitted { .. } = report {
        text.push_str("fits are descriptive; no decay law is inferred\n");
    }
    emit(&text, output_target(opts, None)?.as_deref())
}
