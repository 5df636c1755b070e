//! INI-like configuration files.
//!
//! ```text
//! # comment (also `;`)
//! [params]
//! alpha = 1.0
//! beta = 0.25
//! tau = 0.5
//! xi = 0.5          ; optional, defaults to the interval midpoint
//! safety = 0.9      ; optional
//!
//! [grid]
//! L = 1.0
//! N = 200
//! M_min = 8
//! cfl = 0.9
//!
//! [initial]
//! y0 = zero | constant(c) | gaussian(center, width, amplitude) | sine(k) | cosine(k)
//! z0 = (same presets)
//! f = zero | constant(c) | ramp(slope)
//!
//! [run]
//! T_final = 100
//! record_every = 10
//! output = run.csv
//!
//! [spectrum]
//! N = 40
//! M = 16
//! gamma_min = -50
//! gamma_max = 50
//! gamma_count = 101
//!
//! [sweep]
//! alpha = 0.5, 1.0, 2.0
//! beta = 0.1, 0.25
//! tau = 0.5
//! tolerance = 1e-3
//! spectral = false
//! ```
//!
//! Only `alpha`, `beta` and `tau` are required. Every line is either blank,
//! a comment, a `[section]` header or `key = value`. Unknown sections,
//! unknown keys, repeated keys and repeated sections are errors.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use delaywave_core::grid::make_grid;
use delaywave_core::params::DEFAULT_SAFETY;
use delaywave_core::stepper::{Scenario, DEFAULT_CFL};
use delaywave_core::{Grid1D, History, InitialData, Profile, SystemParams};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct ParamsBlock {
    pub alpha: f64,
    pub beta: f64,
    pub tau: f64,
    pub xi: Option<f64>,
    pub safety: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridBlock {
    pub length: f64,
    pub n: usize,
    pub m_min: usize,
    pub cfl: f64,
}

impl Default for GridBlock {
    fn default() -> Self {
        Self { length: 1.0, n: 100, m_min: 8, cfl: DEFAULT_CFL }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunBlock {
    pub t_final: f64,
    pub record_every: usize,
    pub output: Option<PathBuf>,
}

impl Default for RunBlock {
    fn default() -> Self {
        Self { t_final: 10.0, record_every: 1, output: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumBlock {
    pub n: usize,
    pub m: usize,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub gamma_count: usize,
}

impl Default for SpectrumBlock {
    fn default() -> Self {
        Self { n: 40, m: 16, gamma_min: -50.0, gamma_max: 50.0, gamma_count: 101 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepBlock {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub tau: Vec<f64>,
    pub tolerance: f64,
    pub spectral: bool,
}

impl Default for SweepBlock {
    fn default() -> Self {
        Self { alpha: Vec::new(), beta: Vec::new(), tau: Vec::new(), tolerance: 1e-3, spectral: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub params: ParamsBlock,
    pub grid: GridBlock,
    pub initial: InitialData,
    pub run: RunBlock,
    pub spectrum: SpectrumBlock,
    pub sweep: SweepBlock,
}

const SECTIONS: [&str; 6] = ["params", "grid", "initial", "run", "spectrum", "sweep"];

fn keys(section: &str) -> &'static [&'static str] {
    match section {
        "params" => &["alpha", "beta", "tau", "xi", "safety"],
        "grid" => &["L", "N", "M_min", "cfl"],
        "initial" => &["y0", "z0", "f"],
        "run" => &["T_final", "record_every", "output"],
        "spectrum" => &["N", "M", "gamma_min", "gamma_max", "gamma_count"],
        "sweep" => &["alpha", "beta", "tau", "tolerance", "spectral"],
        _ => &[],
    }
}

struct Ctx<'a> {
    origin: &'a str,
    line: usize,
}

impl Ctx<'_> {
    fn err(&self, message: impl Into<String>) -> CliError {
        CliError::Config { path: self.origin.to_string(), line: self.line, message: message.into() }
    }

    fn float(&self, key: &str, v: &str) -> CliResult<f64> {
        let x: f64 = v.parse().map_err(|_| self.err(format!("{key}: expected a number, got `{v}`")))?;
        if !x.is_finite() {
            return Err(self.err(format!("{key}: value must be finite")));
        }
        Ok(x)
    }

    fn count(&self, key: &str, v: &str) -> CliResult<usize> {
        v.parse().map_err(|_| self.err(format!("{key}: expected a non-negative integer, got `{v}`")))
    }

    fn flag(&self, key: &str, v: &str) -> CliResult<bool> {
        match v {
            "true" => Ok(true),
            "false" => Ok(false),
            _ => Err(self.err(format!("{key}: expected true or false, got `{v}`"))),
        }
    }

    fn list(&self, key: &str, v: &str) -> CliResult<Vec<f64>> {
        v.split(',').map(|s| self.float(key, s.trim())).collect()
    }

    /// `name` or `name(a, b, ...)`.
    fn call<'v>(&self, key: &str, v: &'v str) -> CliResult<(&'v str, Vec<f64>)> {
        let Some(open) = v.find('(') else {
            return Ok((v, Vec::new()));
        };
        let Some(inner) = v[open + 1..].strip_suffix(')') else {
            return Err(self.err(format!("{key}: unbalanced parentheses in `{v}`")));
        };
        let args = if inner.trim().is_empty() { Vec::new() } else { self.list(key, inner)? };
        Ok((v[..open].trim(), args))
    }

    fn arity(&self, key: &str, name: &str, args: &[f64], n: usize) -> CliResult<()> {
        if args.len() != n {
            return Err(self.err(format!("{key}: preset {name} takes {n} argument(s), got {}", args.len())));
        }
        Ok(())
    }

    fn profile(&self, key: &str, v: &str) -> CliResult<Profile> {
        if let Ok(c) = v.parse::<f64>() {
            return Ok(Profile::Constant(c));
        }
        let (name, a) = self.call(key, v)?;
        let p = match name {
            "zero" => {
                self.arity(key, name, &a, 0)?;
                Profile::Zero
            }
            "constant" => {
                self.arity(key, name, &a, 1)?;
                Profile::Constant(a[0])
            }
            "gaussian" => {
                self.arity(key, name, &a, 3)?;
                if !(a[1] > 0.0) {
                    return Err(self.err(format!("{key}: gaussian width must be positive")));
                }
                Profile::Gaussian { center: a[0], width: a[1], amplitude: a[2] }
            }
            "sine" => {
                self.arity(key, name, &a, 1)?;
                Profile::Sine { k: a[0] }
            }
            "cosine" => {
                self.arity(key, name, &a, 1)?;
                Profile::Cosine { k: a[0] }
            }
            _ => {
                return Err(self.err(format!(
                    "{key}: unknown preset `{name}` (zero, constant, gaussian, sine, cosine)"
                )))
            }
        };
        Ok(p)
    }

    fn history(&self, key: &str, v: &str) -> CliResult<History> {
        if let Ok(c) = v.parse::<f64>() {
            return Ok(History::Constant(c));
        }
        let (name, a) = self.call(key, v)?;
        let h = match name {
            "zero" => {
                self.arity(key, name, &a, 0)?;
                History::Zero
            }
            "constant" => {
                self.arity(key, name, &a, 1)?;
                History::Constant(a[0])
            }
            "ramp" => {
                self.arity(key, name, &a, 1)?;
                History::Ramp { slope: a[0] }
            }
            _ => return Err(self.err(format!("{key}: unknown history preset `{name}` (zero, constant, ramp)"))),
        };
        Ok(h)
    }
}

/// Parses configuration text; `origin` names the source in error messages.
pub fn parse_config(text: &str, origin: &str) -> CliResult<Config> {
    let mut params = (None, None, None, None, None);
    let mut grid = GridBlock::default();
    let mut initial = InitialData::ZERO;
    let mut run = RunBlock::default();
    let mut spectrum = SpectrumBlock::default();
    let mut sweep = SweepBlock::default();

    let mut section: Option<&str> = None;
    let mut seen_sections = HashSet::new();
    let mut seen_keys = HashSet::new();
    let mut ctx = Ctx { origin, line: 0 };

    for (idx, raw) in text.lines().enumerate() {
        ctx.line = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ctx.err("section header must end with `]`"))?
                .trim();
            let known = SECTIONS
                .iter()
                .find(|s| **s == name)
                .ok_or_else(|| ctx.err(format!("unknown section [{name}]")))?;
            if !seen_sections.insert(*known) {
                return Err(ctx.err(format!("section [{name}] appears twice")));
            }
            section = Some(known);
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ctx.err(format!("expected `key = value`, got `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let sec = section.ok_or_else(|| ctx.err(format!("key `{key}` outside of any section")))?;
        if !keys(sec).contains(&key) {
            return Err(ctx.err(format!("unknown key `{key}` in [{sec}]")));
        }
        if !seen_keys.insert((sec, key.to_string())) {
            return Err(ctx.err(format!("duplicate key `{key}` in [{sec}]")));
        }
        if value.is_empty() {
            return Err(ctx.err(format!("{key}: empty value")));
        }
        match (sec, key) {
            ("params", "alpha") => params.0 = Some(ctx.float(key, value)?),
            ("params", "beta") => params.1 = Some(ctx.float(key, value)?),
            ("params", "tau") => params.2 = Some(ctx.float(key, value)?),
            ("params", "xi") => params.3 = Some(ctx.float(key, value)?),
            ("params", "safety") => params.4 = Some(ctx.float(key, value)?),
            ("grid", "L") => grid.length = ctx.float(key, value)?,
            ("grid", "N") => grid.n = ctx.count(key, value)?,
            ("grid", "M_min") => grid.m_min = ctx.count(key, value)?,
            ("grid", "cfl") => grid.cfl = ctx.float(key, value)?,
            ("initial", "y0") => initial.y0 = ctx.profile(key, value)?,
            ("initial", "z0") => initial.z0 = ctx.profile(key, value)?,
            ("initial", "f") => initial.history = ctx.history(key, value)?,
            ("run", "T_final") => run.t_final = ctx.float(key, value)?,
            ("run", "record_every") => run.record_every = ctx.count(key, value)?,
            ("run", "output") => run.output = Some(PathBuf::from(value)),
            ("spectrum", "N") => spectrum.n = ctx.count(key, value)?,
            ("spectrum", "M") => spectrum.m = ctx.count(key, value)?,
            ("spectrum", "gamma_min") => spectrum.gamma_min = ctx.float(key, value)?,
            ("spectrum", "gamma_max") => spectrum.gamma_max = ctx.float(key, value)?,
            ("spectrum", "gamma_count") => spectrum.gamma_count = ctx.count(key, value)?,
            ("sweep", "alpha") => sweep.alpha = ctx.list(key, value)?,
            ("sweep", "beta") => sweep.beta = ctx.list(key, value)?,
            ("sweep", "tau") => sweep.tau = ctx.list(key, value)?,
            ("sweep", "tolerance") => sweep.tolerance = ctx.float(key, value)?,
            ("sweep", "spectral") => sweep.spectral = ctx.flag(key, value)?,
            _ => unreachable!("key table and match arms disagree"),
        }
    }

    ctx.line = text.lines().count();
    let missing = |k: &str| ctx.err(format!("missing required key `{k}` in [params]"));
    let params = ParamsBlock {
        alpha: params.0.ok_or_else(|| missing("alpha"))?,
        beta: params.1.ok_or_else(|| missing("beta"))?,
        tau: params.2.ok_or_else(|| missing("tau"))?,
        xi: params.3,
        safety: params.4,
    };
    if run.t_final < 0.0 {
        return Err(ctx.err("T_final must be >= 0"));
    }
    Ok(Config { params, grid, initial, run, spectrum, sweep })
}

/// Reads and parses `path`, then checks that the parameters are admissible
/// unless `allow_unsafe` is set.
pub fn load_config(path: &Path, allow_unsafe: bool) -> CliResult<Config> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
    let config = parse_config(&text, &path.display().to_string())?;
    config.system_params(allow_unsafe)?;
    if let Some(out) = &config.run.output {
        check_writable(out)?;
    }
    Ok(config)
}

/// Parent directory of `path` must exist.
pub fn check_writable(path: &Path) -> CliResult<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(CliError::Validation(format!(
            "output directory {} does not exist",
            dir.display()
        ))),
        _ => Ok(()),
    }
}

impl Config {
    pub fn system_params(&self, allow_unsafe: bool) -> CliResult<SystemParams> {
        self.params_for(self.params.alpha, self.params.beta, self.params.tau, self.params.xi, allow_unsafe)
    }

    /// Parameters for a sweep point; `xi` falls back to the midpoint.
    pub fn params_for(
        &self,
        alpha: f64,
        beta: f64,
        tau: f64,
        xi: Option<f64>,
        allow_unsafe: bool,
    ) -> CliResult<SystemParams> {
        let p = &self.params;
        let built = if allow_unsafe {
            SystemParams::new_unchecked(alpha, beta, tau, xi, self.grid.length, p.safety)
        } else {
            SystemParams::new(alpha, beta, tau, xi, self.grid.length, p.safety)
        };
        Ok(built?)
    }

    pub fn scenario(&self, params: SystemParams, allow_unsafe: bool) -> CliResult<Scenario> {
        Ok(Scenario {
            params,
            grid: make_grid(self.grid.length, self.grid.n, self.grid.m_min)?,
            initial: self.initial,
            t_final: self.run.t_final,
            record_every: self.run.record_every,
            cfl: self.grid.cfl,
            allow_inadmissible: allow_unsafe,
        })
    }

    pub fn spectral_grid(&self) -> CliResult<Grid1D> {
        Ok(Grid1D::new(self.grid.length, self.spectrum.n, self.spectrum.m)?)
    }

    pub fn gammas(&self) -> Vec<f64> {
        let s = &self.spectrum;
        delaywave_core::spectral::linspace(s.gamma_min, s.gamma_max, s.gamma_count)
    }

    /// Configuration text with every default written out; `resolved`
    /// supplies the completed `xi` and `safety`.
    pub fn to_ini(&self, resolved: Option<&SystemParams>) -> String {
        let mut s = String::new();
        let p = &self.params;
        let _ = writeln!(s, "[params]");
        let _ = writeln!(s, "alpha = {:?}", p.alpha);
        let _ = writeln!(s, "beta = {:?}", p.beta);
        let _ = writeln!(s, "tau = {:?}", p.tau);
        if let Some(xi) = resolved.map(|r| r.xi).or(p.xi) {
            let _ = writeln!(s, "xi = {xi:?}");
        }
        let _ = writeln!(s, "safety = {:?}", p.safety.unwrap_or(DEFAULT_SAFETY));
        let g = &self.grid;
        let _ = writeln!(s, "[grid]");
        let _ = writeln!(s, "L = {:?}", g.length);
        let _ = writeln!(s, "N = {}", g.n);
        let _ = writeln!(s, "M_min = {}", g.m_min);
        let _ = writeln!(s, "cfl = {:?}", g.cfl);
        let _ = writeln!(s, "[initial]");
        let _ = writeln!(s, "y0 = {}", profile_text(&self.initial.y0));
        let _ = writeln!(s, "z0 = {}", profile_text(&self.initial.z0));
        let _ = writeln!(s, "f = {}", history_text(&self.initial.history));
        let r = &self.run;
        let _ = writeln!(s, "[run]");
        let _ = writeln!(s, "T_final = {:?}", r.t_final);
        let _ = writeln!(s, "record_every = {}", r.record_every);
        if let Some(out) = &r.output {
            let _ = writeln!(s, "output = {}", out.display());
        }
        let sp = &self.spectrum;
        let _ = writeln!(s, "[spectrum]");
        let _ = writeln!(s, "N = {}", sp.n);
        let _ = writeln!(s, "M = {}", sp.m);
        let _ = writeln!(s, "gamma_min = {:?}", sp.gamma_min);
        let _ = writeln!(s, "gamma_max = {:?}", sp.gamma_max);
        let _ = writeln!(s, "gamma_count = {}", sp.gamma_count);
        let sw = &self.sweep;
        let _ = writeln!(s, "[sweep]");
        for (k, v) in [("alpha", &sw.alpha), ("beta", &sw.beta), ("tau", &sw.tau)] {
            if !v.is_empty() {
                let items: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
                let _ = writeln!(s, "{k} = {}", items.join(", "));
            }
        }
        let _ = writeln!(s, "tolerance = {:?}", sw.tolerance);
        let _ = writeln!(s, "spectral = {}", sw.spectral);
        s
    }
}

pub fn profile_text(p: &Profile) -> String {
    match *p {
        Profile::Zero => "zero".into(),
        Profile::Constant(c) => format!("constant({c:?})"),
        Profile::Gaussian { center, width, amplitude } => {
            format!("gaussian({center:?}, {width:?}, {amplitude:?})")
        }
        Profile::Sine { k } => format!("sine({k:?})"),
        Profile::Cosine { k } => format!("cosine({k:?})"),
    }
}

pub fn history_text(h: &History) -> String {
    match *h {
        History::Zero => "zero".into(),
        History::Constant(c) => format!("constant({c:?})"),
        History::Ramp { slope } => format!("ramp({slope:?})"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> CliResult<Config> {
        parse_config(text, "test.ini")
    }

    fn line_of(e: CliError) -> usize {
        match e {
            CliError::Config { line, .. } => line,
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn minimal_file_takes_defaults() {
        let c = parse("[params]\nalpha = 1\nbeta = 0.25\ntau = 0.5\n").unwrap();
        assert_eq!(c.grid, GridBlock::default());
        assert_eq!(c.initial, InitialData::ZERO);
        let p = c.system_params(false).unwrap();
        assert_eq!(p.xi, 0.5);
        assert!(p.varpi > 0.0);
    }

    #[test]
    fn presets() {
        let c = parse(
            "[params]\nalpha=1\nbeta=0.25\ntau=0.5\n[initial]\ny0 = gaussian(0.5, 0.1, 2)\nz0 = 1\nf = ramp(-0.5)\n",
        )
        .unwrap();
        assert_eq!(c.initial.y0, Profile::Gaussian { center: 0.5, width: 0.1, amplitude: 2.0 });
        assert_eq!(c.initial.z0, Profile::Constant(1.0));
        assert_eq!(c.initial.history, History::Ramp { slope: -0.5 });
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(line_of(parse("[params]\nalpha = 1\nalpha = 2\n").unwrap_err()), 3);
        assert_eq!(line_of(parse("[params]\n\ngamma = 1\n").unwrap_err()), 3);
        assert_eq!(line_of(parse("alpha = 1\n").unwrap_err()), 1);
        assert_eq!(line_of(parse("[params]\nalpha = x\n").unwrap_err()), 2);
        assert_eq!(line_of(parse("[nope]\n").unwrap_err()), 1);
        assert_eq!(line_of(parse("[params]\n[params]\n").unwrap_err()), 2);
        assert_eq!(line_of(parse("[params]\nalpha = 1\n[initial]\ny0 = wave(1)\n").unwrap_err()), 4);
        assert_eq!(line_of(parse("[params]\nalpha = 1\nbeta\n").unwrap_err()), 3);
    }

    #[test]
    fn missing_required_key() {
        let e = parse("[params]\nalpha = 1\nbeta = 0.2\n").unwrap_err();
        assert!(e.to_string().contains("tau"));
    }

    #[test]
    fn xi_outside_interval_cites_conditions() {
        let c = parse("[params]\nalpha = 1\nbeta = 0.25\ntau = 0.5\nxi = 2\n").unwrap();
        let e = c.system_params(false).unwrap_err();
        assert_eq!(e.exit_code(), 1);
        assert!(e.to_string().contains("xi"), "{e}");
        assert!(c.system_params(true).is_ok());
    }

    #[test]
    fn resolved_text_round_trips() {
        let c = parse(
            "[params]\nalpha=1\nbeta=0.25\ntau=0.5\n[initial]\ny0 = cosine(2)\n[sweep]\nalpha = 0.5, 1\nspectral = true\n",
        )
        .unwrap();
        let p = c.system_params(false).unwrap();
        let again = parse(&c.to_ini(Some(&p))).unwrap();
        assert_eq!(again.system_params(false).unwrap(), p);
        assert_eq!(again.initial, c.initial);
        assert_eq!(again.sweep, c.sweep);
        assert_eq!(again.grid, c.grid);
    }
}
