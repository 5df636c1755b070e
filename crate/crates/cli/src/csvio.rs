//! CSV output. Numbers are written as `{:.16e}`, which round-trips every
//! finite `f64` bit-exactly. Metadata precedes the header as `# key = value`
//! lines; `#! ` lines carry the resolved configuration so a run can be
//! repeated from its own output.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use delaywave_core::functionals::FunctionalRecord;

use crate::error::{CliError, CliResult};

pub const TIMESERIES_HEADER: [&str; 6] =
    ["t", "lyap_norm_sq", "basic_energy", "invariant_E", "boundary_velocity", "delayed_velocity"];

const CONFIG_PREFIX: &str = "#! ";

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// `# key = value` lines followed by the embedded configuration.
pub fn write_preamble<W: Write>(mut w: W, meta: &[(String, String)], config: Option<&str>) -> io::Result<()> {
    for (k, v) in meta {
        writeln!(w, "# {k} = {v}")?;
    }
    if let Some(text) = config {
        for line in text.lines() {
            writeln!(w, "{CONFIG_PREFIX}{line}")?;
        }
    }
    Ok(())
}

/// Header row plus numeric rows.
pub fn write_table<W: Write>(w: W, header: &[&str], rows: &[Vec<f64>]) -> io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for row in rows {
        out.write_record(row.iter().map(|v| fmt_f64(*v)))?;
    }
    out.flush()
}

pub fn record_row(r: &FunctionalRecord) -> Vec<f64> {
    vec![r.t, r.lyap_norm_sq, r.basic_energy, r.invariant_e, r.boundary_velocity, r.delayed_velocity]
}

pub fn timeseries_csv(records: &[FunctionalRecord], meta: &[(String, String)], config: Option<&str>) -> String {
    let mut buf = Vec::new();
    write_preamble(&mut buf, meta, config).expect("writing to memory");
    let rows: Vec<Vec<f64>> = records.iter().map(record_row).collect();
    write_table(&mut buf, &TIMESERIES_HEADER, &rows).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// Writes `text` to `path`, or to stdout when `path` is `None`.
pub fn emit(text: &str, path: Option<&Path>) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e)),
    }
}

/// Contents of a CSV file written by this module.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedTable {
    pub meta: Vec<(String, String)>,
    pub config: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ParsedTable {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn records(&self) -> CliResult<Vec<FunctionalRecord>> {
        if self.header != TIMESERIES_HEADER {
            return Err(CliError::Validation(format!("not a time series header: {}", self.header.join(","))));
        }
        Ok(self
            .rows
            .iter()
            .map(|r| FunctionalRecord {
                t: r[0],
                lyap_norm_sq: r[1],
                basic_energy: r[2],
                invariant_e: r[3],
                boundary_velocity: r[4],
                delayed_velocity: r[5],
            })
            .collect())
    }
}

pub fn parse_table(text: &str, origin: &str) -> CliResult<ParsedTable> {
    let mut meta = Vec::new();
    let mut config = String::new();
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        if let Some(c) = line.strip_prefix(CONFIG_PREFIX) {
            config.push_str(c);
            config.push('\n');
        } else if let Some((k, v)) = line[1..].split_once('=') {
            meta.push((k.trim().to_string(), v.trim().to_string()));
        }
    }
    let bad = |line: usize, msg: String| CliError::Config { path: origin.to_string(), line, message: msg };
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| bad(0, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| bad(e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let row = rec
            .iter()
            .map(|f| f.trim().parse::<f64>().map_err(|_| bad(line, format!("not a number: `{f}`"))))
            .collect::<CliResult<Vec<f64>>>()?;
        if row.len() != header.len() {
            return Err(bad(line, format!("expected {} fields, got {}", header.len(), row.len())));
        }
        rows.push(row);
    }
    Ok(ParsedTable { meta, config, header, rows })
}

pub fn read_table(path: &Path) -> CliResult<ParsedTable> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_table(&text, &path.display().to_string())
}
