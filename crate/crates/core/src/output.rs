//! CSV and JSON writers.
//!
//! CSV files open with `#` comment lines carrying the command, the seed and
//! the resolved configuration as one-line JSON, followed by a fixed header.
//! Numbers are printed with six significant digits. JSON output carries the
//! same provenance and prints floats in shortest round-trip form, so it is
//! lossless. Nothing time-dependent is written: identical inputs give
//! byte-identical files.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::drift::WitnessConfig;
use crate::error::{Error, Result};
use crate::estimator::{EstimateRecord, MCConfig};
use crate::scan::ScanRow;

pub const SCAN_COLUMNS: [&str; 13] = [
    "c",
    "N",
    "K",
    "lambda",
    "z1_mean",
    "z1_stderr",
    "z2_mean",
    "z2_stderr",
    "witness_mean",
    "witness_stderr",
    "event_prob",
    "cap_hit_rate",
    "flags",
];

pub const ESTIMATE_COLUMNS: [&str; 16] = [
    "d",
    "N",
    "lambda",
    "K",
    "L",
    "p",
    "nsamples",
    "z1_mean",
    "z1_stderr",
    "zp_mean",
    "zp_stderr",
    "event_prob",
    "cap_hit_rate",
    "min",
    "max",
    "flags",
];

pub const WITNESS_COLUMNS: [&str; 17] = [
    "d",
    "N",
    "M",
    "gamma",
    "lambda",
    "K",
    "K_M",
    "L",
    "nsamples",
    "witness_mean",
    "witness_stderr",
    "theta_cost",
    "event_prob",
    "event_stderr",
    "chebyshev",
    "cap_hit_rate",
    "flags",
];

/// `%g`-style rendering with `digits` significant digits.
pub fn format_g(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn g(x: f64) -> String {
    format_g(x, 6)
}

fn flags_cell(flags: impl IntoIterator<Item = String>) -> String {
    flags.into_iter().collect::<Vec<_>>().join(";")
}

/// A header plus rows of rendered cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

fn mean_and_stderr(r: Option<&EstimateRecord>) -> [String; 2] {
    r.map_or(["nan".into(), "nan".into()], |r| [g(r.mean), g(r.stderr)])
}

pub fn scan_table(rows: &[ScanRow]) -> Table {
    let rows = rows
        .iter()
        .map(|r| {
            let mut cells = vec![g(r.c), r.n.to_string(), g(r.k), g(r.lambda)];
            cells.extend(mean_and_stderr(r.z1.as_ref()));
            cells.extend(mean_and_stderr(r.z2.as_ref()));
            cells.extend(mean_and_stderr(r.witness.as_ref()));
            cells.push(g(r.event_prob));
            cells.push(g(r.cap_hit_rate));
            cells.push(flags_cell(r.flags.iter().cloned()));
            cells
        })
        .collect();
    Table { columns: SCAN_COLUMNS.to_vec(), rows }
}

/// Results of one `estimate` run: `Z_1` and the `p`-th moment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateOutput {
    pub config: MCConfig,
    pub z1: EstimateRecord,
    pub zp: EstimateRecord,
}

pub fn estimate_table(out: &EstimateOutput) -> Table {
    let c = &out.config;
    let mut cells = vec![
        c.d.to_string(),
        c.cutoff.to_string(),
        g(c.lambda),
        g(c.k),
        g(c.cap),
        g(c.p),
        c.nsamples.to_string(),
    ];
    cells.extend(mean_and_stderr(Some(&out.z1)));
    cells.extend(mean_and_stderr(Some(&out.zp)));
    cells.push(g(out.z1.indicator_hit_rate));
    cells.push(g(out.zp.cap_hit_rate));
    cells.push(g(out.zp.min));
    cells.push(g(out.zp.max));
    let mut flags: Vec<String> = out.z1.flags.iter().map(|f| format!("z1:{f}")).collect();
    flags.extend(out.zp.flags.iter().map(|f| format!("zp:{f}")));
    cells.push(flags_cell(flags));
    Table { columns: ESTIMATE_COLUMNS.to_vec(), rows: vec![cells] }
}

/// Results of one `witness` run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessOutput {
    pub config: WitnessConfig,
    pub witness: EstimateRecord,
    pub theta_cost: f64,
    pub event: EstimateRecord,
    pub chebyshev: f64,
}

pub fn witness_table(out: &WitnessOutput) -> Table {
    let c = &out.config;
    let cells = vec![
        c.d.to_string(),
        c.cutoff.to_string(),
        c.scale().to_string(),
        g(c.gamma),
        g(c.lambda),
        g(c.k),
        g(c.drift_cutoff()),
        g(c.cap),
        c.nsamples.to_string(),
        g(out.witness.mean),
        g(out.witness.stderr),
        g(out.theta_cost),
        g(out.event.mean),
        g(out.event.stderr),
        g(out.chebyshev),
        g(out.witness.cap_hit_rate),
        flags_cell(out.witness.flags.iter().map(|f| format!("witness:{f}"))),
    ];
    Table { columns: WITNESS_COLUMNS.to_vec(), rows: vec![cells] }
}

/// Renders a CSV document with provenance comments.
pub fn render_csv(command: &str, config: &RunConfig, table: &Table) -> Result<String> {
    let provenance = serde_json::to_string(config).map_err(|e| Error::Io(e.to_string()))?;
    let mut text = format!("# loglab {command}\n# seed = {}\n# config = {provenance}\n", config.run.seed);
    let mut writer = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    writer.write_record(&table.columns).map_err(io)?;
    for row in &table.rows {
        writer.write_record(row).map_err(io)?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    text.push_str(&String::from_utf8(bytes).expect("csv output is UTF-8"));
    Ok(text)
}

#[derive(Serialize)]
struct JsonDocument<'a, T: Serialize> {
    command: &'a str,
    seed: u64,
    config: &'a RunConfig,
    results: &'a T,
}

pub fn render_json<T: Serialize>(command: &str, config: &RunConfig, results: &T) -> Result<String> {
    let doc = JsonDocument { command, seed: config.run.seed, config, results };
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// Writes `<base>.csv` and/or `<base>.json`; without a base, prints to stdout.
pub fn emit<T: Serialize>(
    command: &str,
    config: &RunConfig,
    table: &Table,
    results: &T,
    base: Option<&Path>,
    format: Format,
) -> Result<Vec<PathBuf>> {
    let mut documents = Vec::new();
    if format.csv() {
        documents.push(("csv", render_csv(command, config, table)?));
    }
    if format.json() {
        documents.push(("json", render_json(command, config, results)?));
    }
    let Some(base) = base else {
        for (_, text) in &documents {
            print!("{text}");
        }
        return Ok(Vec::new());
    };
    documents
        .into_iter()
        .map(|(ext, text)| {
            let path = base.with_extension(ext);
            std::fs::write(&path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            Ok(path)
        })
        .collect()
}
