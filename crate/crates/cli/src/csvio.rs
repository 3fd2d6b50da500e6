//! CSV tables written by the commands, and readers for them.
//!
//! Every file may start with `#` comment lines (scenario id, seed, creation
//! time); readers skip them.

use std::io::Read;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("csv: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub scenario_id: String,
    pub w_ms: f64,
    pub epsilon: f64,
    pub m: u32,
    pub delta_eps_ms: f64,
    pub v_eps_ms: f64,
    pub theta: Option<f64>,
    pub r: Option<f64>,
    pub tau0: Option<f64>,
    pub b: Option<f64>,
    pub feasible: bool,
    pub congestion_ms: f64,
    pub idle_ms: f64,
    pub latency_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub t_ms: f64,
    pub aoi_ms: f64,
    pub delay_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub n: u64,
    pub flow: usize,
    pub t_arrival_ms: f64,
    pub size_kb: f64,
    pub t_departure_ms: Option<f64>,
    pub error: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimSummaryRow {
    pub scenario_id: String,
    pub w_ms: f64,
    pub m: u32,
    pub epsilon: f64,
    pub samples: u64,
    pub aoi_quantile_ms: f64,
    pub delay_quantile_ms: f64,
    pub reliable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub scenario_id: String,
    pub w_ms: f64,
    pub epsilon: f64,
    pub m: u32,
    pub delta_eps_ms: f64,
    pub v_eps_ms: f64,
    pub sim_aoi_quantile_ms: f64,
    pub sim_delay_quantile_ms: f64,
    pub samples: u64,
    pub dominates: bool,
    pub runtime_ms: u64,
}

/// Two-column plot data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XyRow {
    pub x: f64,
    pub y: f64,
}

/// Header comment lines for an output file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Header {
    pub scenario: Option<String>,
    pub seed: Option<u64>,
    /// Omit the creation timestamp so reruns are byte-identical.
    pub deterministic: bool,
}

impl Header {
    pub fn render(&self) -> String {
        let mut out = String::new();
        if let Some(id) = &self.scenario {
            out.push_str(&format!("# scenario: {id}\n"));
        }
        if let Some(seed) = self.seed {
            out.push_str(&format!("# seed: {seed}\n"));
        }
        if !self.deterministic {
            let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
            out.push_str(&format!("# generated: {secs}\n"));
        }
        out
    }
}

/// Rows as CSV text, header row included, no comments.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, CsvError> {
    let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Rows preceded by header comments.
pub fn render<T: Serialize>(header: &Header, rows: &[T]) -> Result<String, CsvError> {
    Ok(header.render() + &to_csv(rows)?)
}

/// Parses rows, skipping `#` comment lines.
pub fn from_reader<T: DeserializeOwned, R: Read>(reader: R) -> Result<Vec<T>, CsvError> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).has_headers(true).from_reader(reader);
    r.deserialize().map(|row| row.map_err(CsvError::from)).collect()
}

pub fn from_str<T: DeserializeOwned>(text: &str) -> Result<Vec<T>, CsvError> {
    from_reader(text.as_bytes())
}

/// Drops leading comment lines.
pub fn body(text: &str) -> &str {
    let mut rest = text;
    while rest.starts_with('#') {
        rest = rest.find('\n').map_or("", |i| &rest[i + 1..]);
    }
    rest
}
