//! Reading observations from CSV or JSONL.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum InputFormat {
    Csv,
    Jsonl,
}

impl InputFormat {
    /// `.jsonl` and `.ndjson` are JSONL, everything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl" | "ndjson") => Self::Jsonl,
            _ => Self::Csv,
        }
    }
}

/// Raw observations of `Y` with the line each came from.
#[derive(Debug, Clone)]
pub struct TailSample {
    pub values: Vec<f64>,
    /// 1-based line numbers, parallel to `values`.
    pub lines: Vec<usize>,
    pub source: String,
    /// Hex SHA-256 of the input bytes.
    pub digest: String,
}

impl TailSample {
    pub fn from_values(values: Vec<f64>, source: &str) -> Self {
        let lines = (1..=values.len()).collect();
        let mut hasher = Sha256::new();
        for v in &values {
            hasher.update(v.to_le_bytes());
        }
        Self {
            values,
            lines,
            source: source.to_string(),
            digest: format!("{:x}", hasher.finalize()),
        }
    }

    pub fn n_total(&self) -> usize {
        self.values.len()
    }
}

const MAX_REPORTED_LINES: usize = 10;

fn bad_lines_message(what: &str, lines: &[usize]) -> String {
    let shown: Vec<String> = lines.iter().take(MAX_REPORTED_LINES).map(|l| l.to_string()).collect();
    let more = if lines.len() > MAX_REPORTED_LINES {
        format!(" and {} more", lines.len() - MAX_REPORTED_LINES)
    } else {
        String::new()
    };
    format!("{what} on line(s) {}{more}", shown.join(", "))
}

fn parse_csv(bytes: &[u8], column: usize) -> Result<(Vec<f64>, Vec<usize>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut values = Vec::new();
    let mut lines = Vec::new();
    let mut unparsable = Vec::new();
    let mut non_finite = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.context("malformed CSV")?;
        let line = record.position().map_or(i + 1, |p| p.line() as usize);
        let Some(field) = record.get(column) else {
            bail!("line {line}: no column {column} (record has {} field(s))", record.len());
        };
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => {
                values.push(v);
                lines.push(line);
            }
            Ok(_) => non_finite.push(line),
            // A non-numeric first record is a header.
            Err(_) if i == 0 => {}
            Err(_) => unparsable.push(line),
        }
    }
    if !unparsable.is_empty() {
        bail!(bad_lines_message("non-numeric value", &unparsable));
    }
    if !non_finite.is_empty() {
        bail!(bad_lines_message("non-finite value", &non_finite));
    }
    Ok((values, lines))
}

/// Each record is a bare number, or an object holding the number under `field`.
fn parse_jsonl(text: &str, field: Option<&str>) -> Result<(Vec<f64>, Vec<usize>)> {
    let mut values = Vec::new();
    let mut lines = Vec::new();
    let mut bad = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        let record = serde_json::from_str::<serde_json::Value>(raw).ok();
        let number = match (record, field) {
            (Some(serde_json::Value::Object(map)), Some(key)) => map.get(key).and_then(|v| v.as_f64()),
            (Some(v), _) => v.as_f64(),
            (None, _) => None,
        };
        match number {
            Some(v) => {
                values.push(v);
                lines.push(i + 1);
            }
            None => bad.push(i + 1),
        }
    }
    if !bad.is_empty() {
        let what = match field {
            Some(key) => format!("record is not a JSON number or an object with numeric \"{key}\""),
            None => "record is not a JSON number".to_string(),
        };
        bail!(bad_lines_message(&what, &bad));
    }
    Ok((values, lines))
}

/// Reads one numeric column (CSV) or one number per record (JSONL).
pub fn read_sample(path: &Path, format: Option<InputFormat>, column: usize, field: Option<&str>) -> Result<TailSample> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let format = format.unwrap_or_else(|| InputFormat::from_path(path));
    let (values, lines) = match format {
        InputFormat::Csv => parse_csv(&bytes, column),
        InputFormat::Jsonl => {
            let text = std::str::from_utf8(&bytes).context("input is not UTF-8")?;
            parse_jsonl(text, field)
        }
    }
    .with_context(|| format!("cannot parse {}", path.display()))?;
    if values.is_empty() {
        bail!("{} contains no observations", path.display());
    }
    Ok(TailSample {
        values,
        lines,
        source: path.display().to_string(),
        digest: format!("{:x}", Sha256::digest(&bytes)),
    })
}
