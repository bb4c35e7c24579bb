//! Bit-exact CSV and JSON-lines export. Every number is written with 17
//! significant digits (`{:.16e}`), which round-trips any `f64`; lines end in LF.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::diagnostics::LedgerRecord;
use crate::solver::LagrangianState;
use crate::stationary::StationaryProfile;
use crate::{Error, Result};

/// A flat record of named numbers.
pub trait SeriesRecord {
    fn fields() -> &'static [&'static str];
    fn values(&self) -> Vec<f64>;
}

/// One node of one snapshot: `t,x,s,r,v,u,phi,psi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotRow(pub [f64; 8]);

/// One node of a stationary profile: `r,rho_t,u_t,drho,du,ddrho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileRow(pub [f64; 6]);

impl SeriesRecord for SnapshotRow {
    fn fields() -> &'static [&'static str] {
        &["t", "x", "s", "r", "v", "u", "phi", "psi"]
    }

    fn values(&self) -> Vec<f64> {
        self.0.to_vec()
    }
}

impl SeriesRecord for ProfileRow {
    fn fields() -> &'static [&'static str] {
        &["r", "rho_t", "u_t", "drho", "du", "ddrho"]
    }

    fn values(&self) -> Vec<f64> {
        self.0.to_vec()
    }
}

impl SeriesRecord for LedgerRecord {
    fn fields() -> &'static [&'static str] {
        &LedgerRecord::FIELDS
    }

    fn values(&self) -> Vec<f64> {
        LedgerRecord::values(self).to_vec()
    }
}

/// Rows of every node of every snapshot, in order.
pub fn snapshot_rows<'a>(snaps: impl IntoIterator<Item = &'a LagrangianState>) -> Vec<SnapshotRow> {
    snaps
        .into_iter()
        .flat_map(|s| s.rows().into_iter().map(SnapshotRow))
        .collect()
}

pub fn profile_rows(profile: &StationaryProfile) -> Vec<ProfileRow> {
    profile.rows().into_iter().map(ProfileRow).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesFormat {
    Csv,
    JsonLines,
}

impl SeriesFormat {
    /// JSON-lines for `.jsonl`, CSV otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") => Self::JsonLines,
            _ => Self::Csv,
        }
    }
}

/// `{:.16e}`, the shortest fixed-width form that round-trips.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

/// JSON has no NaN or infinity; those become `null`.
fn json_number(x: f64) -> String {
    if x.is_finite() {
        format_number(x)
    } else {
        "null".to_string()
    }
}

/// Renders the records in memory.
pub fn render_series<R: SeriesRecord>(records: &[R], format: SeriesFormat) -> String {
    let fields = R::fields();
    let mut out = String::new();
    match format {
        SeriesFormat::Csv => {
            out.push_str(&fields.join(","));
            out.push('\n');
            for rec in records {
                let row: Vec<String> = rec.values().into_iter().map(format_number).collect();
                out.push_str(&row.join(","));
                out.push('\n');
            }
        }
        SeriesFormat::JsonLines => {
            for rec in records {
                let parts: Vec<String> = fields
                    .iter()
                    .zip(rec.values())
                    .map(|(k, v)| format!("\"{k}\":{}", json_number(v)))
                    .collect();
                out.push('{');
                out.push_str(&parts.join(","));
                out.push_str("}\n");
            }
        }
    }
    out
}

/// Writes the records to `path` (format chosen by extension) and returns the byte count.
pub fn write_series<R: SeriesRecord>(path: &Path, records: &[R]) -> Result<usize> {
    let text = render_series(records, SeriesFormat::from_path(path));
    write_text(path, &text)?;
    Ok(text.len())
}

/// Writes `text` to `path`, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Header and numeric rows of a CSV file written by [`write_series`].
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header = match lines.next() {
        Some(l) => l.map_err(|e| Error::io(path, e))?,
        None => return Err(Error::Input(format!("{} is empty", path.display()))),
    };
    let header: Vec<String> = header.split(',').map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let row = line
            .split(',')
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::Input(format!("{} line {}: {e}", path.display(), i + 2)))?;
        if row.len() != header.len() {
            return Err(Error::Input(format!(
                "{} line {}: {} fields, header has {}",
                path.display(),
                i + 2,
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

/// Ledger records from a JSON-lines file; `null` reads back as NaN.
pub fn read_ledger(path: &Path) -> Result<Vec<LedgerRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let bad = |msg: String| Error::Input(format!("{} line {}: {msg}", path.display(), i + 1));
        let obj: serde_json::Map<String, serde_json::Value> =
            serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
        let mut vals = [0.0; 15];
        for (slot, name) in vals.iter_mut().zip(LedgerRecord::FIELDS) {
            *slot = match obj.get(name) {
                Some(serde_json::Value::Null) => f64::NAN,
                Some(v) => v.as_f64().ok_or_else(|| bad(format!("`{name}` is not a number")))?,
                None => return Err(bad(format!("missing field `{name}`"))),
            };
        }
        out.push(LedgerRecord::from_values(vals));
    }
    Ok(out)
}
