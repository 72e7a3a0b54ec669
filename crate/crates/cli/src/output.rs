use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::Failure;

/// A CSV table plus the summary recorded in its sidecar.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub summary: Value,
    pub tolerances: Value,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self { header, rows: Vec::new(), summary: json!({}), tolerances: json!({}) }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Locale-independent shortest round-trip formatting.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn csv_bytes(t: &Table) -> Result<Vec<u8>, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&t.header).map_err(|e| Failure::io(e.to_string()))?;
    for r in &t.rows {
        w.write_record(r).map_err(|e| Failure::io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Failure::io(e.to_string()))
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes the CSV to `out` (stdout when `None`) and its JSON sidecar.
pub fn emit(t: &Table, out: Option<&Path>, command: &str, config: &Value) -> Result<(), Failure> {
    let bytes = csv_bytes(t)?;
    let Some(out) = out else {
        std::io::stdout().write_all(&bytes).map_err(|e| Failure::io(e.to_string()))?;
        return Ok(());
    };
    fs::write(out, &bytes).map_err(|e| Failure::io(format!("{}: {e}", out.display())))?;
    let side = json!({
        "command": command,
        "config": config,
        "tolerances": t.tolerances,
        "versions": {"isodense": env!("CARGO_PKG_VERSION"), "csv_format": 1},
        "columns": t.header,
        "summary": t.summary,
    });
    let mut text = serde_json::to_string_pretty(&side).expect("sidecar serializes");
    text.push('\n');
    let p = sidecar_path(out);
    fs::write(&p, text).map_err(|e| Failure::io(format!("{}: {e}", p.display())))
}
