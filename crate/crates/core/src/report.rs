//! JSON and CSV emitters shared by every report.
//!
//! Report bodies are deterministic. Wall-clock data goes to a separate
//! `<stem>.meta.json` sidecar so repeated runs can be compared byte for byte.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct Versioned<'a, T: Serialize> {
    schema_version: u32,
    #[serde(flatten)]
    body: &'a T,
}

/// Serialize `body` with a leading `schema_version` field.
pub fn to_json<T: Serialize>(body: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Versioned { schema_version: SCHEMA_VERSION, body })?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, body: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(to_json(body)?.as_bytes())?;
    w.flush()?;
    Ok(())
}

/// Writes a header row followed by one row per entry of `columns[0]`.
pub fn write_csv(path: &Path, header: &[&str], columns: &[&[f64]]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    let rows = columns.first().map_or(0, |c| c.len());
    for i in 0..rows {
        w.write_record(columns.iter().map(|c| c[i].to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn meta_path(report: &Path) -> PathBuf {
    let stem = report.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    report.with_file_name(format!("{stem}.meta.json"))
}

#[derive(Serialize)]
struct Meta<'a> {
    report: &'a str,
    generated_unix_seconds: u64,
    tool_version: &'a str,
}

/// Timestamp sidecar for `report`.
pub fn write_meta(report: &Path) -> Result<()> {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let name = report.file_name().and_then(|s| s.to_str()).unwrap_or("");
    let meta = Meta { report: name, generated_unix_seconds: secs, tool_version: env!("CARGO_PKG_VERSION") };
    let mut s = serde_json::to_string_pretty(&meta)?;
    s.push('\n');
    std::fs::write(meta_path(report), s)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Body {
        b: f64,
        a: Vec<u32>,
    }

    #[test]
    fn schema_version_leads_and_order_is_stable() {
        let s = to_json(&Body { b: 0.5, a: vec![1, 2] }).unwrap();
        let first = s.find("schema_version").unwrap();
        assert!(first < s.find("\"b\"").unwrap());
        assert!(s.find("\"b\"").unwrap() < s.find("\"a\"").unwrap());
        assert_eq!(s, to_json(&Body { b: 0.5, a: vec![1, 2] }).unwrap());
    }

    #[test]
    fn meta_sits_next_to_report() {
        assert_eq!(meta_path(Path::new("/tmp/out/profile.json")), PathBuf::from("/tmp/out/profile.meta.json"));
    }
}
