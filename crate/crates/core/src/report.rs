//! Deterministic JSON and CSV report emission.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Envelope shared by every report file. Carries no timestamps or paths, so
/// identical runs give identical bytes.
#[derive(Debug, Serialize)]
pub struct Report<'a, C: Serialize, B: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config: &'a C,
    pub result: B,
}

impl<'a, C: Serialize, B: Serialize> Report<'a, C, B> {
    pub fn new(command: &'a str, config: &'a C, result: B) -> Self {
        Report { tool: TOOL, version: VERSION, command, config, result }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, to_json(value)?)?;
    Ok(path)
}

pub fn write_csv<T: Serialize>(dir: &Path, name: &str, rows: impl IntoIterator<Item = T>) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut w = csv::Writer::from_path(&path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        trial: usize,
        defect: f64,
    }

    #[test]
    fn reports_round_trip_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = serde_json::json!({ "seed": 7 });
        let r = Report::new("norm", &cfg, vec![1.5, 2.0]);
        let p = write_json(dir.path(), "r.json", &r).unwrap();
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap();
        assert_eq!(v["tool"], "orlicz");
        assert_eq!(v["config"]["seed"], 7);
        let p = write_csv(dir.path(), "r.csv", [Row { trial: 0, defect: 0.5 }]).unwrap();
        assert_eq!(fs::read_to_string(p).unwrap(), "trial,defect\n0,0.5\n");
    }
}
