//! Tables written as CSV or JSON, each with a metadata block, plus a
//! `.meta.json` sidecar carrying the wall time.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};
use crate::CliError;

pub const GIT_DESCRIBE: &str = env!("BIRKHOFF_GIT_DESCRIBE");

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    U(u64),
    B(bool),
    S(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::F(v) => format!("{v:.16e}"),
            Cell::U(v) => v.to_string(),
            Cell::B(v) => v.to_string(),
            Cell::S(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::F(v) => json!(v),
            Cell::U(v) => json!(v),
            Cell::B(v) => json!(v),
            Cell::S(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::U(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::B(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::F)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Meta<'a> {
    pub experiment: &'static str,
    pub config: &'a RunConfig,
    pub seed: u64,
    pub git_describe: &'static str,
    /// Which `N` or `eps` the file is about.
    pub key: String,
}

/// `<experiment>_<a>_<key>_<seed>.<ext>` inside `out`.
pub fn file_name(out: &Path, experiment: &str, a: f64, key: &str, seed: u64, format: Format) -> PathBuf {
    out.join(format!("{experiment}_{a}_{key}_{seed}.{}", format.ext()))
}

fn render(meta: &Meta, table: &Table, format: Format) -> Result<String, CliError> {
    let meta_json = serde_json::to_value(meta)?;
    Ok(match format {
        Format::Csv => {
            let mut s = format!("# {}\n", serde_json::to_string(&meta_json)?);
            s.push_str(&table.columns.join(","));
            s.push('\n');
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                writeln!(s, "{}", cells.join(",")).expect("writing to a string");
            }
            s
        }
        Format::Json => {
            let rows: Vec<Value> = table.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
            let doc = json!({ "meta": meta_json, "columns": table.columns, "rows": rows });
            let mut s = serde_json::to_string_pretty(&doc)?;
            s.push('\n');
            s
        }
    })
}

/// Writes the table and its sidecar; returns the table's path.
pub fn write(path: &Path, meta: &Meta, table: &Table, format: Format, wall_time_s: f64) -> Result<PathBuf, CliError> {
    std::fs::write(path, render(meta, table, format)?)?;
    let mut side = serde_json::to_value(meta)?;
    side["wall_time_s"] = json!(wall_time_s);
    let mut side_path = path.as_os_str().to_owned();
    side_path.push(".meta.json");
    std::fs::write(PathBuf::from(side_path), serde_json::to_string_pretty(&side)? + "\n")?;
    Ok(path.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Experiment;

    #[test]
    fn csv_layout() {
        let cfg = RunConfig::new(Experiment::FiniteLaw);
        let meta = Meta { experiment: "finite-law", config: &cfg, seed: 42, git_describe: "x", key: "1000".into() };
        let mut t = Table::new(vec!["value", "flag"]);
        t.push(vec![0.1.into(), true.into()]);
        t.push(vec![Cell::Empty, false.into()]);
        let s = render(&meta, &t, Format::Csv).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert!(lines[0].starts_with("# {"));
        assert_eq!(&lines[1..], ["value,flag", "1.0000000000000001e-1,true", ",false"]);
        assert!(!s.contains('\r'));
        let j: Value = serde_json::from_str(&render(&meta, &t, Format::Json).unwrap()).unwrap();
        assert_eq!(j["meta"]["config"]["N"], json!([1000, 10000, 100000]));
        assert_eq!(j["rows"][1], json!([null, false]));
    }

    #[test]
    fn naming() {
        let p = file_name(Path::new("out"), "limit-law", 0.5, "0.02", 42, Format::Json);
        assert_eq!(p, Path::new("out/limit-law_0.5_0.02_42.json"));
    }
}
