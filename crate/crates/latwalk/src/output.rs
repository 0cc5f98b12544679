//! Versioned CSV artifacts. Every file starts with one provenance comment
//!
//! ```text
//! # latwalk-csv v1 scenario=<hash> seed=<seed>
//! ```
//!
//! followed by a fixed header row.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const VERSION: &str = "v1";
pub const POSITION_COLUMNS: [&str; 3] = ["node", "count", "theory"];
pub const MOMENTUM_COLUMNS: [&str; 3] = ["bin_center", "count", "theory"];
pub const COINCIDENCE_COLUMNS: [&str; 8] = ["alpha", "beta", "pp", "mm", "pm", "mp", "correlation", "theory"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub scenario: String,
    pub seed: u64,
}

impl Provenance {
    fn line(&self) -> String {
        format!(
            "# latwalk-csv {VERSION} scenario={} seed={}\n",
            self.scenario, self.seed
        )
    }

    fn parse(line: &str) -> Result<Self> {
        let bad = || Error::Io(format!("malformed provenance line {line:?}"));
        let mut it = line.strip_prefix('#').ok_or_else(bad)?.split_whitespace();
        if it.next() != Some("latwalk-csv") {
            return Err(bad());
        }
        let version = it.next().ok_or_else(bad)?;
        if version != VERSION {
            return Err(Error::Io(format!(
                "unsupported CSV version {version}, expected {VERSION}"
            )));
        }
        let mut scenario = None;
        let mut seed = None;
        for kv in it {
            match kv.split_once('=') {
                Some(("scenario", v)) => scenario = Some(v.to_string()),
                Some(("seed", v)) => seed = Some(v.parse().map_err(|_| bad())?),
                _ => return Err(bad()),
            }
        }
        Ok(Provenance {
            scenario: scenario.ok_or_else(bad)?,
            seed: seed.ok_or_else(bad)?,
        })
    }
}

/// Node coordinates joined with `:`.
pub fn format_node(x: &[i64]) -> String {
    x.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(":")
}

pub fn parse_node(s: &str) -> Result<Vec<i64>> {
    let v: Vec<i64> = s
        .split(':')
        .map(|c| c.trim().parse::<i64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Io(format!("bad node {s:?}")))?;
    if v.is_empty() || v.len() > 3 {
        return Err(Error::Io(format!("bad node {s:?}")));
    }
    Ok(v)
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionRow {
    pub node: String,
    pub count: u64,
    pub theory: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumRow {
    pub bin_center: f64,
    pub count: u64,
    pub theory: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceRow {
    pub alpha: f64,
    pub beta: f64,
    pub pp: u64,
    pub mm: u64,
    pub pm: u64,
    pub mp: u64,
    pub correlation: Option<f64>,
    pub theory: f64,
}

/// A parsed artifact.
#[derive(Debug, Clone, PartialEq)]
pub struct Table<R> {
    pub provenance: Provenance,
    pub rows: Vec<R>,
}

fn write_table<R: Serialize>(p: &Provenance, columns: &[&str], rows: &[R]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(columns).map_err(|e| Error::Io(e.to_string()))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?)
        .map_err(|e| Error::Io(e.to_string()))?;
    let mut out = p.line();
    let _ = write!(out, "{body}");
    Ok(out)
}

fn read_table<R: for<'de> Deserialize<'de>>(s: &str, columns: &[&str]) -> Result<Table<R>> {
    let (first, rest) = s.split_once('\n').unwrap_or((s, ""));
    let provenance = Provenance::parse(first.trim_end_matches('\r'))?;
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(rest.as_bytes());
    let found: Vec<String> = r
        .headers()
        .map_err(|e| Error::Io(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if found != columns {
        return Err(Error::Io(format!("expected columns {columns:?}, found {found:?}")));
    }
    let rows = r
        .deserialize()
        .collect::<std::result::Result<Vec<R>, _>>()
        .map_err(|e| Error::Io(e.to_string()))?;
    Ok(Table { provenance, rows })
}

pub fn write_positions(p: &Provenance, rows: &[PositionRow]) -> Result<String> {
    write_table(p, &POSITION_COLUMNS, rows)
}

pub fn write_momentum(p: &Provenance, rows: &[MomentumRow]) -> Result<String> {
    write_table(p, &MOMENTUM_COLUMNS, rows)
}

pub fn write_coincidences(p: &Provenance, rows: &[CoincidenceRow]) -> Result<String> {
    write_table(p, &COINCIDENCE_COLUMNS, rows)
}

pub fn read_positions(s: &str) -> Result<Table<PositionRow>> {
    let t: Table<PositionRow> = read_table(s, &POSITION_COLUMNS)?;
    for row in &t.rows {
        parse_node(&row.node)?;
    }
    Ok(t)
}

pub fn read_momentum(s: &str) -> Result<Table<MomentumRow>> {
    read_table(s, &MOMENTUM_COLUMNS)
}

pub fn read_coincidences(s: &str) -> Result<Table<CoincidenceRow>> {
    read_table(s, &COINCIDENCE_COLUMNS)
}

/// `key = value` report, one entry per line, in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    pub entries: Vec<(String, String)>,
}

impl Summary {
    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn push_opt<T: ToString>(&mut self, key: &str, value: &Option<T>) {
        if value.is_some() {
            self.push(key, opt(value));
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn parse(s: &str) -> Result<Self> {
        let mut out = Summary::default();
        for (n, line) in s.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once(" = ")
                .ok_or_else(|| Error::Io(format!("summary line {} has no ` = `", n + 1)))?;
            out.push(k.trim(), v.trim());
        }
        Ok(out)
    }
}
