//! Result tables and their CSV / JSON encodings.
//!
//! Floats are written as `%.12e` and stored in memory already rounded
//! through that format, so decoding a file gives back the exact values.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::Value;

use super::CliError;

#[derive(Clone, Debug)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Cell::Float(a), Cell::Float(b)) => a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()),
            (Cell::Int(a), Cell::Int(b)) => a == b,
            (Cell::Bool(a), Cell::Bool(b)) => a == b,
            (Cell::Text(a), Cell::Text(b)) => a == b,
            _ => false,
        }
    }
}

/// C-style `%.12e`: `1.234567890123e+01`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
}

impl Cell {
    pub fn float(x: f64) -> Self {
        Cell::Float(format_float(x).parse().unwrap_or(f64::NAN))
    }

    pub fn int(x: impl TryInto<i64>) -> Self {
        Cell::Int(x.try_into().unwrap_or(i64::MAX))
    }

    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    fn encode(&self) -> String {
        match self {
            Cell::Float(x) => format_float(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn encode_json(&self) -> String {
        match self {
            Cell::Float(x) if x.is_finite() => format_float(*x),
            Cell::Float(_) => "null".into(),
            Cell::Text(s) => serde_json::to_string(s).expect("string"),
            other => other.encode(),
        }
    }

    fn decode(s: &str) -> Self {
        match s {
            "true" => return Cell::Bool(true),
            "false" => return Cell::Bool(false),
            "nan" => return Cell::Float(f64::NAN),
            "inf" => return Cell::Float(f64::INFINITY),
            "-inf" => return Cell::Float(f64::NEG_INFINITY),
            _ => {}
        }
        if s.contains('e') {
            if let Ok(x) = s.parse::<f64>() {
                return Cell::Float(x);
            }
        }
        if let Ok(i) = s.parse::<i64>() {
            return Cell::Int(i);
        }
        Cell::Text(s.to_string())
    }

    fn from_json(v: &Value) -> Option<Self> {
        Some(match v {
            Value::Null => Cell::Float(f64::NAN),
            Value::Bool(b) => Cell::Bool(*b),
            Value::Number(n) if n.is_i64() => Cell::Int(n.as_i64()?),
            Value::Number(n) => Cell::Float(n.as_f64()?),
            Value::String(s) => Cell::Text(s.clone()),
            _ => return None,
        })
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Float(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Cell::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[j]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::encode).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(name: &str, text: &str) -> Result<Self, CliError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| CliError::numeric(format!("{name}: empty csv")))?;
        let columns: Vec<String> = header.split(',').map(str::to_string).collect();
        let mut rows = Vec::new();
        for line in lines.filter(|l| !l.is_empty()) {
            let row: Vec<Cell> = line.split(',').map(Cell::decode).collect();
            if row.len() != columns.len() {
                return Err(CliError::numeric(format!("{name}: ragged row {line:?}")));
            }
            rows.push(row);
        }
        Ok(Self {
            name: name.to_string(),
            columns,
            rows,
        })
    }
}

/// Everything one command writes.
#[derive(Clone, Debug, PartialEq)]
pub struct Bundle {
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub tables: Vec<Table>,
}

impl Bundle {
    pub fn new(command: &str, config: &BTreeMap<String, String>) -> Self {
        Self {
            command: command.to_string(),
            config: config.clone(),
            tables: Vec::new(),
        }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    fn stem(&self) -> String {
        self.command.replace('-', "_")
    }

    /// File name of a table: the first table is `<command>.csv`, the others
    /// `<command>_<table>.csv`.
    pub fn csv_name(&self, index: usize) -> String {
        if index == 0 {
            format!("{}.csv", self.stem())
        } else {
            format!("{}_{}.csv", self.stem(), self.tables[index].name)
        }
    }

    pub fn json_name(&self) -> String {
        format!("{}.json", self.stem())
    }

    pub fn to_json(&self) -> String {
        let mut out = String::new();
        out.push_str("{\n");
        let _ = writeln!(out, "  \"command\": {},", serde_json::to_string(&self.command).expect("string"));
        let _ = writeln!(out, "  \"version\": {},", serde_json::to_string(env!("CARGO_PKG_VERSION")).expect("string"));
        out.push_str("  \"config\": {");
        let entries: Vec<String> = self
            .config
            .iter()
            .map(|(k, v)| format!("\n    {}: {}", serde_json::to_string(k).expect("key"), serde_json::to_string(v).expect("value")))
            .collect();
        out.push_str(&entries.join(","));
        out.push_str(if entries.is_empty() { "},\n" } else { "\n  },\n" });
        out.push_str("  \"tables\": [");
        let tables: Vec<String> = self
            .tables
            .iter()
            .map(|t| {
                let cols: Vec<String> = t.columns.iter().map(|c| serde_json::to_string(c).expect("column")).collect();
                let rows: Vec<String> = t
                    .rows
                    .iter()
                    .map(|r| format!("\n        [{}]", r.iter().map(Cell::encode_json).collect::<Vec<_>>().join(", ")))
                    .collect();
                format!(
                    "\n    {{\n      \"name\": {},\n      \"columns\": [{}],\n      \"rows\": [{}{}]\n    }}",
                    serde_json::to_string(&t.name).expect("name"),
                    cols.join(", "),
                    rows.join(","),
                    if rows.is_empty() { "" } else { "\n      " }
                )
            })
            .collect();
        out.push_str(&tables.join(","));
        out.push_str(if tables.is_empty() { "]\n}\n" } else { "\n  ]\n}\n" });
        out
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let err = |m: &str| CliError::numeric(format!("malformed result json: {m}"));
        let v: Value = serde_json::from_str(text).map_err(|e| err(&e.to_string()))?;
        let command = v["command"].as_str().ok_or_else(|| err("command"))?.to_string();
        let config = v["config"]
            .as_object()
            .ok_or_else(|| err("config"))?
            .iter()
            .map(|(k, v)| Some((k.clone(), v.as_str()?.to_string())))
            .collect::<Option<BTreeMap<_, _>>>()
            .ok_or_else(|| err("config values"))?;
        let mut tables = Vec::new();
        for t in v["tables"].as_array().ok_or_else(|| err("tables"))? {
            let name = t["name"].as_str().ok_or_else(|| err("table name"))?;
            let columns: Vec<String> = t["columns"]
                .as_array()
                .ok_or_else(|| err("columns"))?
                .iter()
                .map(|c| c.as_str().map(str::to_string))
                .collect::<Option<_>>()
                .ok_or_else(|| err("column names"))?;
            let mut rows = Vec::new();
            for r in t["rows"].as_array().ok_or_else(|| err("rows"))? {
                let row: Vec<Cell> = r
                    .as_array()
                    .ok_or_else(|| err("row"))?
                    .iter()
                    .map(Cell::from_json)
                    .collect::<Option<_>>()
                    .ok_or_else(|| err("cell"))?;
                rows.push(row);
            }
            tables.push(Table {
                name: name.to_string(),
                columns,
                rows,
            });
        }
        Ok(Self { command, config, tables })
    }

    /// Writes the bundle; returns the paths written.
    pub fn write(&self, dir: &Path, csv: bool, json: bool) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let mut written = Vec::new();
        if csv {
            for (i, t) in self.tables.iter().enumerate() {
                let path = dir.join(self.csv_name(i));
                std::fs::write(&path, t.to_csv()).map_err(|e| CliError::io(&path, e))?;
                written.push(path);
            }
        }
        if json {
            let path = dir.join(self.json_name());
            std::fs::write(&path, self.to_json()).map_err(|e| CliError::io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }

    /// Reads the CSV files of a bundle written by [`Bundle::write`]; `names`
    /// lists the tables in order.
    pub fn read_csv(dir: &Path, command: &str, names: &[&str]) -> Result<Vec<Table>, CliError> {
        let probe = Bundle {
            command: command.to_string(),
            config: BTreeMap::new(),
            tables: names.iter().map(|n| Table::new(n, &[])).collect(),
        };
        (0..names.len())
            .map(|i| {
                let path = dir.join(probe.csv_name(i));
                let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
                Table::from_csv(names[i], &text)
            })
            .collect()
    }
}
