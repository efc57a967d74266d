//! File formats: edge lists, coordinate matrices, sweep config files, and
//! deterministic CSV/JSON tables.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::{Map, Value};

use crate::embedding::Coordinates;
use crate::error::{Error, Result};
use crate::experiments::{Family, SweepSpec};
use crate::graph::Graph;

/// Significant digits for coordinate values.
pub const COORD_DIGITS: usize = 17;
/// Significant digits for reported metrics.
pub const METRIC_DIGITS: usize = 6;

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Lines that carry content, with 1-based line numbers. `#` starts a comment.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

/// Edge list text: `n <count>` then one `u v` line per edge with `u < v`.
pub fn format_edge_list(g: &Graph) -> String {
    let mut out = format!("n {}\n", g.vertex_count());
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

pub fn parse_edge_list(text: &str, path: &Path) -> Result<Graph> {
    let mut lines = content_lines(text);
    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "missing `n <count>` header"))?;
    let n = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["n", count] => count
            .parse::<usize>()
            .map_err(|e| parse_err(path, hline, format!("bad vertex count: {e}")))?,
        _ => return Err(parse_err(path, hline, "expected header `n <count>`")),
    };
    let mut edges = Vec::new();
    for (ln, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [a, b] = fields.as_slice() else {
            return Err(parse_err(path, ln, "expected `u v`"));
        };
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| parse_err(path, ln, format!("bad vertex id {s:?}: {e}")))
        };
        let (u, v) = (parse(a)?, parse(b)?);
        if u >= v {
            return Err(parse_err(path, ln, format!("edge {u} {v} must satisfy u < v")));
        }
        if v >= n {
            return Err(parse_err(path, ln, format!("vertex {v} out of range for n = {n}")));
        }
        edges.push((u, v));
    }
    Graph::from_edges(n, &edges).map_err(|e| parse_err(path, 0, e.to_string()))
}

pub fn read_edge_list(path: &Path) -> Result<Graph> {
    parse_edge_list(&read(path)?, path)
}

pub fn write_edge_list(path: &Path, g: &Graph) -> Result<()> {
    write_file(path, &format_edge_list(g))
}

/// Coordinates text: `n m` header then one row of `m` values per vertex.
pub fn format_coordinates(c: &Coordinates) -> String {
    let mut out = format!("{} {}\n", c.len(), c.dim());
    for i in 0..c.len() {
        let row: Vec<String> = c.row(i).iter().map(|&x| format_sig(x, COORD_DIGITS)).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_coordinates(text: &str, path: &Path) -> Result<Coordinates> {
    let mut lines = content_lines(text);
    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "missing `n m` header"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|s| s.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| parse_err(path, hline, format!("bad header: {e}")))?;
    let [n, m] = dims.as_slice() else {
        return Err(parse_err(path, hline, "expected header `n m`"));
    };
    let (n, m) = (*n, *m);
    if m == 0 {
        return Err(parse_err(path, hline, "dimension must be >= 1"));
    }
    let mut data = Vec::with_capacity(n * m);
    let mut rows = 0;
    for (ln, line) in lines {
        let before = data.len();
        for tok in line.split_whitespace() {
            data.push(
                tok.parse::<f64>()
                    .map_err(|e| parse_err(path, ln, format!("bad value {tok:?}: {e}")))?,
            );
        }
        if data.len() - before != m {
            return Err(parse_err(path, ln, format!("expected {m} values")));
        }
        rows += 1;
    }
    if rows != n {
        return Err(parse_err(path, 0, format!("expected {n} rows, found {rows}")));
    }
    Coordinates::from_rows(m, data)
}

pub fn read_coordinates(path: &Path) -> Result<Coordinates> {
    parse_coordinates(&read(path)?, path)
}

pub fn write_coordinates(path: &Path, c: &Coordinates) -> Result<()> {
    write_file(path, &format_coordinates(c))
}

/// Formats `x` with `digits` significant digits, `%g` style: plain
/// notation for moderate exponents, scientific otherwise, trailing zeros
/// removed. Coordinates use the full 17 digits so values round-trip.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -5 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        format!("{mantissa}e{exp}")
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

/// One cell of an output table.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
    /// Undefined value; `NA` in CSV, `null` in JSON.
    Missing,
}

impl Field {
    pub fn opt(x: Option<f64>) -> Field {
        x.map_or(Field::Missing, Field::Float)
    }

    fn csv(&self, digits: usize) -> String {
        match self {
            Field::Int(v) => v.to_string(),
            Field::Float(v) => format_sig(*v, digits),
            Field::Text(s) => s.clone(),
            Field::Bool(b) => b.to_string(),
            Field::Missing => "NA".into(),
        }
    }

    fn json(&self, digits: usize) -> Value {
        match self {
            Field::Int(v) => Value::from(*v),
            Field::Float(v) if v.is_finite() => {
                let rounded: f64 = format_sig(*v, digits).parse().expect("formatted float");
                Value::from(rounded)
            }
            Field::Float(_) | Field::Missing => Value::Null,
            Field::Text(s) => Value::from(s.clone()),
            Field::Bool(b) => Value::from(*b),
        }
    }
}

impl From<usize> for Field {
    fn from(v: usize) -> Self {
        Field::Int(v as i64)
    }
}

impl From<u32> for Field {
    fn from(v: u32) -> Self {
        Field::Int(v as i64)
    }
}

impl From<u64> for Field {
    fn from(v: u64) -> Self {
        // seeds use the full 64 bits; keep them exact as text
        if v <= i64::MAX as u64 {
            Field::Int(v as i64)
        } else {
            Field::Text(v.to_string())
        }
    }
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::Float(v)
    }
}

impl From<bool> for Field {
    fn from(v: bool) -> Self {
        Field::Bool(v)
    }
}

impl From<&str> for Field {
    fn from(v: &str) -> Self {
        Field::Text(v.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Fixed-column table with deterministic serialization.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Field>>,
    /// Significant digits for float fields.
    pub digits: usize,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
            digits: METRIC_DIGITS,
        }
    }

    pub fn push(&mut self, row: Vec<Field>) {
        assert_eq!(row.len(), self.columns.len(), "row width matches header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|f| f.csv(self.digits)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (col, f) in self.columns.iter().zip(row) {
                    obj.insert((*col).to_string(), f.json(self.digits));
                }
                Value::Object(obj)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&Value::Array(rows)).expect("json");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

/// Writes `table` to `path` in the given format.
pub fn emit(table: &Table, format: Format, path: &Path) -> Result<()> {
    write_file(path, &table.render(format))
}

fn parse_list<T: std::str::FromStr>(value: &str, key: &str, path: &Path, ln: usize) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|e| parse_err(path, ln, format!("{key}: bad value {s:?}: {e}")))
        })
        .collect()
}

fn parse_one<T: std::str::FromStr>(value: &str, key: &str, path: &Path, ln: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| parse_err(path, ln, format!("{key}: bad value {value:?}: {e}")))
}

/// Parses a flat `key = value` sweep config. Keys: family, n, k, mlinks,
/// p_grid, gamma_grid, dims, realizations, trials, seed, eps, max_iters.
/// Unset keys take the family's defaults.
pub fn parse_sweep_config(text: &str, path: &Path) -> Result<SweepSpec> {
    let mut entries = Vec::new();
    for (ln, line) in content_lines(text) {
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(path, ln, "expected `key = value`"))?;
        entries.push((ln, key.trim().to_string(), value.trim().to_string()));
    }
    let family: Family = match entries.iter().find(|(_, k, _)| k == "family") {
        Some((ln, _, v)) => v.parse().map_err(|e: Error| parse_err(path, *ln, e.to_string()))?,
        None => return Err(parse_err(path, 0, "missing required key `family`")),
    };
    let mut spec = match family {
        Family::Ws => SweepSpec::ws_default(),
        Family::Ba => SweepSpec::ba_default(),
    };
    for (ln, key, value) in &entries {
        let (ln, v) = (*ln, value.as_str());
        match key.as_str() {
            "family" => {}
            "n" => spec.n = parse_one(v, key, path, ln)?,
            "k" => spec.k = parse_one(v, key, path, ln)?,
            "mlinks" => spec.m_links = parse_one(v, key, path, ln)?,
            "p_grid" | "gamma_grid" => {
                let wanted = if family == Family::Ws { "p_grid" } else { "gamma_grid" };
                if key != wanted {
                    return Err(parse_err(
                        path,
                        ln,
                        format!("{key} does not apply to family {}", family.as_str()),
                    ));
                }
                spec.grid = parse_list(v, key, path, ln)?;
            }
            "dims" => spec.dims = parse_list(v, key, path, ln)?,
            "realizations" => spec.realizations = parse_one(v, key, path, ln)?,
            "trials" => spec.trials = parse_one(v, key, path, ln)?,
            "seed" => spec.master_seed = parse_one(v, key, path, ln)?,
            "eps" => spec.sync_tolerance = parse_one(v, key, path, ln)?,
            "max_iters" => spec.max_iters = parse_one(v, key, path, ln)?,
            other => return Err(parse_err(path, ln, format!("unknown key `{other}`"))),
        }
    }
    spec.validate().map_err(|e| parse_err(path, 0, e.to_string()))?;
    Ok(spec)
}

pub fn read_sweep_config(path: &Path) -> Result<SweepSpec> {
    parse_sweep_config(&read(path)?, path)
}
