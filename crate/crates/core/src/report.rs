//! Structured output: report envelopes, bit-stable JSON and CSV.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};

use crate::error::{Error, Result};

pub const TOOL_NAME: &str = "genus2";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Fixed-width scientific notation with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// How a check value is compared with its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `value < tolerance`
    Below,
    /// `value > tolerance`
    Above,
    /// `value == tolerance` (integer counts)
    Equal,
    /// `value >= tolerance`
    AtLeast,
    /// `lower <= value <= tolerance`
    Within { lower: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub comparison: Comparison,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, comparison: Comparison, tolerance: f64) -> Self {
        let passed = match comparison {
            Comparison::Below => value < tolerance,
            Comparison::Above => value > tolerance,
            Comparison::Equal => value == tolerance,
            Comparison::AtLeast => value >= tolerance,
            Comparison::Within { lower } => lower <= value && value <= tolerance,
        };
        Check { name: name.into(), value, comparison, tolerance, passed }
    }

    pub fn below(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Check::new(name, value, Comparison::Below, tol)
    }

    pub fn within(name: impl Into<String>, value: f64, lower: f64, upper: f64) -> Self {
        Check::new(name, value, Comparison::Within { lower }, upper)
    }

    pub fn equal(name: impl Into<String>, value: usize, expected: usize) -> Self {
        Check::new(name, value as f64, Comparison::Equal, expected as f64)
    }

    pub fn at_least(name: impl Into<String>, value: usize, bound: usize) -> Self {
        Check::new(name, value as f64, Comparison::AtLeast, bound as f64)
    }

    /// One line of the form `PASS name: value < tol`.
    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let rel = match self.comparison {
            Comparison::Below => format!("{} < {}", fmt_f64(self.value), fmt_f64(self.tolerance)),
            Comparison::Above => format!("{} > {}", fmt_f64(self.value), fmt_f64(self.tolerance)),
            Comparison::Equal => format!("{} == {}", self.value, self.tolerance),
            Comparison::AtLeast => format!("{} >= {}", self.value, self.tolerance),
            Comparison::Within { lower } => {
                format!("{} in [{}, {}]", fmt_f64(self.value), fmt_f64(lower), fmt_f64(self.tolerance))
            }
        };
        format!("{verdict} {}: {rel}", self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEnvelope<C, T> {
    pub tool: String,
    pub version: String,
    pub config: C,
    pub timestamp: Option<String>,
    pub results: T,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl<C, T> ReportEnvelope<C, T> {
    pub fn new(config: C, results: T, checks: Vec<Check>, timestamp: Option<String>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        ReportEnvelope {
            tool: TOOL_NAME.to_string(),
            version: TOOL_VERSION.to_string(),
            config,
            timestamp,
            results,
            checks,
            passed,
        }
    }
}

/// Pretty JSON whose floats are always written with 17 significant digits.
struct StableFormatter {
    inner: PrettyFormatter<'static>,
}

impl Formatter for StableFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.inner.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.inner.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, StableFormatter { inner: PrettyFormatter::new() });
    value.serialize(&mut ser).map_err(|e| Error::Io(e.to_string()))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(x) => fmt_f64(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => {
                if s.contains([',', '"', '\n']) {
                    format!("\"{}\"", s.replace('"', "\"\""))
                } else {
                    s.clone()
                }
            }
        }
    }
}

/// A CSV document with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new(header: &[&'static str]) -> Self {
        CsvTable { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn header_line(&self) -> String {
        self.header.join(",")
    }

    pub fn render(&self) -> String {
        let mut out = self.header_line();
        out.push('\n');
        for r in &self.rows {
            let line: Vec<String> = r.iter().map(Cell::render).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// Writes to `path`, or to stdout when `path` is `None` or `-`.
pub fn emit(content: &str, path: Option<&std::path::Path>) -> Result<()> {
    match path {
        Some(p) if p.as_os_str() != "-" => std::fs::write(p, content).map_err(Error::from),
        _ => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())?;
            out.flush().map_err(Error::from)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct Payload {
        xs: Vec<f64>,
    }

    #[test]
    fn json_round_trips_floats_exactly() {
        let xs = vec![0.1, 1.0 / 3.0, std::f64::consts::PI, 1e-300, -2.5e17, 0.0];
        let s = to_json(&Payload { xs: xs.clone() }).unwrap();
        let back: Payload = serde_json::from_str(&s).unwrap();
        assert_eq!(back.xs, xs);
        assert!(s.contains("3.3333333333333331e-1"));
    }

    #[test]
    fn empty_envelope_is_valid() {
        let env = ReportEnvelope::new((), Vec::<f64>::new(), vec![], None);
        let s = to_json(&env).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["results"], serde_json::json!([]));
        assert_eq!(v["passed"], serde_json::json!(true));
    }

    #[test]
    fn csv_header_and_lines() {
        let mut t = CsvTable::new(&["theta", "ind", "nul"]);
        t.push(vec![Cell::Float(0.5), Cell::Int(3), Cell::Int(3)]);
        let s = t.render();
        assert_eq!(s, "theta,ind,nul\n5.0000000000000000e-1,3,3\n");
    }

    #[test]
    fn checks_compare_with_tolerance() {
        assert!(Check::below("a", 1e-9, 1e-8).passed);
        assert!(!Check::below("a", 1e-7, 1e-8).passed);
        assert!(Check::within("t", 0.65, 0.64, 0.66).passed);
        assert!(!Check::equal("n", 2, 1).passed);
        assert!(Check::line(&Check::at_least("n", 3, 3)).starts_with("PASS"));
    }
}
