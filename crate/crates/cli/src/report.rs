use std::io::{self, Write};

use serde::Serialize;
use serde_json::{Map, Value};

/// One cell of a report table.
#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
}

impl Cell {
    /// Locale-independent text: scientific notation with 15 significant digits.
    fn csv_text(&self) -> String {
        match self {
            Cell::Num(v) if v.is_nan() => "nan".to_string(),
            Cell::Num(v) => format!("{v:.14e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Bool(b) => Value::from(*b),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

#[derive(Debug, Clone)]
pub struct Row {
    pub cells: Vec<Cell>,
    pub error_estimate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub passed: bool,
    /// Smallest margin by which the command's inequality holds; negative
    /// values mean a violation. `null` when the command checks no inequality.
    pub worst_margin: Option<f64>,
    pub numerical_failures: usize,
}

/// A flat result table plus its pass/fail summary.
#[derive(Debug, Clone)]
pub struct Report {
    pub columns: &'static [&'static str],
    pub rows: Vec<Row>,
    pub summary: Summary,
}

impl Report {
    pub fn new(columns: &'static [&'static str]) -> Self {
        Report {
            columns,
            rows: Vec::new(),
            summary: Summary {
                passed: true,
                worst_margin: None,
                numerical_failures: 0,
            },
        }
    }

    pub fn push(&mut self, cells: Vec<Cell>, error_estimate: f64) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(Row {
            cells,
            error_estimate,
        });
    }

    pub fn fail(&mut self) {
        self.summary.passed = false;
    }

    pub fn numerical_failure(&mut self) {
        self.summary.passed = false;
        self.summary.numerical_failures += 1;
    }

    pub fn margin(&mut self, m: f64) {
        let w = self.summary.worst_margin.get_or_insert(f64::INFINITY);
        if m.is_nan() || w.is_nan() {
            *w = f64::NAN;
        } else {
            *w = w.min(m);
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.columns)?;
        for row in &self.rows {
            w.write_record(row.cells.iter().map(Cell::csv_text))?;
        }
        w.flush()
    }

    pub fn write_json<W: Write, C: Serialize>(&self, config: &C, out: W) -> io::Result<()> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(&row.cells)
                    .map(|(k, v)| (k.to_string(), v.json()))
                    .collect();
                obj.insert(
                    "error_estimate".into(),
                    Cell::Num(row.error_estimate).json(),
                );
                Value::Object(obj)
            })
            .collect();
        let doc = serde_json::json!({
            "config": config,
            "rows": rows,
            "summary": self.summary,
        });
        let mut out = out;
        serde_json::to_writer_pretty(&mut out, &doc)?;
        writeln!(out)
    }
}
