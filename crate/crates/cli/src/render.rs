//! Text, CSV and JSON rendering of command results.

use std::collections::BTreeMap;
use std::fmt::Write;

use clap::ValueEnum;
use erasetest_core::{Label, OutcomeDistribution, OutcomeSequence};
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

/// `x` with 12 significant digits.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.11e}")
    }
}

/// JSON number holding the 12-significant-digit rendering of `x`; non-finite
/// values become strings.
pub fn sig12_json(x: f64) -> Value {
    if x.is_finite() {
        json!(sig12(x).parse::<f64>().expect("rendered float parses"))
    } else {
        json!(sig12(x))
    }
}

pub fn label_json(label: &Label) -> Value {
    match *label {
        Label::Pair { a, b } => json!({ "a": a, "b": b }),
        Label::Value(v) => json!({ "value": v }),
    }
}

pub fn sequence_json(seq: &OutcomeSequence) -> Value {
    Value::Array(seq.labels().iter().map(label_json).collect())
}

/// Rows of strings rendered as an aligned table or as CSV.
#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.csv(),
            _ => self.aligned(),
        }
    }

    fn aligned(&self) -> String {
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        for row in std::iter::once(&self.header).chain(&self.rows) {
            let line: Vec<String> = row.iter().zip(&widths).map(|(c, &w)| format!("{c:<w$}")).collect();
            writeln!(out, "{}", line.join("  ").trim_end()).unwrap();
        }
        out
    }

    fn csv(&self) -> String {
        let escape = |c: &String| {
            if c.contains([',', '"', '\n']) {
                format!("\"{}\"", c.replace('"', "\"\""))
            } else {
                c.clone()
            }
        };
        let mut out = String::new();
        for row in std::iter::once(&self.header).chain(&self.rows) {
            writeln!(out, "{}", row.iter().map(escape).collect::<Vec<_>>().join(",")).unwrap();
        }
        out
    }
}

pub fn distribution(dist: &OutcomeDistribution, format: Format) -> String {
    match format {
        Format::Json => {
            let entries: Vec<Value> = dist
                .entries()
                .iter()
                .map(|(seq, entry)| {
                    let state = entry
                        .final_state
                        .as_ref()
                        .map(|s| json!(s.amps().iter().map(|a| [a.re, a.im]).collect::<Vec<_>>()));
                    json!({
                        "sequence": sequence_json(seq),
                        "label": seq.to_string(),
                        "prob": sig12_json(entry.prob),
                        "final_state": state,
                    })
                })
                .collect();
            let doc = json!({ "entries": entries, "total": sig12_json(dist.total()) });
            format!("{}\n", serde_json::to_string_pretty(&doc).unwrap())
        }
        _ => {
            let mut table = Table::new(&["sequence", "prob"]);
            for (seq, entry) in dist.entries() {
                table.push(vec![seq.to_string(), sig12(entry.prob)]);
            }
            table.render(format)
        }
    }
}

pub fn marginal(step: usize, probs: &BTreeMap<Label, f64>, format: Format) -> String {
    match format {
        Format::Json => {
            let rows: Vec<Value> = probs
                .iter()
                .map(|(l, p)| json!({ "label": label_json(l), "text": l.to_string(), "prob": sig12_json(*p) }))
                .collect();
            let doc = json!({ "step": step, "marginal": rows });
            format!("{}\n", serde_json::to_string_pretty(&doc).unwrap())
        }
        _ => {
            let mut table = Table::new(&["label", "prob"]);
            for (l, p) in probs {
                table.push(vec![l.to_string(), sig12(*p)]);
            }
            table.render(format)
        }
    }
}
