//! Command reports rendered as text, JSON or CSV.
//!
//! Every rational is carried both exactly and as a six-place decimal. Text
//! and JSON renderings depend only on the report; CSV adds a wall-clock
//! column.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::rational::{decimal, exact, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Number {
    pub exact: String,
    pub approx: String,
}

impl Number {
    pub fn new(q: &Rational) -> Number {
        Number { exact: exact(q), approx: decimal(q, 6) }
    }

    fn parts(&self) -> (&str, &str) {
        self.exact.split_once('/').unwrap_or((&self.exact, "1"))
    }

    fn render(&self) -> String {
        format!("{} (≈ {})", self.exact, self.approx)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Field {
    Number(Number),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub key: String,
    pub value: Field,
}

/// A headline result: one CSV line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Row {
    pub label: String,
    pub value: Option<Number>,
    pub alpha: Option<Number>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub instance: String,
    pub epsilon: Option<Number>,
    pub tie_break: String,
    pub rows: Vec<Row>,
    pub details: Vec<Entry>,
}

pub const CSV_HEADER: &str = "command,instance,epsilon,tie_break,value_num,value_den,alpha_num,alpha_den,runtime_ms";

impl Report {
    pub fn new(command: impl Into<String>, instance: impl Into<String>, epsilon: Option<&Rational>, tie_break: impl Into<String>) -> Report {
        Report {
            command: command.into(),
            instance: instance.into(),
            epsilon: epsilon.map(Number::new),
            tie_break: tie_break.into(),
            rows: Vec::new(),
            details: Vec::new(),
        }
    }

    pub fn row(&mut self, label: impl Into<String>, value: Option<&Rational>, alpha: Option<&Rational>) -> &mut Self {
        self.rows.push(Row { label: label.into(), value: value.map(Number::new), alpha: alpha.map(Number::new) });
        self
    }

    pub fn number(&mut self, key: impl Into<String>, q: &Rational) -> &mut Self {
        self.details.push(Entry { key: key.into(), value: Field::Number(Number::new(q)) });
        self
    }

    pub fn text(&mut self, key: impl Into<String>, text: impl Into<String>) -> &mut Self {
        self.details.push(Entry { key: key.into(), value: Field::Text(text.into()) });
        self
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("command: {}\ninstance: {}\n", self.command, self.instance);
        if let Some(eps) = &self.epsilon {
            out += &format!("epsilon: {}\n", eps.render());
        }
        out += &format!("tie-break: {}\n", self.tie_break);
        for row in &self.rows {
            let mut parts = Vec::new();
            if let Some(v) = &row.value {
                parts.push(format!("value {}", v.render()));
            }
            if let Some(a) = &row.alpha {
                parts.push(format!("alpha {}", a.render()));
            }
            let label = if row.label.is_empty() { "result" } else { &row.label };
            out += &format!("{label}: {}\n", parts.join(", "));
        }
        for entry in &self.details {
            match &entry.value {
                Field::Number(n) => out += &format!("  {} = {}\n", entry.key, n.render()),
                Field::Text(t) if t.contains('\n') => {
                    out += &format!("  {}:\n", entry.key);
                    for line in t.lines() {
                        out += &format!("    {line}\n");
                    }
                }
                Field::Text(t) => out += &format!("  {} = {}\n", entry.key, t),
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(json: &str) -> Result<Report> {
        Ok(serde_json::from_str(json)?)
    }

    /// Header plus one line per headline row.
    pub fn to_csv(&self, runtime_ms: u128) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        let eps = self.epsilon.as_ref().map(|e| e.exact.clone()).unwrap_or_default();
        for row in &self.rows {
            let (vn, vd) = row.value.as_ref().map(Number::parts).unwrap_or(("", ""));
            let (an, ad) = row.alpha.as_ref().map(Number::parts).unwrap_or(("", ""));
            let command = if row.label.is_empty() { self.command.clone() } else { format!("{}/{}", self.command, row.label) };
            let fields = [command, self.instance.clone(), eps.clone(), self.tie_break.clone()]
                .into_iter()
                .map(|f| csv_field(&f))
                .chain([vn, vd, an, ad].into_iter().map(str::to_string))
                .chain([runtime_ms.to_string()])
                .collect::<Vec<_>>();
            out += &fields.join(",");
            out.push('\n');
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
