use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

/// Where a benchmark constant comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueSource {
    /// Part of the published experiment description.
    Experiment,
    /// Fixed here because the experiment description leaves it open.
    Chosen,
    /// Follows from other constants.
    Derived,
}

impl fmt::Display for ValueSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueSource::Experiment => "experiment",
            ValueSource::Chosen => "chosen",
            ValueSource::Derived => "derived",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CardEntry {
    pub name: String,
    pub value: String,
    pub unit: String,
    pub source: ValueSource,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

/// Human-readable list of every constant behind one benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkCard {
    pub name: String,
    pub summary: String,
    pub entries: Vec<CardEntry>,
}

impl BenchmarkCard {
    pub(crate) fn new(name: impl Into<String>, summary: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            summary: summary.into(),
            entries: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, name: &str, value: impl fmt::Display, unit: &str, source: ValueSource, note: &str) {
        self.entries.push(CardEntry {
            name: name.into(),
            value: value.to_string(),
            unit: unit.into(),
            source,
            note: note.into(),
        });
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {}\n\n{}\n", self.name, self.summary);
        out.push_str("| constant | value | unit | source | note |\n|---|---|---|---|---|\n");
        for e in &self.entries {
            let _ = writeln!(out, "| {} | {} | {} | {} | {} |", e.name, e.value, e.unit, e.source, e.note);
        }
        out
    }
}

/// `[lo, hi] x ...` rendering of box bounds.
pub(crate) fn fmt_box(lower: &[f64], upper: &[f64]) -> String {
    lower
        .iter()
        .zip(upper)
        .map(|(l, u)| format!("[{l}, {u}]"))
        .collect::<Vec<_>>()
        .join(" x ")
}

pub(crate) fn fmt_vec(v: &[f64]) -> String {
    format!("({})", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "))
}
