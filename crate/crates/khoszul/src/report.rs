//! Deterministic JSON reports for the command-line tool. All maps are
//! ordered so that two runs on the same input emit identical bytes;
//! timings are opt-out via `--no-timings`.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub input: BTreeMap<String, serde_json::Value>,
    pub results: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, u64>>,
}

impl Report {
    pub fn new(command: &str) -> Report {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            input: BTreeMap::new(),
            results: serde_json::Value::Null,
            timings_ms: None,
        }
    }

    pub fn echo(&mut self, key: &str, value: impl Serialize) {
        self.input.insert(key.to_string(), serde_json::to_value(value).expect("serializable echo"));
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable report")
    }
}

/// Wall-clock phase timer feeding `timings_ms`.
pub struct Timings {
    enabled: bool,
    start: Instant,
    phases: BTreeMap<String, u64>,
}

impl Timings {
    pub fn new(enabled: bool) -> Timings {
        Timings { enabled, start: Instant::now(), phases: BTreeMap::new() }
    }

    /// Record the time since the previous mark under `phase`.
    pub fn mark(&mut self, phase: &str) {
        let elapsed = self.start.elapsed().as_millis() as u64;
        self.start = Instant::now();
        *self.phases.entry(phase.to_string()).or_insert(0) += elapsed;
    }

    pub fn finish(self, report: &mut Report) {
        if self.enabled {
            report.timings_ms = Some(self.phases);
        }
    }
}

/// Fixed-width text table for the stderr side channel.
pub fn render_table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let fmt_row = |cells: &[String]| -> String {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    let mut out = String::new();
    out.push_str(&fmt_row(&headers.iter().map(|h| h.to_string()).collect::<Vec<_>>()));
    out.push('\n');
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len().saturating_sub(1))));
    out.push('\n');
    for row in rows {
        out.push_str(&fmt_row(row));
        out.push('\n');
    }
    out
}
