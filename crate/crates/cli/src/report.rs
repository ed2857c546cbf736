use crate::config::Format;
use hdeform_core::Tolerances;
use serde::Serialize;
use serde_json::{json, Value};
use std::fmt::Write as _;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub model: String,
    pub model_sha256: String,
    pub seed: u64,
    pub tolerances: Tolerances,
}

/// Rows of already-formatted cells under fixed column names.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Finished output of one command.
#[derive(Clone, Debug)]
pub struct Report {
    pub meta: Meta,
    pub summary: Vec<(String, String)>,
    pub table: Table,
    pub body: Value,
    /// 0 when every checked invariant held, 1 otherwise.
    pub status: i32,
    /// Human-readable explanations of a nonzero status.
    pub findings: Vec<String>,
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Table => self.render_table(),
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn header_lines(&self) -> Vec<String> {
        let m = &self.meta;
        let t = &m.tolerances;
        let mut lines = vec![format!("{} {} {}", m.tool, m.version, m.command)];
        if !m.model.is_empty() {
            lines.push(format!("model: {} sha256={}", m.model, m.model_sha256));
        }
        lines.extend([
            format!("seed: {}", m.seed),
            format!(
                "tolerances: rank={:e} zero={:e} kernel={:e} subspace={:e}",
                t.rank, t.zero, t.kernel, t.subspace
            ),
        ]);
        lines
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        for line in self.header_lines() {
            let _ = writeln!(out, "# {line}");
        }
        for (k, v) in &self.summary {
            let _ = writeln!(out, "# {k}: {v}");
        }
        let _ = writeln!(out, "{}", self.table.columns.join(","));
        for row in &self.table.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    fn render_table(&self) -> String {
        let mut out = String::new();
        for line in self.header_lines() {
            let _ = writeln!(out, "{line}");
        }
        if !self.summary.is_empty() {
            out.push('\n');
            let w = self.summary.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            for (k, v) in &self.summary {
                let _ = writeln!(out, "{k:<w$}  {v}");
            }
        }
        if !self.table.rows.is_empty() {
            out.push('\n');
            let cols = &self.table.columns;
            let widths: Vec<usize> = (0..cols.len())
                .map(|j| {
                    self.table
                        .rows
                        .iter()
                        .map(|r| r[j].chars().count())
                        .chain([cols[j].len()])
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let line = |cells: Vec<&str>| {
                cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, &w)| format!("{c:>w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
            };
            let _ = writeln!(out, "{}", line(cols.to_vec()));
            for r in &self.table.rows {
                let _ = writeln!(out, "{}", line(r.iter().map(String::as_str).collect()));
            }
        }
        for f in &self.findings {
            let _ = writeln!(out, "\n! {f}");
        }
        out
    }

    fn render_json(&self) -> String {
        let summary: serde_json::Map<String, Value> = self
            .summary
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        let doc = json!({
            "meta": self.meta,
            "status": self.status,
            "findings": self.findings,
            "summary": summary,
            "report": self.body,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("report values serialize");
        s.push('\n');
        s
    }
}

/// Shortest round-tripping decimal, with NaN spelled out.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:e}")
    }
}

pub fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn or_none<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_else(|| "none".into())
}
