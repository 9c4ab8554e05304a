//! Report tables rendered as CSV or JSON.

use posetlab_core::BoundReport;
use serde_json::{Map, Value};

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    /// Overrides the generic row-object JSON rendering.
    pub json: Option<Value>,
    /// Emit `json` verbatim regardless of the requested format.
    raw: bool,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
            json: None,
            raw: false,
        }
    }

    pub fn raw_json(value: Value) -> Self {
        Table {
            header: Vec::new(),
            rows: Vec::new(),
            json: Some(value),
            raw: true,
        }
    }

    pub fn from_reports(reports: &[BoundReport]) -> Self {
        let mut t = Table::new(&BoundReport::CSV_HEADER.split(',').collect::<Vec<_>>());
        t.rows = reports
            .iter()
            .map(|r| r.csv_row().split(',').map(str::to_string).collect())
            .collect();
        t.json = Some(serde_json::to_value(reports).expect("reports serialize"));
        t
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, json: bool) -> String {
        if self.raw {
            return serde_json::to_string(self.json.as_ref().expect("raw tables carry json"))
                .expect("value")
                + "\n";
        }
        if json {
            let value = self.json.clone().unwrap_or_else(|| {
                Value::Array(
                    self.rows
                        .iter()
                        .map(|row| {
                            let obj: Map<String, Value> = self
                                .header
                                .iter()
                                .cloned()
                                .zip(row.iter().map(|c| Value::String(c.clone())))
                                .collect();
                            Value::Object(obj)
                        })
                        .collect(),
                )
            });
            return serde_json::to_string_pretty(&value).expect("value") + "\n";
        }
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Quotes a CSV field when it holds a comma, quote, or newline.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
