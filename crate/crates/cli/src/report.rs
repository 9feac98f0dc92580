use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{Format, RunConfig};

/// Output of one subcommand, renderable in every format.
pub struct Report {
    pub command: &'static str,
    pub result: Value,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Extra `# ...` lines after the CSV rows.
    pub notes: Vec<String>,
}

#[derive(Serialize)]
struct Meta {
    version: &'static str,
    unix_time: u64,
}

impl Report {
    pub fn write<W: Write>(&self, config: &RunConfig, with_meta: bool, out: &mut W) -> std::io::Result<()> {
        let meta = with_meta.then(|| Meta {
            version: env!("CARGO_PKG_VERSION"),
            unix_time: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        });
        match config.format {
            Format::Json => {
                let mut doc = json!({ "command": self.command, "config": config, "result": self.result });
                if let Some(meta) = &meta {
                    doc["meta"] = serde_json::to_value(meta)?;
                }
                serde_json::to_writer_pretty(&mut *out, &doc)?;
                writeln!(out)
            }
            Format::Csv => {
                {
                    let mut w = csv::Writer::from_writer(&mut *out);
                    w.write_record(&self.header)?;
                    for row in &self.rows {
                        w.write_record(row)?;
                    }
                    w.flush()?;
                }
                for note in &self.notes {
                    writeln!(out, "# {note}")?;
                }
                writeln!(out, "# config {}", config.summary())?;
                if let Some(meta) = &meta {
                    writeln!(out, "# meta version={} unix_time={}", meta.version, meta.unix_time)?;
                }
                Ok(())
            }
            Format::Plain => {
                writeln!(out, "command = {}", self.command)?;
                let mut lines = Vec::new();
                flatten("config", &serde_json::to_value(config)?, &mut lines);
                flatten("", &self.result, &mut lines);
                if let Some(meta) = &meta {
                    flatten("meta", &serde_json::to_value(meta)?, &mut lines);
                }
                for line in lines {
                    writeln!(out, "{line}")?;
                }
                Ok(())
            }
        }
    }
}

/// `key = value` lines for scalar leaves; arrays of numbers are summarized.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<String>) {
    let key = |k: &str| if prefix.is_empty() { k.to_owned() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => flatten_map(map, &key, out),
        Value::Array(items) if items.iter().all(|x| x.is_number()) => {
            out.push(format!("{prefix} = [{} values]", items.len()));
        }
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                flatten(&key(&i.to_string()), item, out);
            }
        }
        Value::String(s) => out.push(format!("{prefix} = {s}")),
        other => out.push(format!("{prefix} = {other}")),
    }
}

fn flatten_map(map: &Map<String, Value>, key: &dyn Fn(&str) -> String, out: &mut Vec<String>) {
    for (k, v) in map {
        flatten(&key(k), v, out);
    }
}

/// Display form of a float cell; NaN stays empty.
pub fn cell(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}
