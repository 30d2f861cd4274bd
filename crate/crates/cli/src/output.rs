use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

/// Version, resolved config and seed, written at the top of every output.
#[derive(Clone, Debug, Serialize)]
pub struct Header {
    pub version: &'static str,
    pub command: &'static str,
    pub config: Value,
    pub seed: u64,
}

impl Header {
    pub fn new(command: &'static str, config: Value, seed: u64) -> Self {
        Header {
            version: scbec::VERSION,
            command,
            config,
            seed,
        }
    }

    pub fn csv_line(&self) -> String {
        format!(
            "# scbec {} command={} config={} seed={}\n",
            self.version, self.command, self.config, self.seed
        )
    }
}

pub fn csv(header: &Header, body: &str) -> String {
    let mut s = header.csv_line();
    s.push_str(body);
    s
}

pub fn json<T: Serialize>(header: &Header, result: &T) -> Result<String, serde_json::Error> {
    let mut s = serde_json::to_string_pretty(&json!({ "header": header, "result": result }))?;
    s.push('\n');
    Ok(s)
}

/// Writes to `path`, or stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

pub fn wants_json(path: Option<&Path>) -> bool {
    path.and_then(|p| p.extension()).is_some_and(|e| e == "json")
}

/// Accepts either a bare JSON value or one wrapped with a header.
pub fn unwrap_result(text: &str) -> Result<Value, serde_json::Error> {
    let v: Value = serde_json::from_str(text)?;
    Ok(match v {
        Value::Object(mut m) if m.contains_key("header") && m.contains_key("result") => m.remove("result").unwrap(),
        other => other,
    })
}
