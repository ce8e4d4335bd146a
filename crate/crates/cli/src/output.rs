use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use qwalk_core::EvolutionTrace;
use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

fn flat_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "none".into(),
        other => other.to_string(),
    }
}

/// CSV with `# key: value` metadata lines, a `time,p0,…` header and
/// 17-significant-digit values.
pub fn trace_csv(trace: &EvolutionTrace, metadata: &impl Serialize) -> CliResult<String> {
    let mut out = String::new();
    if let Value::Object(map) = serde_json::to_value(metadata)? {
        for (k, v) in &map {
            out.push_str(&format!("# {k}: {}\n", flat_value(v)));
        }
    }
    out.push_str("time");
    for j in 0..trace.n() {
        out.push_str(&format!(",p{j}"));
    }
    out.push('\n');
    for (t, row) in trace.times.iter().zip(&trace.node_probs) {
        out.push_str(&format!("{t:.16e}"));
        for v in row {
            out.push_str(&format!(",{v:.16e}"));
        }
        out.push('\n');
    }
    Ok(out)
}

#[derive(Serialize)]
struct Sample<'a> {
    time: f64,
    probs: &'a [f64],
}

/// `[{"time": t, "probs": [...]}, …]`.
pub fn trace_json(trace: &EvolutionTrace) -> CliResult<String> {
    let rows: Vec<Sample> = trace
        .times
        .iter()
        .zip(&trace.node_probs)
        .map(|(&time, probs)| Sample { time, probs })
        .collect();
    Ok(serde_json::to_string_pretty(&rows)? + "\n")
}

pub fn json(value: &impl Serialize) -> CliResult<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

/// `<out>.meta.json` next to a JSON trace.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

pub fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}
