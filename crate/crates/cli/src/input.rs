use std::fs;
use std::path::{Path, PathBuf};

use qwalk_core::{Graph, C64};

use crate::error::{CliError, CliResult};

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_graph(path: &Path) -> CliResult<Graph> {
    read_text(path)?.parse().map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses one `re [im]` value per non-comment line, exactly `n` of them.
pub fn parse_init(text: &str, n: usize, path: &Path) -> CliResult<Vec<C64>> {
    let fail = |line: usize, message: String| CliError::InitFile {
        path: PathBuf::from(path),
        line,
        message,
    };
    let mut values = Vec::with_capacity(n);
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let nums = content
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| fail(line, format!("not a number: {t:?}")))
            })
            .collect::<CliResult<Vec<f64>>>()?;
        let value = match nums[..] {
            [re] => C64::new(re, 0.0),
            [re, im] => C64::new(re, im),
            _ => {
                return Err(fail(
                    line,
                    format!("expected `re [im]`, found {} values", nums.len()),
                ))
            }
        };
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(fail(line, "non-finite value".into()));
        }
        values.push(value);
    }
    if values.len() != n {
        return Err(fail(
            0,
            format!("expected {n} values for {n} nodes, found {}", values.len()),
        ));
    }
    Ok(values)
}

/// `steps` intervals from `start` to `stop`, both ends included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn validate(&self) -> CliResult<()> {
        if self.steps < 1 {
            return Err(CliError::Config("--t-steps must be at least 1".into()));
        }
        if !(self.start >= 0.0 && self.stop >= self.start && self.stop.is_finite()) {
            return Err(CliError::Config(format!(
                "time grid needs 0 ≤ t-start ≤ t-stop, got [{}, {}]",
                self.start, self.stop
            )));
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        let width = self.stop - self.start;
        (0..=self.steps)
            .map(|i| {
                if i == self.steps {
                    self.stop
                } else {
                    self.start + width * i as f64 / self.steps as f64
                }
            })
            .collect()
    }
}
