use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Perturbative,
    Pure,
    Classical,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Perturbative => "perturb",
            Method::Pure => "pure",
            Method::Classical => "classical",
        }
    }
}

/// How the exact super-operator evolution was carried out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExactBackend {
    Eigenbasis { condition: f64 },
    MatrixExponential { condition: f64 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TraceMeta {
    pub backend: Option<ExactBackend>,
    /// Set when the eigenbasis route was abandoned for per-time exponentials.
    pub fallback_triggered: bool,
    /// Largest `‖ρ − ρ†‖_F` seen before symmetrization.
    pub max_hermiticity_drift: f64,
    /// Largest `|tr ρ − 1|` seen before any renormalization.
    pub max_trace_deviation: f64,
    /// True when probabilities were divided by the trace.
    pub renormalized: bool,
    /// First-order validity warning raised by the perturbative path.
    pub first_order_warning: bool,
}

/// Node occupation probabilities on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionTrace {
    pub method: Method,
    pub times: Vec<f64>,
    pub node_probs: Vec<Vec<f64>>,
    pub meta: TraceMeta,
}

impl EvolutionTrace {
    pub fn n(&self) -> usize {
        self.node_probs.first().map_or(0, Vec::len)
    }

    /// Checks every row is a probability vector within `tol`.
    pub fn check(&self, tol: f64) -> Result<()> {
        for (t, row) in self.times.iter().zip(&self.node_probs) {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > tol {
                return Err(Error::Numerical(format!(
                    "probabilities at t = {t} sum to {sum}"
                )));
            }
            if let Some(v) = row.iter().find(|v| **v < -tol) {
                return Err(Error::Numerical(format!(
                    "negative probability {v} at t = {t}"
                )));
            }
        }
        Ok(())
    }

    /// Sup-norm distance between two traces on the same grid.
    pub fn max_abs_diff(&self, other: &EvolutionTrace) -> f64 {
        assert_eq!(
            self.times.len(),
            other.times.len(),
            "traces on different grids"
        );
        self.node_probs
            .iter()
            .zip(&other.node_probs)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidInput(
            "time grid contains non-finite values".into(),
        ));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput("time grid must be ascending".into()));
    }
    Ok(())
}
