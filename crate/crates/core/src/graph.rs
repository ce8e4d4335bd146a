//! Graphs, combinatorial Laplacians and their spectra.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;

use ndarray::{Array1, Array2, Axis};
use ndarray_linalg::{Eigh, UPLO};
use serde::Serialize;

use crate::error::{Error, GapCollision, Result};
use crate::linalg::{fix_sign, frobenius_real};

/// Simple undirected unweighted graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    // normalized so that u < v, sorted
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph(
                "a graph needs at least one vertex".into(),
            ));
        }
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) out of range for {n} vertices"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            if !set.insert((u.min(v), u.max(v))) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({u}, {v})")));
            }
        }
        Ok(Self {
            n,
            edges: set.into_iter().collect(),
        })
    }

    pub fn edgeless(n: usize) -> Result<Self> {
        Self::new(n, [])
    }

    pub fn complete(n: usize) -> Result<Self> {
        Self::new(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
    }

    pub fn path(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|v| (v - 1, v)))
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidGraph(
                "a cycle needs at least 3 vertices".into(),
            ));
        }
        Self::new(n, (0..n).map(|v| (v, (v + 1) % n)))
    }

    /// Star `K_{1,leaves}` with the hub at vertex 0.
    pub fn star(leaves: usize) -> Result<Self> {
        Self::new(leaves + 1, (1..=leaves).map(|v| (0, v)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.binary_search(&(u.min(v), u.max(v))).is_ok()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for &(u, v) in &self.edges {
            d[u] += 1;
            d[v] += 1;
        }
        d
    }

    /// Component label per vertex, labels numbered in order of first vertex.
    pub fn components(&self) -> Vec<usize> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        for start in 0..self.n {
            if label[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            label[start] = next;
            while let Some(u) = stack.pop() {
                for &w in &adj[u] {
                    if label[w] == usize::MAX {
                        label[w] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn component_count(&self) -> usize {
        self.components().into_iter().max().map_or(0, |m| m + 1)
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() == 1
    }

    /// Serializes to the edge-list text format accepted by [`Graph::from_str`].
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for (u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }
}

/// Edge-list text: first meaningful line is the vertex count, then one
/// whitespace-separated `u v` pair per line. `#` starts a comment.
impl FromStr for Graph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut n = None;
        let mut edges = Vec::new();
        for (idx, raw) in s.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = content.split_whitespace().collect();
            let parse = |t: &str| {
                t.parse::<usize>().map_err(|_| Error::Parse {
                    line,
                    message: format!("expected a non-negative integer, found {t:?}"),
                })
            };
            match n {
                None => {
                    if tokens.len() != 1 {
                        return Err(Error::Parse {
                            line,
                            message: "first line must hold only the vertex count".into(),
                        });
                    }
                    n = Some(parse(tokens[0])?);
                }
                Some(_) => {
                    if tokens.len() != 2 {
                        return Err(Error::Parse {
                            line,
                            message: format!("expected `u v`, found {} token(s)", tokens.len()),
                        });
                    }
                    edges.push((parse(tokens[0])?, parse(tokens[1])?));
                }
            }
        }
        let n = n.ok_or(Error::Parse {
            line: 0,
            message: "missing vertex count".into(),
        })?;
        Graph::new(n, edges)
    }
}

/// Combinatorial Laplacian `L = D − A`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix(Array2<f64>);

impl LaplacianMatrix {
    /// Wraps an arbitrary real matrix, checking it is square and symmetric.
    pub fn from_matrix(m: Array2<f64>) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::InvalidInput("Laplacian must be square".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * (1.0 + m[(i, j)].abs()) {
                    return Err(Error::InvalidInput(format!(
                        "Laplacian is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }
}

pub fn build_laplacian(g: &Graph) -> LaplacianMatrix {
    let n = g.n();
    let mut l = Array2::<f64>::zeros((n, n));
    for &(u, v) in g.edges() {
        l[(u, v)] = -1.0;
        l[(v, u)] = -1.0;
        l[(u, u)] += 1.0;
        l[(v, v)] += 1.0;
    }
    LaplacianMatrix(l)
}

/// Ascending eigenvalues and matching orthonormal eigenvector columns of `L`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaplacianSpectrum {
    pub lambdas: Array1<f64>,
    pub phis: Array2<f64>,
}

impl LaplacianSpectrum {
    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    /// Scale-aware degeneracy tolerance `1e−9·(λ_max − λ_min + 1)`.
    pub fn default_tolerance(&self) -> f64 {
        let max = self
            .lambdas
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let min = self.lambdas.iter().cloned().fold(f64::INFINITY, f64::min);
        1e-9 * (max - min + 1.0)
    }

    /// `Φ Λ Φᵀ`.
    pub fn reconstruct(&self) -> Array2<f64> {
        let scaled = &self.phis * &self.lambdas.view().insert_axis(Axis(0));
        scaled.dot(&self.phis.t())
    }

    pub fn zero_count(&self, tol: f64) -> usize {
        self.lambdas.iter().filter(|l| l.abs() <= tol).count()
    }
}

pub fn eigendecompose(l: &LaplacianMatrix) -> Result<LaplacianSpectrum> {
    let (lambdas, mut phis) = l.matrix().eigh(UPLO::Lower)?;
    for col in phis.axis_iter_mut(Axis(1)) {
        fix_sign(col);
    }
    let spectrum = LaplacianSpectrum { lambdas, phis };
    let scale = frobenius_real(l.matrix().view()).max(1.0);
    let residual = frobenius_real((spectrum.reconstruct() - l.matrix()).view());
    if residual > 1e-10 * scale {
        return Err(Error::Numerical(format!(
            "Laplacian eigendecomposition reconstruction error {residual:.3e}"
        )));
    }
    Ok(spectrum)
}

/// Outcome of the gap-uniqueness test; `colliding_pairs` holds index
/// quadruples `[j, k, l, m]` with `λ_k − λ_j ≈ λ_m − λ_l`, `(j,k) < (l,m)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub unique_gaps: bool,
    pub tolerance: f64,
    pub repeated_eigenvalues: Vec<(usize, usize)>,
    pub colliding_pairs: Vec<GapCollision>,
    /// Smallest separation between distinct gaps (or eigenvalues), useful as
    /// a conditioning hint for the perturbative path.
    pub min_separation: f64,
}

impl GapReport {
    pub fn into_result(self) -> Result<Self> {
        if self.unique_gaps {
            Ok(self)
        } else {
            Err(Error::GapCollision {
                repeated: self.repeated_eigenvalues,
                colliding: self.colliding_pairs,
            })
        }
    }
}

/// Groups sorted `(value, payload)` entries by single linkage at `tol` and
/// returns every pair inside each group, plus the smallest gap between
/// neighbouring groups.
fn linked_pairs<T: Copy>(sorted: &[(f64, T)], tol: f64) -> (Vec<(T, T)>, f64) {
    let mut pairs = Vec::new();
    let mut min_sep = f64::INFINITY;
    let mut start = 0;
    for i in 1..=sorted.len() {
        let split = i == sorted.len() || sorted[i].0 - sorted[i - 1].0 > tol;
        if i < sorted.len() && split {
            min_sep = min_sep.min(sorted[i].0 - sorted[i - 1].0);
        }
        if split {
            for a in start..i {
                for b in a + 1..i {
                    pairs.push((sorted[a].1, sorted[b].1));
                }
            }
            start = i;
        }
    }
    (pairs, min_sep)
}

pub fn check_gap_uniqueness(spectrum: &LaplacianSpectrum, tol: f64) -> GapReport {
    let n = spectrum.n();
    let lam = &spectrum.lambdas;

    let mut values: Vec<(f64, usize)> = lam.iter().cloned().zip(0..n).collect();
    values.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (mut repeated, sep_values) = linked_pairs(&values, tol);
    for p in repeated.iter_mut() {
        *p = (p.0.min(p.1), p.0.max(p.1));
    }
    repeated.sort_unstable();

    let mut gaps: Vec<(f64, (usize, usize))> = (0..n)
        .flat_map(|j| (0..n).filter(move |&k| k != j).map(move |k| (j, k)))
        .map(|(j, k)| (lam[k] - lam[j], (j, k)))
        .collect();
    gaps.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let (gap_pairs, sep_gaps) = linked_pairs(&gaps, tol);
    let mut colliding: Vec<GapCollision> = gap_pairs
        .into_iter()
        .map(|(a, b)| {
            let (first, second) = if a <= b { (a, b) } else { (b, a) };
            [first.0, first.1, second.0, second.1]
        })
        .collect();
    colliding.sort_unstable();

    GapReport {
        unique_gaps: repeated.is_empty() && colliding.is_empty(),
        tolerance: tol,
        repeated_eigenvalues: repeated,
        colliding_pairs: colliding,
        min_separation: sep_values.min(sep_gaps),
    }
}
