//! Seeded graph generators used by benchmarks and test fixtures.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{build_laplacian, check_gap_uniqueness, eigendecompose, Graph};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GraphFamily {
    Path,
    RandomTree,
    ErdosRenyi { q: f64 },
}

impl GraphFamily {
    pub fn is_random(&self) -> bool {
        !matches!(self, GraphFamily::Path)
    }
}

impl fmt::Display for GraphFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphFamily::Path => write!(f, "path"),
            GraphFamily::RandomTree => write!(f, "random-tree"),
            GraphFamily::ErdosRenyi { q } => write!(f, "erdos-renyi({q})"),
        }
    }
}

impl FromStr for GraphFamily {
    type Err = Error;

    /// Accepts `path`, `random-tree`, `erdos-renyi` (q = 0.5) and
    /// `erdos-renyi:<q>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "path" => Ok(GraphFamily::Path),
            "random-tree" => Ok(GraphFamily::RandomTree),
            "erdos-renyi" => Ok(GraphFamily::ErdosRenyi { q: 0.5 }),
            other => {
                let q = other
                    .strip_prefix("erdos-renyi:")
                    .and_then(|q| q.parse::<f64>().ok())
                    .ok_or_else(|| Error::InvalidInput(format!("unknown graph family {s:?}")))?;
                if !(q > 0.0 && q <= 1.0) {
                    return Err(Error::InvalidInput(format!(
                        "edge probability {q} not in (0, 1]"
                    )));
                }
                Ok(GraphFamily::ErdosRenyi { q })
            }
        }
    }
}

/// Uniform random labelled tree via a random Prüfer sequence.
pub fn random_tree<R: Rng>(n: usize, rng: &mut R) -> Result<Graph> {
    if n <= 2 {
        return Graph::path(n);
    }
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &s in &seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &s in &seq {
        let leaf = (0..n)
            .find(|&v| degree[v] == 1)
            .expect("Prüfer decoding always has a leaf");
        edges.push((leaf, s));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    Graph::new(n, edges)
}

/// `G(n, q)` conditioned on connectivity by rejection.
pub fn erdos_renyi_connected<R: Rng>(
    n: usize,
    q: f64,
    rng: &mut R,
    max_tries: usize,
) -> Result<Graph> {
    for _ in 0..max_tries {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random::<f64>() < q {
                    edges.push((u, v));
                }
            }
        }
        let g = Graph::new(n, edges)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::InvalidGraph(format!(
        "no connected G({n}, {q}) sample within {max_tries} tries"
    )))
}

pub fn generate<R: Rng>(family: GraphFamily, n: usize, rng: &mut R) -> Result<Graph> {
    match family {
        GraphFamily::Path => Graph::path(n),
        GraphFamily::RandomTree => random_tree(n, rng),
        GraphFamily::ErdosRenyi { q } => erdos_renyi_connected(n, q, rng, 1000),
    }
}

/// A connected graph with unique Laplacian gaps, plus how many candidates
/// were rejected before it.
#[derive(Debug, Clone)]
pub struct GapUniqueSample {
    pub graph: Graph,
    pub resamples: usize,
    pub min_separation: f64,
}

/// Draws graphs from `family` with a seeded generator until one has unique
/// Laplacian gaps whose minimum separation is at least `min_separation`.
pub fn sample_unique_gaps(
    family: GraphFamily,
    n: usize,
    seed: u64,
    min_separation: f64,
    max_tries: usize,
) -> Result<GapUniqueSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..max_tries {
        let graph = generate(family, n, &mut rng)?;
        let spectrum = eigendecompose(&build_laplacian(&graph))?;
        let report = check_gap_uniqueness(&spectrum, spectrum.default_tolerance());
        if report.unique_gaps && report.min_separation >= min_separation {
            return Ok(GapUniqueSample {
                graph,
                resamples: attempt,
                min_separation: report.min_separation,
            });
        }
        if !family.is_random() {
            report.into_result()?;
            break;
        }
    }
    Err(Error::InvalidGraph(format!(
        "no {family} graph on {n} vertices with unique gaps (separation ≥ {min_separation}) \
         within {max_tries} tries"
    )))
}
