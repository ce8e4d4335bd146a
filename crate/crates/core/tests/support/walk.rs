//! Dense-oracle checks for the perturbative walk.

use ndarray::Array1;
use qwalk_core::dqw::{approximate, max_matching_error};
use qwalk_core::families::{sample_unique_gaps, GraphFamily};
use qwalk_core::{build_laplacian, build_superoperator, eigendecompose, Graph, C64};

pub const ER: GraphFamily = GraphFamily::ErdosRenyi { q: 0.5 };

/// P3 and five seeded random graphs with well separated unique gaps.
pub fn fixture_graphs() -> Vec<Graph> {
    let mut graphs = vec![Graph::path(3).unwrap()];
    for (seed, n) in [(1u64, 5usize), (2, 6), (3, 7), (4, 8), (5, 6)] {
        graphs.push(sample_unique_gaps(ER, n, seed, 0.05, 2000).unwrap().graph);
    }
    graphs
}

/// `count` seeded random graphs with unique gaps, `n ∈ {5, …, 8}`.
pub fn invariant_graphs(count: usize) -> Vec<Graph> {
    (0..count)
        .map(|i| {
            sample_unique_gaps(ER, 5 + i % 4, 1000 + i as u64, 0.0, 2000)
                .unwrap()
                .graph
        })
        .collect()
}

/// `max |eig(A(p)) − (π + pπ′)|` after greedy matching.
pub fn spectral_error(g: &Graph, p: f64) -> f64 {
    let l = build_laplacian(g);
    let spectrum = eigendecompose(&l).unwrap();
    let approx = approximate(&spectrum, p, spectrum.default_tolerance()).unwrap();
    let exact = build_superoperator(&l, p).unwrap().eigenvalues().unwrap();
    max_matching_error(
        approx.eigenvalues.as_slice().unwrap(),
        exact.as_slice().unwrap(),
    )
}

/// `max_q ‖A(p)x_q − μ_q x_q‖ / ‖x_q‖` over the materialized first-order
/// eigenvectors.
pub fn eigenvector_residual(g: &Graph, p: f64) -> f64 {
    let l = build_laplacian(g);
    let spectrum = eigendecompose(&l).unwrap();
    let approx = approximate(&spectrum, p, spectrum.default_tolerance()).unwrap();
    let m = build_superoperator(&l, p).unwrap().m;
    let mut worst: f64 = 0.0;
    for q in 0..approx.index.len() {
        let x: Array1<C64> = approx.eigenvector(q).unwrap();
        let mu = approx.eigenvalues[q];
        let r = m.dot(&x) - x.mapv(|v| v * mu);
        let rn = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let xn = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max(rn / xn);
    }
    worst
}
