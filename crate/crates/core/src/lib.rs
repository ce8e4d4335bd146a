//! Continuous-time quantum walks with decoherence on undirected graphs.
//!
//! The exact dynamics act on `vec(ρ)` through an `n² × n²` Lindblad
//! super-operator. [`dqw`] rebuilds that operator's first-order eigensystem
//! in the decoherence rate `p` from the `n × n` Laplacian spectrum alone,
//! and [`lindblad`] provides the dense reference it is checked against.

pub mod dqw;
pub mod error;
pub mod families;
pub mod graph;
pub mod linalg;
pub mod lindblad;
pub mod perturb;
pub mod trace;

pub use error::{Error, Result};
pub use graph::{
    build_laplacian, check_gap_uniqueness, eigendecompose, GapReport, Graph, LaplacianMatrix,
    LaplacianSpectrum,
};
pub use linalg::C64;
pub use lindblad::{
    build_superoperator, classical_ctrw_evolve, exact_evolve, pure_ctqw_evolve, DensityMatrix,
    Superoperator,
};
pub use trace::{EvolutionTrace, Method, TraceMeta};
