use thiserror::Error;

/// A pair of ordered index pairs `((j, k), (l, m))` whose Laplacian gaps
/// `λ_k − λ_j` and `λ_m − λ_l` coincide within tolerance.
pub type GapCollision = [usize; 4];

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("edge list parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("linear algebra failure: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("eigenvalues are degenerate ({0}); use the repeated-eigenvalue path")]
    Degenerate(String),

    #[error("unresolved degeneracy: {0}")]
    UnresolvedDegeneracy(String),

    #[error("not supported: {0}")]
    NotSupported(String),

    #[error(
        "Laplacian gaps are not unique: {} repeated eigenvalue pair(s), {} colliding gap quadruple(s){}",
        repeated.len(),
        colliding.len(),
        describe_collisions(repeated, colliding)
    )]
    GapCollision {
        repeated: Vec<(usize, usize)>,
        colliding: Vec<GapCollision>,
    },

    #[error("graph with {n} vertices exceeds the limit of {limit} for {what}")]
    TooLarge {
        n: usize,
        limit: usize,
        what: &'static str,
    },
}

fn describe_collisions(repeated: &[(usize, usize)], colliding: &[GapCollision]) -> String {
    const SHOWN: usize = 8;
    let mut parts: Vec<String> = repeated
        .iter()
        .take(SHOWN)
        .map(|(a, b)| format!("λ_{a} = λ_{b}"))
        .collect();
    parts.extend(
        colliding
            .iter()
            .take(SHOWN)
            .map(|[j, k, l, m]| format!("({j},{k})~({l},{m})")),
    );
    if parts.is_empty() {
        return String::new();
    }
    let more = repeated.len().saturating_sub(SHOWN) + colliding.len().saturating_sub(SHOWN);
    let tail = if more > 0 {
        format!(", ... {more} more")
    } else {
        String::new()
    };
    format!(": {}{tail}", parts.join(", "))
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
