//! Exact reference dynamics: the vectorized Lindblad super-operator, its
//! dense evolution, and the pure quantum and classical walks.
//!
//! Vectorization stacks columns: `vec(ρ)[j + n·k] = ρ[j, k]`, so
//! `vec(A ρ Bᵀ) = (B ⊗ A) vec(ρ)`.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Eigh, Solve, UPLO};

use crate::error::{Error, Result};
use crate::graph::{eigendecompose, LaplacianMatrix, LaplacianSpectrum};
use crate::linalg::{
    condition_number, expm, hermitian_part, hermiticity_defect, kron, to_complex, C64, I, ONE, ZERO,
};
use crate::trace::{check_times, EvolutionTrace, ExactBackend, Method, TraceMeta};

const STATE_TOL: f64 = 1e-10;
const POSITIVITY_TOL: f64 = 1e-9;

/// Eigenbases with a larger condition number are not trusted for evolution.
pub const MAX_EIGENBASIS_CONDITION: f64 = 1e8;

/// Hermitian, unit-trace, positive semidefinite `n×n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(Array2<C64>);

impl DensityMatrix {
    pub fn new(rho: Array2<C64>) -> Result<Self> {
        let n = rho.nrows();
        if n == 0 || rho.ncols() != n {
            return Err(Error::InvalidState(
                "density matrix must be square and non-empty".into(),
            ));
        }
        if rho.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidState(
                "density matrix has non-finite entries".into(),
            ));
        }
        let defect = hermiticity_defect(rho.view());
        if defect > STATE_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (defect {defect:.3e})"
            )));
        }
        let trace: C64 = rho.diag().sum();
        if (trace - ONE).norm() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace is {trace}, expected 1")));
        }
        let (eigs, _) = hermitian_part(&rho).eigh(UPLO::Lower)?;
        let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(Self(rho))
    }

    /// `|ψ⟩⟨ψ|` for a unit vector `ψ`.
    pub fn from_pure(psi: &Array1<C64>) -> Result<Self> {
        check_unit(psi)?;
        let n = psi.len();
        let rho = Array2::from_shape_fn((n, n), |(i, j)| psi[i] * psi[j].conj());
        Self::new(rho)
    }

    /// The walker sits on `node`: `E_{node,node}`.
    pub fn localized(n: usize, node: usize) -> Result<Self> {
        if node >= n {
            return Err(Error::InvalidState(format!(
                "node {node} out of range for {n} vertices"
            )));
        }
        let mut rho = Array2::zeros((n, n));
        rho[(node, node)] = ONE;
        Ok(Self(rho))
    }

    /// `I / n`.
    pub fn maximally_mixed(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidState("empty state".into()));
        }
        Ok(Self(Array2::<C64>::eye(n).mapv(|v| v / n as f64)))
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.0.diag().iter().map(|v| v.re).collect()
    }
}

pub(crate) fn check_unit(psi: &Array1<C64>) -> Result<()> {
    let norm: f64 = psi.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if psi.is_empty() || !norm.is_finite() || (norm - 1.0).abs() > STATE_TOL {
        return Err(Error::InvalidState(format!(
            "state vector has norm {norm}, expected 1"
        )));
    }
    Ok(())
}

/// Column-stacking vectorization.
pub fn vec(rho: &Array2<C64>) -> Array1<C64> {
    rho.t().iter().cloned().collect()
}

/// Inverse of [`vec`] for a length-`n²` vector.
pub fn unvec(v: &Array1<C64>) -> Result<Array2<C64>> {
    let n = (v.len() as f64).sqrt().round() as usize;
    if n * n != v.len() {
        return Err(Error::InvalidInput(format!(
            "length {} is not a perfect square",
            v.len()
        )));
    }
    Ok(Array2::from_shape_fn((n, n), |(j, k)| v[j + n * k]))
}

/// Right-hand side `−i[L, ρ] − pρ + p Σ_v E_vv ρ E_vv` evaluated directly on
/// the matrix, without vectorization.
pub fn lindblad_rhs(l: &LaplacianMatrix, p: f64, rho: &Array2<C64>) -> Array2<C64> {
    let lc = to_complex(l.matrix());
    let commutator = lc.dot(rho) - rho.dot(&lc);
    let mut out = commutator.mapv(|v| -I * v) - rho.mapv(|v| v * p);
    for v in 0..rho.nrows() {
        out[(v, v)] += rho[(v, v)] * p;
    }
    out
}

/// Dense `n² × n²` generator acting on `vec(ρ)`.
#[derive(Debug, Clone)]
pub struct Superoperator {
    pub m: Array2<C64>,
    pub p: f64,
    n: usize,
}

/// `M = −i(I⊗L − L⊗I) + p(Σ_v E_vv⊗E_vv − I⊗I)`.
///
/// With column stacking `vec(Lρ) = (I⊗L) vec ρ` and `vec(ρL) = (L⊗I) vec ρ`,
/// so this ordering of the Kronecker factors is the one that generates
/// `−i[L, ρ]`. The dephasing part is symmetric under the swap.
pub fn build_superoperator(l: &LaplacianMatrix, p: f64) -> Result<Superoperator> {
    if !(p >= 0.0) || !p.is_finite() {
        return Err(Error::InvalidInput(format!(
            "decoherence rate must be finite and ≥ 0, got {p}"
        )));
    }
    let n = l.n();
    let lc = to_complex(l.matrix());
    let id = Array2::<C64>::eye(n);
    let hamiltonian = kron(&id, &lc) - kron(&lc, &id);
    let mut m = hamiltonian.mapv(|v| -I * v);
    for j in 0..n {
        for k in 0..n {
            if j != k {
                m[(j + n * k, j + n * k)] -= C64::new(p, 0.0);
            }
        }
    }
    Ok(Superoperator { m, p, n })
}

impl Superoperator {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn apply(&self, rho: &Array2<C64>) -> Result<Array2<C64>> {
        unvec(&self.m.dot(&vec(rho)))
    }

    /// Dense eigenvalues of `M`, for validation.
    pub fn eigenvalues(&self) -> Result<Array1<C64>> {
        let (vals, _) = self.m.eig()?;
        Ok(vals)
    }

    /// Dense eigenvalues and right eigenvectors of `M`.
    pub fn eigendecomposition(&self) -> Result<(Array1<C64>, Array2<C64>)> {
        Ok(self.m.eig()?)
    }

    /// Factorizes `M` once for repeated evolution.
    pub fn propagator(&self) -> Result<Propagator> {
        let (vals, vecs) = self.m.eig()?;
        let condition = condition_number(&vecs)?;
        if condition.is_finite() && condition < MAX_EIGENBASIS_CONDITION {
            Ok(Propagator::Eigen {
                vals,
                vecs,
                condition,
            })
        } else {
            log::debug!("super-operator eigenbasis condition {condition:.3e}; using expm");
            Ok(Propagator::Expm {
                m: self.m.clone(),
                condition,
            })
        }
    }
}

/// Either a well-conditioned eigenbasis of `M` or `M` itself for per-time
/// matrix exponentials.
#[derive(Debug, Clone)]
pub enum Propagator {
    Eigen {
        vals: Array1<C64>,
        vecs: Array2<C64>,
        condition: f64,
    },
    Expm {
        m: Array2<C64>,
        condition: f64,
    },
}

impl Propagator {
    pub fn backend(&self) -> ExactBackend {
        match self {
            Propagator::Eigen { condition, .. } => ExactBackend::Eigenbasis {
                condition: *condition,
            },
            Propagator::Expm { condition, .. } => ExactBackend::MatrixExponential {
                condition: *condition,
            },
        }
    }

    /// `exp(M t) v` for each `t`.
    pub fn evolve(&self, v0: &Array1<C64>, times: &[f64]) -> Result<Vec<Array1<C64>>> {
        match self {
            Propagator::Eigen { vals, vecs, .. } => {
                let c0 = vecs.solve(v0)?;
                Ok(times
                    .iter()
                    .map(|&t| {
                        let ct = Array1::from_shape_fn(c0.len(), |i| c0[i] * (vals[i] * t).exp());
                        vecs.dot(&ct)
                    })
                    .collect())
            }
            Propagator::Expm { m, .. } => times
                .iter()
                .map(|&t| Ok(expm(&m.mapv(|v| v * t))?.dot(v0)))
                .collect(),
        }
    }
}

/// Symmetrizes `ρ`, recording the Hermiticity drift and trace deviation.
pub(crate) fn finish_state(rho: Array2<C64>, meta: &mut TraceMeta) -> Array2<C64> {
    let drift = hermiticity_defect(rho.view());
    meta.max_hermiticity_drift = meta.max_hermiticity_drift.max(drift);
    let trace: C64 = rho.diag().sum();
    meta.max_trace_deviation = meta.max_trace_deviation.max((trace - ONE).norm());
    hermitian_part(&rho)
}

/// Evolves `ρ0` under `M` and returns the symmetrized node populations.
pub fn exact_evolve(
    s: &Superoperator,
    rho0: &DensityMatrix,
    times: &[f64],
) -> Result<EvolutionTrace> {
    Ok(exact_evolve_states(s, rho0, times)?.0)
}

/// Like [`exact_evolve`] but also returns every symmetrized `ρ(t)`.
pub fn exact_evolve_states(
    s: &Superoperator,
    rho0: &DensityMatrix,
    times: &[f64],
) -> Result<(EvolutionTrace, Vec<Array2<C64>>)> {
    check_times(times)?;
    if rho0.n() != s.n() {
        return Err(Error::InvalidState(format!(
            "state has dimension {}, super-operator expects {}",
            rho0.n(),
            s.n()
        )));
    }
    let propagator = s.propagator()?;
    let mut meta = TraceMeta {
        backend: Some(propagator.backend()),
        fallback_triggered: matches!(propagator, Propagator::Expm { .. }),
        ..TraceMeta::default()
    };
    let v0 = vec(rho0.matrix());
    let mut states = Vec::with_capacity(times.len());
    let mut node_probs = Vec::with_capacity(times.len());
    for v in propagator.evolve(&v0, times)? {
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical(
                "exact evolution produced non-finite values".into(),
            ));
        }
        let rho = finish_state(unvec(&v)?, &mut meta);
        node_probs.push(rho.diag().iter().map(|z| z.re).collect());
        states.push(rho);
    }
    log::debug!(
        "exact evolution: hermiticity drift {:.3e}, trace deviation {:.3e}",
        meta.max_hermiticity_drift,
        meta.max_trace_deviation
    );
    Ok((
        EvolutionTrace {
            method: Method::Exact,
            times: times.to_vec(),
            node_probs,
            meta,
        },
        states,
    ))
}

/// `ψ(t) = Φ e^{−iΛt} Φᵀ ψ0`.
pub fn pure_ctqw_state(spectrum: &LaplacianSpectrum, psi0: &Array1<C64>, t: f64) -> Array1<C64> {
    let phi = to_complex(&spectrum.phis);
    let mut coeffs = phi.t().dot(psi0);
    for (c, &lambda) in coeffs.iter_mut().zip(spectrum.lambdas.iter()) {
        *c *= (-I * lambda * t).exp();
    }
    phi.dot(&coeffs)
}

pub fn pure_ctqw_evolve(
    spectrum: &LaplacianSpectrum,
    psi0: &Array1<C64>,
    times: &[f64],
) -> Result<EvolutionTrace> {
    check_times(times)?;
    check_unit(psi0)?;
    if psi0.len() != spectrum.n() {
        return Err(Error::InvalidState(
            "state length does not match the graph".into(),
        ));
    }
    let node_probs = times
        .iter()
        .map(|&t| {
            pure_ctqw_state(spectrum, psi0, t)
                .iter()
                .map(|a| a.norm_sqr())
                .collect()
        })
        .collect();
    Ok(EvolutionTrace {
        method: Method::Pure,
        times: times.to_vec(),
        node_probs,
        meta: TraceMeta::default(),
    })
}

/// `p(t) = Φ e^{−Λt} Φᵀ p0`.
pub fn classical_ctrw_evolve(
    l: &LaplacianMatrix,
    p0: &Array1<f64>,
    times: &[f64],
) -> Result<EvolutionTrace> {
    check_times(times)?;
    if p0.len() != l.n() {
        return Err(Error::InvalidState(
            "probability vector length does not match the graph".into(),
        ));
    }
    if p0.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::InvalidState(
            "probability vector has negative entries".into(),
        ));
    }
    let total: f64 = p0.sum();
    if (total - 1.0).abs() > STATE_TOL {
        return Err(Error::InvalidState(format!(
            "probabilities sum to {total}, expected 1"
        )));
    }
    let spectrum = eigendecompose(l)?;
    let phi = &spectrum.phis;
    let coeffs = phi.t().dot(p0);
    let node_probs = times
        .iter()
        .map(|&t| {
            let decayed = Array1::from_shape_fn(coeffs.len(), |i| {
                coeffs[i] * (-spectrum.lambdas[i].max(0.0) * t).exp()
            });
            // entries below zero are roundoff on a nonnegative semigroup
            phi.dot(&decayed).iter().map(|v| v.max(0.0)).collect()
        })
        .collect();
    Ok(EvolutionTrace {
        method: Method::Classical,
        times: times.to_vec(),
        node_probs,
        meta: TraceMeta::default(),
    })
}

/// Basis matrix `E_{jk}`.
pub fn unit_matrix(n: usize, j: usize, k: usize) -> Array2<C64> {
    let mut e = Array2::from_elem((n, n), ZERO);
    e[(j, k)] = ONE;
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_laplacian, Graph};
    use crate::linalg::frobenius;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn random_complex(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Array2<C64> {
        Array2::from_shape_fn((n, m), |_| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn random_state(n: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
        let a = random_complex(n, n, rng);
        let rho = a.dot(&crate::linalg::dagger(&a));
        let tr = rho.diag().sum();
        DensityMatrix::new(rho.mapv(|v| v / tr)).unwrap()
    }

    #[test]
    fn vec_conventions() {
        let e00 = unit_matrix(2, 0, 0);
        assert_eq!(vec(&e00).to_vec(), vec![ONE, ZERO, ZERO, ZERO]);
        let e10 = unit_matrix(2, 1, 0);
        assert_eq!(vec(&e10)[1], ONE);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_complex(3, 3, &mut rng);
        let b = random_complex(3, 3, &mut rng);
        let rho = random_complex(3, 3, &mut rng);
        assert_eq!(unvec(&vec(&rho)).unwrap(), rho);
        let lhs = vec(&a.dot(&rho).dot(&b.t()));
        let rhs = kron(&b, &a).dot(&vec(&rho));
        assert!((lhs - rhs).iter().all(|z| z.norm() < 1e-12));
        assert!(unvec(&Array1::from(vec![ONE; 3])).is_err());
    }

    #[test]
    fn superoperator_reproduces_master_equation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3), (0, 2)]).unwrap();
        let l = build_laplacian(&g);
        for &p in &[0.0, 0.3, 2.0] {
            let s = build_superoperator(&l, p).unwrap();
            for _ in 0..3 {
                let rho = random_complex(4, 4, &mut rng);
                let direct = lindblad_rhs(&l, p, &rho);
                let via_vec = s.apply(&rho).unwrap();
                assert!(frobenius((direct - via_vec).view()) < 1e-12);
            }
        }
    }

    #[test]
    fn k2_superoperator_structure() {
        let l = build_laplacian(&Graph::path(2).unwrap());
        let s = build_superoperator(&l, 0.0).unwrap();
        let m = &s.m;
        let anti = m + &crate::linalg::dagger(m);
        assert!(frobenius(anti.view()) < 1e-12);
        // populations (flat 0 and 3) couple only to coherences
        assert_eq!(m[(0, 0)], ZERO);
        assert_eq!(m[(0, 3)], ZERO);
        assert_eq!(m[(3, 0)], ZERO);
        assert_eq!(m[(1, 2)], ZERO);

        let s = build_superoperator(&l, 0.7).unwrap();
        for j in 0..2 {
            for k in 0..2 {
                let d = s.m[(j + 2 * k, j + 2 * k)].re;
                let want = if j == k { 0.0 } else { -0.7 };
                assert!((d - want).abs() < 1e-15);
            }
        }
        assert!(build_superoperator(&l, -1.0).is_err());
    }

    #[test]
    fn maximally_mixed_state_is_in_kernel() {
        let g = Graph::new(5, [(0, 1), (1, 2), (2, 3), (3, 4), (1, 4)]).unwrap();
        let l = build_laplacian(&g);
        let v = vec(DensityMatrix::maximally_mixed(5).unwrap().matrix());
        for &p in &[0.0, 0.1, 5.0] {
            let s = build_superoperator(&l, p).unwrap();
            assert!(s.m.dot(&v).iter().all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn k2_exact_closed_form() {
        let l = build_laplacian(&Graph::path(2).unwrap());
        let s = build_superoperator(&l, 0.0).unwrap();
        let rho0 = DensityMatrix::localized(2, 0).unwrap();
        let times = [0.0, 0.3, 1.0, FRAC_PI_2, 2.5];
        let tr = exact_evolve(&s, &rho0, &times).unwrap();
        for (t, row) in times.iter().zip(&tr.node_probs) {
            assert!((row[0] - t.cos().powi(2)).abs() < 1e-10, "t = {t}");
        }
        let last = &tr.node_probs[3];
        assert!(last[0].abs() < 1e-10 && (last[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn k2_long_time_dephased_limit() {
        let l = build_laplacian(&Graph::path(2).unwrap());
        let s = build_superoperator(&l, 1.0).unwrap();
        let tr = exact_evolve(&s, &DensityMatrix::localized(2, 0).unwrap(), &[50.0]).unwrap();
        assert!((tr.node_probs[0][0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn stationary_state_stays_put() {
        let g = Graph::new(4, [(0, 1), (1, 2), (1, 3)]).unwrap();
        let l = build_laplacian(&g);
        let s = build_superoperator(&l, 0.4).unwrap();
        let rho0 = DensityMatrix::maximally_mixed(4).unwrap();
        let (tr, states) = exact_evolve_states(&s, &rho0, &[0.0, 1.0, 7.0]).unwrap();
        for rho in &states {
            assert!(frobenius((rho - rho0.matrix()).view()) < 1e-10);
        }
        assert!(tr.meta.max_trace_deviation < 1e-10);
    }

    #[test]
    fn trace_hermiticity_and_positivity_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 2..=6 {
            let g = crate::families::erdos_renyi_connected(n, 0.6, &mut rng, 100).unwrap();
            let l = build_laplacian(&g);
            for &p in &[0.0, 0.2, 3.0] {
                let s = build_superoperator(&l, p).unwrap();
                let rho0 = random_state(n, &mut rng);
                let (tr, states) = exact_evolve_states(&s, &rho0, &[0.0, 0.5, 2.0, 9.0]).unwrap();
                assert!(tr.meta.max_trace_deviation < 1e-9);
                assert!(tr.meta.max_hermiticity_drift < 1e-9);
                for rho in states {
                    let (eigs, _) = rho.eigh(UPLO::Lower).unwrap();
                    assert!(eigs[0] >= -1e-7);
                }
            }
        }
    }

    #[test]
    fn expm_fallback_agrees_with_eigenbasis() {
        let g = Graph::cycle(4).unwrap();
        let l = build_laplacian(&g);
        let s = build_superoperator(&l, 0.3).unwrap();
        let rho0 = DensityMatrix::localized(4, 1).unwrap();
        let times = [0.0, 0.7, 3.0];
        let forced = Propagator::Expm {
            m: s.m.clone(),
            condition: f64::INFINITY,
        };
        let v0 = vec(rho0.matrix());
        let a = forced.evolve(&v0, &times).unwrap();
        let b = s.propagator().unwrap().evolve(&v0, &times).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).iter().all(|z| z.norm() < 1e-9));
        }
    }

    #[test]
    fn pure_walk_matches_series_and_closed_form() {
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)]).unwrap();
        let l = build_laplacian(&g);
        let spectrum = eigendecompose(&l).unwrap();
        let mut psi0 = Array1::from(vec![
            C64::new(0.5, 0.1),
            C64::new(-0.2, 0.3),
            ZERO,
            C64::new(0.1, -0.4),
        ]);
        let norm = crate::linalg::norm2(&psi0);
        psi0.mapv_inplace(|v| v / norm);
        let t = 0.05;
        let generator = to_complex(l.matrix()).mapv(|v| -I * v * t);
        let series = expm(&generator).unwrap().dot(&psi0);
        let spectral = pure_ctqw_state(&spectrum, &psi0, t);
        assert!((series - spectral).iter().all(|z| z.norm() < 1e-13));

        let k2 = eigendecompose(&build_laplacian(&Graph::path(2).unwrap())).unwrap();
        let e0 = Array1::from(vec![ONE, ZERO]);
        let tr = pure_ctqw_evolve(&k2, &e0, &[0.0, 1.2, FRAC_PI_2]).unwrap();
        assert!((tr.node_probs[1][0] - 1.2f64.cos().powi(2)).abs() < 1e-12);
        assert!((tr.node_probs[2][1] - 1.0).abs() < 1e-12);
        assert!(pure_ctqw_evolve(&k2, &Array1::from(vec![ONE, ONE]), &[0.0]).is_err());
    }

    #[test]
    fn pure_walk_agrees_with_exact_at_zero_decoherence() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = crate::families::erdos_renyi_connected(5, 0.5, &mut rng, 100).unwrap();
        let l = build_laplacian(&g);
        let spectrum = eigendecompose(&l).unwrap();
        let mut psi0 = Array1::from_shape_fn(5, |_| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let norm = crate::linalg::norm2(&psi0);
        psi0.mapv_inplace(|v| v / norm);
        let times = [0.0, 0.4, 1.3, 4.0];
        let pure = pure_ctqw_evolve(&spectrum, &psi0, &times).unwrap();
        let s = build_superoperator(&l, 0.0).unwrap();
        let exact = exact_evolve(&s, &DensityMatrix::from_pure(&psi0).unwrap(), &times).unwrap();
        assert!(pure.max_abs_diff(&exact) < 1e-9);
    }

    #[test]
    fn classical_walk_k2_and_limits() {
        let l = build_laplacian(&Graph::path(2).unwrap());
        let p0 = Array1::from(vec![1.0, 0.0]);
        let times = [0.0, 0.25, 1.0, 3.0];
        let tr = classical_ctrw_evolve(&l, &p0, &times).unwrap();
        for (t, row) in times.iter().zip(&tr.node_probs) {
            let e = (-2.0 * t).exp();
            assert!((row[0] - (1.0 + e) / 2.0).abs() < 1e-12);
            assert!((row[1] - (1.0 - e) / 2.0).abs() < 1e-12);
        }
        let g = Graph::new(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 3)]).unwrap();
        let l = build_laplacian(&g);
        let p0 = Array1::from(vec![0.0, 0.0, 1.0, 0.0, 0.0]);
        let tr = classical_ctrw_evolve(&l, &p0, &[50.0]).unwrap();
        assert!(tr.node_probs[0].iter().all(|v| (v - 0.2).abs() < 1e-8));
        assert!(
            classical_ctrw_evolve(&l, &Array1::from(vec![-0.5, 1.5, 0.0, 0.0, 0.0]), &[0.0])
                .is_err()
        );
    }

    #[test]
    fn density_matrix_validation() {
        let bad_trace = Array2::<C64>::eye(2);
        assert!(DensityMatrix::new(bad_trace).is_err());
        let mut non_herm = unit_matrix(2, 0, 0);
        non_herm[(0, 1)] = C64::new(0.1, 0.0);
        assert!(DensityMatrix::new(non_herm).is_err());
        let mut negative = Array2::<C64>::zeros((2, 2));
        negative[(0, 0)] = C64::new(1.5, 0.0);
        negative[(1, 1)] = C64::new(-0.5, 0.0);
        assert!(DensityMatrix::new(negative).is_err());
        assert!(DensityMatrix::localized(2, 2).is_err());
    }
}
