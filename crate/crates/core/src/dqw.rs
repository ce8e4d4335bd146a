//! First-order eigensystem of the decoherent-walk super-operator built from
//! the Laplacian spectrum alone.
//!
//! At `p = 0` the super-operator is `−i[L, ·]`, whose eigenvectors are the
//! mode matrices `φ_j φ_kᵀ` with eigenvalues `π_jk = i(λ_k − λ_j)`. The mode
//! `(j, k)` lives at flat position `j + n·k`, which is where `vec` puts the
//! entry `ρ[j, k]`, so `vec(φ_j φ_kᵀ) = φ_k ⊗ φ_j`. Dephasing (`p > 0`)
//! splits the `n`-fold zero eigenvalue of the population modes `(j, j)`;
//! after the split the flat position `(c, c)` carries the `c`-th rotated
//! population mode `Σ_j Γ[j, c] φ_j φ_jᵀ` instead of `φ_c φ_cᵀ`.

use ndarray::{Array1, Array2, Axis};
use ndarray_linalg::{Eigh, UPLO};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{
    build_laplacian, check_gap_uniqueness, eigendecompose, Graph, LaplacianSpectrum,
};
use crate::linalg::{fix_sign, frobenius, to_complex, C64, I, ZERO};
use crate::lindblad::{build_superoperator, exact_evolve, finish_state, unvec, vec, DensityMatrix};
use crate::perturb::cross_blocks_projected;
use crate::trace::{check_times, EvolutionTrace, Method, TraceMeta};

/// Largest graph the dense oracle comparison accepts.
pub const ORACLE_MAX_N: usize = 16;

/// Maps ordered pairs `(j, k)` to flat positions `j + n·k` and back.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairIndex {
    n: usize,
}

impl PairIndex {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn flat(&self, j: usize, k: usize) -> usize {
        j + self.n * k
    }

    pub fn pair(&self, q: usize) -> (usize, usize) {
        (q % self.n, q / self.n)
    }

    pub fn is_population(&self, q: usize) -> bool {
        let (j, k) = self.pair(q);
        j == k
    }

    /// Flat positions of the coherence modes `j ≠ k`, ascending.
    pub fn coherences(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&q| !self.is_population(q))
            .collect()
    }
}

/// The `p = 0` spectrum `π_jk = i(λ_k − λ_j)` in flat layout.
#[derive(Debug, Clone)]
pub struct UnperturbedSpectrum {
    pub index: PairIndex,
    pub pi: Array1<C64>,
    /// Largest `‖A(0)ξ − πξ‖` over the spot-checked modes.
    pub max_spot_residual: f64,
}

impl UnperturbedSpectrum {
    pub fn get(&self, j: usize, k: usize) -> C64 {
        self.pi[self.index.flat(j, k)]
    }
}

fn mode_matrix(spectrum: &LaplacianSpectrum, j: usize, k: usize) -> Array2<f64> {
    let phi = &spectrum.phis;
    let n = spectrum.n();
    Array2::from_shape_fn((n, n), |(a, b)| phi[(a, j)] * phi[(b, k)])
}

pub fn unperturbed_spectrum(spectrum: &LaplacianSpectrum) -> UnperturbedSpectrum {
    let n = spectrum.n();
    let index = PairIndex::new(n);
    let lam = &spectrum.lambdas;
    let pi = Array1::from_shape_fn(index.len(), |q| {
        let (j, k) = index.pair(q);
        I * (lam[k] - lam[j])
    });

    let laplacian = spectrum.reconstruct();
    let stride = (index.len() / 10).max(1);
    let mut max_spot_residual: f64 = 0.0;
    for q in (0..index.len()).step_by(stride).take(10) {
        let (j, k) = index.pair(q);
        let mode = mode_matrix(spectrum, j, k);
        let commutator = laplacian.dot(&mode) - mode.dot(&laplacian);
        // A(0) mode = −i[L, mode] and π mode = i(λ_k − λ_j) mode; both purely imaginary
        let residual = (commutator.mapv(|v| -v) - mode.mapv(|v| v * pi[q].im))
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        max_spot_residual = max_spot_residual.max(residual);
    }
    if max_spot_residual > 1e-10 {
        log::warn!("unperturbed eigenvector spot check residual {max_spot_residual:.3e}");
    }
    UnperturbedSpectrum {
        index,
        pi,
        max_spot_residual,
    }
}

/// Co-observation probabilities `o_jk = Σ_v φ_jv² φ_kv²` and the
/// eigensystem of `Ξ = O − I`.
#[derive(Debug, Clone, Serialize)]
pub struct CoObservation {
    pub o: Array2<f64>,
    pub xi: Array2<f64>,
    /// Orthogonal eigenvectors of `Ξ` as columns.
    pub gamma: Array2<f64>,
    /// Eigenvalues of `Ξ`, descending (the zero mode first).
    pub xi_eigs: Array1<f64>,
}

impl CoObservation {
    /// Largest deviation of a row or column sum of `O` from 1.
    pub fn doubly_stochastic_defect(&self) -> f64 {
        let rows = self.o.sum_axis(Axis(1));
        let cols = self.o.sum_axis(Axis(0));
        rows.iter()
            .chain(cols.iter())
            .map(|s| (s - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

pub fn co_observation(spectrum: &LaplacianSpectrum) -> Result<CoObservation> {
    let squared = spectrum.phis.mapv(|v| v * v);
    let o = squared.t().dot(&squared);
    let n = spectrum.n();
    let xi = &o - &Array2::<f64>::eye(n);
    let (vals, vecs) = xi.eigh(UPLO::Lower)?;
    let order: Vec<usize> = (0..n).rev().collect();
    let xi_eigs = vals.select(Axis(0), &order);
    let mut gamma = vecs.select(Axis(1), &order);
    for col in gamma.axis_iter_mut(Axis(1)) {
        fix_sign(col);
    }
    Ok(CoObservation {
        o,
        xi,
        gamma,
        xi_eigs,
    })
}

fn require_unique_gaps(spectrum: &LaplacianSpectrum, tol: f64) -> Result<()> {
    check_gap_uniqueness(spectrum, tol)
        .into_result()
        .map(|_| ())
}

/// `π′` in flat layout: `o_jk − 1` on coherences, `Ξ`'s eigenvalues on the
/// rotated population modes.
pub fn eigenvalue_derivatives(
    spectrum: &LaplacianSpectrum,
    coobs: &CoObservation,
    tol: f64,
) -> Result<Array1<f64>> {
    require_unique_gaps(spectrum, tol)?;
    let index = PairIndex::new(spectrum.n());
    Ok(Array1::from_shape_fn(index.len(), |q| {
        let (j, k) = index.pair(q);
        if j == k {
            coobs.xi_eigs[j]
        } else {
            coobs.o[(j, k)] - 1.0
        }
    }))
}

/// First-order mixing coefficients `B` in flat layout, relative to the
/// rotated eigenbasis. Row `(j, k)`, column `(l, m)` says how much of mode
/// `(j, k)` enters the derivative of mode `(l, m)`.
#[derive(Debug, Clone)]
pub struct MixingTensor {
    pub index: PairIndex,
    pub b: Array2<C64>,
    /// Flat columns that were computed; `None` means all of them.
    pub targets: Option<Vec<usize>>,
}

impl MixingTensor {
    pub fn get(&self, jk: (usize, usize), lm: (usize, usize)) -> C64 {
        self.b[(self.index.flat(jk.0, jk.1), self.index.flat(lm.0, lm.1))]
    }

    pub fn is_complete(&self) -> bool {
        self.targets.is_none()
    }

    /// Largest `|Re b|` over all entries.
    pub fn max_real_part(&self) -> f64 {
        self.b.iter().map(|v| v.re.abs()).fold(0.0, f64::max)
    }

    /// Largest `|b_{jk}^{lm} + b_{lm}^{jk}|` over all entries.
    pub fn antisymmetry_defect(&self) -> f64 {
        let n2 = self.index.len();
        let mut worst: f64 = 0.0;
        for a in 0..n2 {
            for b in a..n2 {
                worst = worst.max((self.b[(a, b)] + self.b[(b, a)]).norm());
            }
        }
        worst
    }
}

/// `W[(j,k), v] = φ_jv φ_kv`, one row per flat position.
fn pair_products(spectrum: &LaplacianSpectrum) -> Array2<f64> {
    let n = spectrum.n();
    let index = PairIndex::new(n);
    let phi = &spectrum.phis;
    Array2::from_shape_fn((index.len(), n), |(q, v)| {
        let (j, k) = index.pair(q);
        phi[(v, j)] * phi[(v, k)]
    })
}

/// Computes the mixing tensor.
///
/// Coherence-to-coherence entries are
/// `Σ_v φ_jv φ_kv φ_lv φ_mv / (i(λ_m + λ_j − λ_l − λ_k))`, evaluated row by
/// row in parallel with a fixed summation order, so the result does not
/// depend on the thread count. Couplings between coherences and the rotated
/// population modes come from [`cross_blocks_projected`] with `λ̄ = 0` and
/// `Γ₁ = I`. Population-to-population entries are zero.
///
/// `targets` restricts the computed columns; other columns stay zero.
pub fn mixing_coefficients(
    spectrum: &LaplacianSpectrum,
    coobs: &CoObservation,
    targets: Option<&[(usize, usize)]>,
    tol: f64,
) -> Result<MixingTensor> {
    require_unique_gaps(spectrum, tol)?;
    let n = spectrum.n();
    let index = PairIndex::new(n);
    let n2 = index.len();
    let lam = &spectrum.lambdas;

    let mut wanted = vec![targets.is_none(); n2];
    let target_flats = match targets {
        Some(list) => {
            let mut flats = Vec::with_capacity(list.len());
            for &(l, m) in list {
                if l >= n || m >= n {
                    return Err(Error::InvalidInput(format!(
                        "target pair ({l}, {m}) out of range"
                    )));
                }
                let q = index.flat(l, m);
                wanted[q] = true;
                flats.push(q);
            }
            flats.sort_unstable();
            flats.dedup();
            Some(flats)
        }
        None => None,
    };

    let w = pair_products(spectrum);
    let coherences = index.coherences();
    let rows: Vec<Result<Vec<(usize, C64)>>> = coherences
        .par_iter()
        .map(|&r| {
            let (j, k) = index.pair(r);
            let wr = w.row(r);
            let mut out = Vec::new();
            for &c in &coherences {
                if c == r || !wanted[c] {
                    continue;
                }
                let (l, m) = index.pair(c);
                let denom = lam[m] + lam[j] - lam[l] - lam[k];
                if denom.abs() <= tol {
                    return Err(Error::GapCollision {
                        repeated: vec![],
                        colliding: vec![[j, k, l, m]],
                    });
                }
                let numer: f64 = wr.iter().zip(w.row(c).iter()).map(|(a, b)| a * b).sum();
                // numer / (i·denom)
                out.push((c, C64::new(0.0, -numer / denom)));
            }
            Ok(out)
        })
        .collect();

    let mut b = Array2::from_elem((n2, n2), ZERO);
    for (&r, row) in coherences.iter().zip(rows) {
        for (c, v) in row? {
            b[(r, c)] = v;
        }
    }

    // coherence ↔ population couplings through the degenerate-block formulas
    let populations: Vec<usize> = (0..n).map(|c| index.flat(c, c)).collect();
    let w_pop = w.select(Axis(0), &populations);
    let w_coh = w.select(Axis(0), &coherences);
    let y1_a_x2 = to_complex(&w_coh.dot(&w_pop.t()));
    let y2_a_x1 = y1_a_x2.t().to_owned();
    let pi1 = Array1::from_shape_fn(coherences.len(), |a| {
        let (j, k) = index.pair(coherences[a]);
        I * (lam[k] - lam[j])
    });
    let gamma2 = to_complex(&coobs.gamma);
    let (b12, b21) = cross_blocks_projected(
        y1_a_x2.view(),
        y2_a_x1.view(),
        pi1.view(),
        ZERO,
        None,
        gamma2.view(),
        tol,
    )?;
    for (a, &r) in coherences.iter().enumerate() {
        for (c, &q) in populations.iter().enumerate() {
            if wanted[q] {
                b[(r, q)] = b12[(a, c)];
            }
            if wanted[r] {
                b[(q, r)] = b21[(c, a)];
            }
        }
    }

    Ok(MixingTensor {
        index,
        b,
        targets: target_flats,
    })
}

/// Factored first-order eigensystem of `A(p)`: eigenvalues `π + pπ′` and the
/// eigenbasis `X(p) ≈ X̃(I + pB)` with inverse `Y(p) ≈ (I − pB)X̃ᵀ`, where
/// `X̃` is the real orthogonal mode basis after the population rotation.
#[derive(Debug, Clone)]
pub struct PerturbedSpectrumApprox {
    pub index: PairIndex,
    pub p: f64,
    pub phis: Array2<f64>,
    pub gamma: Array2<f64>,
    pub b: Array2<C64>,
    pub eigenvalues: Array1<C64>,
    /// `p·‖B‖_F`, an upper bound on `‖pB‖₂`.
    pub pb_norm: f64,
    /// Raised when `p·‖B‖_F ≥ 1`, where the first-order expansion is doubtful.
    pub first_order_warning: bool,
}

pub fn assemble(
    spectrum: &LaplacianSpectrum,
    coobs: &CoObservation,
    mixing: MixingTensor,
    p: f64,
    tol: f64,
) -> Result<PerturbedSpectrumApprox> {
    if !(p >= 0.0) || !p.is_finite() {
        return Err(Error::InvalidInput(format!(
            "decoherence rate must be finite and ≥ 0, got {p}"
        )));
    }
    if !mixing.is_complete() {
        return Err(Error::InvalidInput(
            "assembly needs the full mixing tensor".into(),
        ));
    }
    let unperturbed = unperturbed_spectrum(spectrum);
    let derivative = eigenvalue_derivatives(spectrum, coobs, tol)?;
    let eigenvalues = Array1::from_shape_fn(unperturbed.index.len(), |q| {
        unperturbed.pi[q] + C64::new(p * derivative[q], 0.0)
    });
    let pb_norm = p * frobenius(mixing.b.view());
    let first_order_warning = pb_norm >= 1.0;
    if first_order_warning {
        log::warn!("p‖B‖_F = {pb_norm:.3}; first-order expansion is doubtful");
    }
    Ok(PerturbedSpectrumApprox {
        index: mixing.index,
        p,
        phis: spectrum.phis.clone(),
        gamma: coobs.gamma.clone(),
        b: mixing.b,
        eigenvalues,
        pb_norm,
        first_order_warning,
    })
}

/// Runs every step from a Laplacian spectrum to the assembled approximation.
pub fn approximate(
    spectrum: &LaplacianSpectrum,
    p: f64,
    tol: f64,
) -> Result<PerturbedSpectrumApprox> {
    require_unique_gaps(spectrum, tol)?;
    let coobs = co_observation(spectrum)?;
    let mixing = mixing_coefficients(spectrum, &coobs, None, tol)?;
    assemble(spectrum, &coobs, mixing, p, tol)
}

impl PerturbedSpectrumApprox {
    pub fn n(&self) -> usize {
        self.index.n()
    }

    pub fn eigenvalue(&self, j: usize, k: usize) -> C64 {
        self.eigenvalues[self.index.flat(j, k)]
    }

    /// `X̃ c`: mode coefficients to `vec(ρ)` via `Φ C Φᵀ`.
    pub fn modes_to_vec(&self, coeffs: &Array1<C64>) -> Result<Array1<C64>> {
        let n = self.n();
        let mut c = unvec(coeffs)?;
        let rotated: Array1<C64> = c.diag().to_owned();
        let populations = to_complex(&self.gamma).dot(&rotated);
        for j in 0..n {
            c[(j, j)] = populations[j];
        }
        let phi = to_complex(&self.phis);
        Ok(vec(&phi.dot(&c).dot(&phi.t())))
    }

    /// `X̃ᵀ v`: `vec(ρ)` to mode coefficients via `Φᵀ R Φ`.
    pub fn vec_to_modes(&self, v: &Array1<C64>) -> Result<Array1<C64>> {
        let n = self.n();
        let phi = to_complex(&self.phis);
        let mut c = phi.t().dot(&unvec(v)?).dot(&phi);
        let populations: Array1<C64> = c.diag().to_owned();
        let rotated = to_complex(&self.gamma).t().dot(&populations);
        for j in 0..n {
            c[(j, j)] = rotated[j];
        }
        Ok(vec(&c))
    }

    /// `X(p) c = X̃(I + pB)c`.
    pub fn apply_eigenbasis(&self, coeffs: &Array1<C64>) -> Result<Array1<C64>> {
        let stepped = coeffs + &self.b.dot(coeffs).mapv(|v| v * self.p);
        self.modes_to_vec(&stepped)
    }

    /// `Y(p) v ≈ (I − pB)X̃ᵀ v`.
    pub fn apply_inverse_eigenbasis(&self, v: &Array1<C64>) -> Result<Array1<C64>> {
        let c = self.vec_to_modes(v)?;
        Ok(&c - &self.b.dot(&c).mapv(|z| z * self.p))
    }

    /// Materialized column `q` of `X(p)`.
    pub fn eigenvector(&self, q: usize) -> Result<Array1<C64>> {
        let mut e = Array1::from_elem(self.index.len(), ZERO);
        e[q] = C64::new(1.0, 0.0);
        self.apply_eigenbasis(&e)
    }
}

/// Evolves `ρ0` through the approximate eigensystem and renormalizes the
/// trace at each time.
pub fn perturb_evolve(
    approx: &PerturbedSpectrumApprox,
    rho0: &DensityMatrix,
    times: &[f64],
) -> Result<EvolutionTrace> {
    check_times(times)?;
    if rho0.n() != approx.n() {
        return Err(Error::InvalidState(
            "state dimension does not match the graph".into(),
        ));
    }
    let c0 = approx.apply_inverse_eigenbasis(&vec(rho0.matrix()))?;
    let mut meta = TraceMeta {
        renormalized: true,
        first_order_warning: approx.first_order_warning,
        ..TraceMeta::default()
    };
    let mut node_probs = Vec::with_capacity(times.len());
    for &t in times {
        let ct = Array1::from_shape_fn(c0.len(), |q| c0[q] * (approx.eigenvalues[q] * t).exp());
        let v = approx.apply_eigenbasis(&ct)?;
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical(format!(
                "perturbative evolution overflowed at t = {t}, p = {}",
                approx.p
            )));
        }
        let rho = finish_state(unvec(&v)?, &mut meta);
        let trace: f64 = rho.diag().iter().map(|z| z.re).sum();
        if !(trace.abs() > f64::EPSILON) {
            return Err(Error::Numerical(format!("vanishing trace at t = {t}")));
        }
        node_probs.push(rho.diag().iter().map(|z| z.re / trace).collect());
    }
    log::debug!(
        "perturbative evolution: trace renormalization up to {:.3e}",
        meta.max_trace_deviation
    );
    Ok(EvolutionTrace {
        method: Method::Perturbative,
        times: times.to_vec(),
        node_probs,
        meta,
    })
}

/// Greedy nearest-neighbour pairing of two spectra of equal size: the
/// closest remaining pair is matched first. Returns `(i, j, |a_i − b_j|)`.
pub fn match_spectra(a: &[C64], b: &[C64]) -> Vec<(usize, usize, f64)> {
    let mut candidates: Vec<(f64, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            candidates.push(((x - y).norm(), i, j));
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    for (d, i, j) in candidates {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            out.push((i, j, d));
        }
    }
    out
}

pub fn max_matching_error(a: &[C64], b: &[C64]) -> f64 {
    match_spectra(a, b)
        .into_iter()
        .map(|(_, _, d)| d)
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub n: usize,
    pub p: f64,
    /// Largest eigenvalue distance after greedy matching.
    pub eig_err: f64,
    /// Sup-norm node-probability error over the time grid.
    pub evo_err: f64,
    /// Eigenvalue error at `p / 2`, used for the order estimate.
    pub eig_err_half: Option<f64>,
    /// `log₂(eig_err(p) / eig_err(p/2))`; absent at `p = 0` or when both
    /// errors sit at roundoff level.
    pub order_estimate: Option<f64>,
    pub max_trace_renormalization: f64,
}

fn eigen_error(spectrum: &LaplacianSpectrum, g: &Graph, p: f64, tol: f64) -> Result<f64> {
    let approx = approximate(spectrum, p, tol)?;
    let exact = build_superoperator(&build_laplacian(g), p)?.eigenvalues()?;
    Ok(max_matching_error(
        approx.eigenvalues.as_slice().unwrap(),
        exact.as_slice().unwrap(),
    ))
}

/// Compares the perturbative eigenvalues and evolution with the dense
/// super-operator for one graph.
pub fn validate_against_oracle(
    graph: &Graph,
    p: f64,
    times: &[f64],
    rho0: &DensityMatrix,
) -> Result<OracleReport> {
    let n = graph.n();
    if n > ORACLE_MAX_N {
        return Err(Error::TooLarge {
            n,
            limit: ORACLE_MAX_N,
            what: "the dense oracle",
        });
    }
    let laplacian = build_laplacian(graph);
    let spectrum = eigendecompose(&laplacian)?;
    let tol = spectrum.default_tolerance();
    require_unique_gaps(&spectrum, tol)?;

    let approx = approximate(&spectrum, p, tol)?;
    let s = build_superoperator(&laplacian, p)?;
    let exact_eigs = s.eigenvalues()?;
    let eig_err = max_matching_error(
        approx.eigenvalues.as_slice().unwrap(),
        exact_eigs.as_slice().unwrap(),
    );

    let perturbed = perturb_evolve(&approx, rho0, times)?;
    let exact = exact_evolve(&s, rho0, times)?;
    let evo_err = perturbed.max_abs_diff(&exact);

    let (eig_err_half, order_estimate) = if p > 0.0 {
        let half = eigen_error(&spectrum, graph, p / 2.0, tol)?;
        let order = if eig_err > 1e-13 && half > 1e-13 {
            Some((eig_err / half).log2())
        } else {
            None
        };
        (Some(half), order)
    } else {
        (None, None)
    };

    Ok(OracleReport {
        n,
        p,
        eig_err,
        evo_err,
        eig_err_half,
        order_estimate,
        max_trace_renormalization: perturbed.meta.max_trace_deviation,
    })
}
