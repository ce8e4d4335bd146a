//! First-order perturbation of the eigensystem of a diagonalizable matrix
//! family `A(t) ≈ A + tA′ (+ t²A″/2)`.
//!
//! Eigenvectors move as `X(t) ≈ X + tXB` and left eigenvectors as
//! `Y(t) ≈ Y + tCY` with `C = −B`. Repeated eigenvalues are handled by a
//! block-diagonal rotation `Γ` of the observed eigenbasis onto the basis that
//! is continuous in `t`; all of `B` is then expressed relative to `XΓ`.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use ndarray_linalg::{Eig, Inverse};

use crate::error::{Error, Result};
use crate::linalg::{
    condition_number, dagger, eigh_hermitian, fix_phase, frobenius, hermiticity_defect, C64, ZERO,
};

/// Eigenbases worse conditioned than this are treated as defective.
pub const MAX_CONDITION: f64 = 1e12;

/// A matrix `A` with its eigendecomposition and perturbation directions.
#[derive(Debug, Clone)]
pub struct DiagonalizableSystem {
    pub a: Array2<C64>,
    pub a_prime: Array2<C64>,
    /// Second derivative; `None` is the linear case `A″ = 0`.
    pub a_double_prime: Option<Array2<C64>>,
    /// Right eigenvectors as unit-norm columns.
    pub x: Array2<C64>,
    /// Left eigenvectors as rows, `Y = X⁻¹`.
    pub y: Array2<C64>,
    pub lambda: Array1<C64>,
    unitary: bool,
}

fn check_square(name: &str, m: &Array2<C64>, n: usize) -> Result<()> {
    if m.dim() != (n, n) {
        return Err(Error::InvalidInput(format!(
            "{name} has shape {:?}, expected ({n}, {n})",
            m.dim()
        )));
    }
    Ok(())
}

fn sort_order(lambda: &Array1<C64>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..lambda.len()).collect();
    order.sort_by(|&i, &j| {
        lambda[i]
            .re
            .total_cmp(&lambda[j].re)
            .then(lambda[i].im.total_cmp(&lambda[j].im))
    });
    order
}

impl DiagonalizableSystem {
    /// Decomposes a general complex `A` and sets `Y = X⁻¹`.
    pub fn new(
        a: Array2<C64>,
        a_prime: Array2<C64>,
        a_double_prime: Option<Array2<C64>>,
    ) -> Result<Self> {
        let (lambda, x) = a.eig()?;
        Self::from_eigenpairs(a, a_prime, a_double_prime, x, lambda)
    }

    /// Decomposes a Hermitian `A`; the eigenbasis is unitary and `Y = X†`.
    pub fn hermitian(
        a: Array2<C64>,
        a_prime: Array2<C64>,
        a_double_prime: Option<Array2<C64>>,
    ) -> Result<Self> {
        let n = a.nrows();
        check_square("A", &a, n)?;
        let scale = frobenius(a.view()).max(1.0);
        let defect = hermiticity_defect(a.view());
        if defect > 1e-12 * scale {
            return Err(Error::InvalidInput(format!(
                "A is not Hermitian (defect {defect:.3e})"
            )));
        }
        let (vals, mut x) = eigh_hermitian(&a)?;
        for col in x.axis_iter_mut(Axis(1)) {
            fix_phase(col);
        }
        check_square("A′", &a_prime, n)?;
        if let Some(add) = &a_double_prime {
            check_square("A″", add, n)?;
        }
        let y = dagger(&x);
        let lambda = vals.mapv(|v| C64::new(v, 0.0));
        Ok(Self {
            a,
            a_prime,
            a_double_prime,
            x,
            y,
            lambda,
            unitary: true,
        })
    }

    /// Uses a known eigendecomposition. Columns of `x` are sorted by
    /// eigenvalue, normalized and phase-fixed; `Y` is the exact inverse.
    pub fn from_eigenpairs(
        a: Array2<C64>,
        a_prime: Array2<C64>,
        a_double_prime: Option<Array2<C64>>,
        x: Array2<C64>,
        lambda: Array1<C64>,
    ) -> Result<Self> {
        let n = a.nrows();
        check_square("A", &a, n)?;
        check_square("A′", &a_prime, n)?;
        check_square("X", &x, n)?;
        if let Some(add) = &a_double_prime {
            check_square("A″", add, n)?;
        }
        if lambda.len() != n {
            return Err(Error::InvalidInput(
                "eigenvalue count does not match A".into(),
            ));
        }
        let order = sort_order(&lambda);
        let lambda = Array1::from_shape_fn(n, |i| lambda[order[i]]);
        let mut x = x.select(Axis(1), &order);
        for mut col in x.axis_iter_mut(Axis(1)) {
            let norm = col.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::InvalidInput("zero eigenvector column".into()));
            }
            col.mapv_inplace(|v| v / norm);
            fix_phase(col);
        }
        let condition = condition_number(&x)?;
        if !(condition < MAX_CONDITION) {
            return Err(Error::NotSupported(format!(
                "eigenvector matrix has condition {condition:.3e}; A is not diagonalizable"
            )));
        }
        let y = x.inv()?;
        Ok(Self {
            a,
            a_prime,
            a_double_prime,
            x,
            y,
            lambda,
            unitary: false,
        })
    }

    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    /// True when built through [`DiagonalizableSystem::hermitian`].
    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    /// `1e−9·(diameter of the spectrum + 1)`.
    pub fn default_tolerance(&self) -> f64 {
        let mut diameter: f64 = 0.0;
        for a in self.lambda.iter() {
            for b in self.lambda.iter() {
                diameter = diameter.max((a - b).norm());
            }
        }
        1e-9 * (diameter + 1.0)
    }

    /// Single-linkage clusters of eigenvalues at distance `≤ tol`, each
    /// sorted, ordered by first index.
    pub fn clusters(&self, tol: f64) -> Vec<Vec<usize>> {
        single_linkage(self.lambda.view(), tol)
    }

    /// `(‖AX − XΛ‖_F, ‖YX − I‖_F, max |diag(X†X) − 1|)`.
    pub fn residuals(&self) -> (f64, f64, f64) {
        let n = self.n();
        let xl = &self.x * &self.lambda.view().insert_axis(Axis(0));
        let eig = frobenius((self.a.dot(&self.x) - xl).view());
        let inv = frobenius((self.y.dot(&self.x) - Array2::<C64>::eye(n)).view());
        let gram = dagger(&self.x).dot(&self.x);
        let norm = gram
            .diag()
            .iter()
            .map(|g| (g - 1.0).norm())
            .fold(0.0, f64::max);
        (eig, inv, norm)
    }

    fn complement(&self, block: &[usize]) -> Vec<usize> {
        (0..self.n()).filter(|i| !block.contains(i)).collect()
    }
}

pub(crate) fn single_linkage(values: ArrayView1<C64>, tol: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

/// One repeated eigenvalue `λ̄` and the split of its derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct DegenerateBlock {
    pub indices: Vec<usize>,
    pub lambda_bar: C64,
    pub lambda_prime: Array1<C64>,
}

#[derive(Debug, Clone)]
pub struct PerturbationResult {
    pub lambda_prime: Array1<C64>,
    /// `X′ = (XΓ) B`.
    pub b: Array2<C64>,
    /// `Y′ = C (Γ⁻¹Y)`, always `−B`.
    pub c: Array2<C64>,
    /// Block-diagonal rotation, identity on simple eigenvalues.
    pub gamma: Array2<C64>,
    pub blocks: Vec<DegenerateBlock>,
}

impl PerturbationResult {
    /// `XΓ`, the eigenbasis that is continuous in `t`.
    pub fn continuous_basis(&self, sys: &DiagonalizableSystem) -> Array2<C64> {
        sys.x.dot(&self.gamma)
    }

    /// `Λ + tΛ′`.
    pub fn eigenvalues_at(&self, sys: &DiagonalizableSystem, t: f64) -> Array1<C64> {
        &sys.lambda + &self.lambda_prime.mapv(|v| v * t)
    }

    /// `XΓ(I + tB)`.
    pub fn eigenvectors_at(&self, sys: &DiagonalizableSystem, t: f64) -> Array2<C64> {
        let n = sys.n();
        let step = Array2::<C64>::eye(n) + self.b.mapv(|v| v * t);
        self.continuous_basis(sys).dot(&step)
    }
}

fn ensure_simple(sys: &DiagonalizableSystem, tol: f64) -> Result<()> {
    if let Some(cluster) = sys.clusters(tol).into_iter().find(|c| c.len() > 1) {
        return Err(Error::Degenerate(format!(
            "eigenvalue {} repeated at indices {cluster:?}",
            sys.lambda[cluster[0]]
        )));
    }
    Ok(())
}

/// `λ′_i = y_i A′ x_i` for a system with pairwise distinct eigenvalues.
pub fn eigenvalue_derivatives_distinct(
    sys: &DiagonalizableSystem,
    tol: f64,
) -> Result<Array1<C64>> {
    ensure_simple(sys, tol)?;
    let projected = sys.y.dot(&sys.a_prime).dot(&sys.x);
    Ok(projected.diag().to_owned())
}

/// Fills `b_ii` from the unit-norm constraint on the columns of the
/// continuous basis: `Re b_ii = −Σ_{k≠i} Re(G_ik b_ki)`, `Im b_ii = 0`.
fn fill_normalization_diagonal(gram: ArrayView2<C64>, b: &mut Array2<C64>) {
    let n = b.nrows();
    for i in 0..n {
        let re: f64 = (0..n)
            .filter(|&k| k != i)
            .map(|k| (gram[(i, k)] * b[(k, i)]).re)
            .sum();
        b[(i, i)] = C64::new(-re, 0.0);
    }
}

/// `b_ij = y_i A′ x_j / (λ_j − λ_i)` off the diagonal, normalization
/// constraint on it.
pub fn mixing_matrix_distinct(sys: &DiagonalizableSystem, tol: f64) -> Result<Array2<C64>> {
    ensure_simple(sys, tol)?;
    let n = sys.n();
    let projected = sys.y.dot(&sys.a_prime).dot(&sys.x);
    let mut b = Array2::from_shape_fn((n, n), |(i, j)| {
        if i == j {
            ZERO
        } else {
            projected[(i, j)] / (sys.lambda[j] - sys.lambda[i])
        }
    });
    if !sys.unitary {
        let gram = dagger(&sys.x).dot(&sys.x);
        fill_normalization_diagonal(gram.view(), &mut b);
    }
    Ok(b)
}

/// Solves `Y₂A′X₂Γ₂ = Γ₂Λ₂′` on the indices of one repeated eigenvalue.
///
/// `Λ₂′` is returned sorted by real then imaginary part. Each column of `Γ₂`
/// is scaled so `X₂Γ₂` has unit-norm columns, and its phase is fixed so the
/// largest entry is real and positive.
pub fn repeated_block_solve(
    sys: &DiagonalizableSystem,
    block: &[usize],
    tol: f64,
) -> Result<(Array2<C64>, Array1<C64>)> {
    if block.is_empty() {
        return Err(Error::InvalidInput("empty degenerate block".into()));
    }
    let r = block.len();
    for &i in block {
        for &j in block {
            if (sys.lambda[i] - sys.lambda[j]).norm() > tol * r as f64 {
                return Err(Error::InvalidInput(format!(
                    "indices {i} and {j} do not share an eigenvalue"
                )));
            }
        }
    }
    let y2 = sys.y.select(Axis(0), block);
    let x2 = sys.x.select(Axis(1), block);
    let k = y2.dot(&sys.a_prime).dot(&x2);

    let k_scale = frobenius(k.view()).max(1.0);
    let (vals, vecs) = if sys.unitary && hermiticity_defect(k.view()) <= 1e-12 * k_scale {
        let (v, w) = eigh_hermitian(&k)?;
        (v.mapv(|x| C64::new(x, 0.0)), w)
    } else {
        k.eig()?
    };
    let order = sort_order(&vals);
    let lambda_prime = Array1::from_shape_fn(r, |i| vals[order[i]]);
    let mut gamma = vecs.select(Axis(1), &order);

    let split_tol = tol.max(1e-9 * k_scale);
    for a in 0..r {
        for b in a + 1..r {
            if (lambda_prime[a] - lambda_prime[b]).norm() <= split_tol {
                return Err(Error::UnresolvedDegeneracy(format!(
                    "the derivative of repeated eigenvalue {} is itself repeated ({}); \
                     resolving it needs higher-order terms",
                    sys.lambda[block[0]], lambda_prime[a]
                )));
            }
        }
    }

    for (mut col, xcol) in gamma
        .axis_iter_mut(Axis(1))
        .zip(x2.dot(&vecs.select(Axis(1), &order)).axis_iter(Axis(1)))
    {
        let norm = xcol.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        col.mapv_inplace(|v| v / norm);
        fix_phase(col);
    }
    Ok((gamma, lambda_prime))
}

/// Couplings between one degenerate block (index set 2, eigenvalue `λ̄`) and
/// the rest (set 1) in projected form:
///
/// `B₁₂ = (λ̄I − Λ₁)⁻¹ Γ₁⁻¹ (Y₁A′X₂) Γ₂` and
/// `B₂₁ = −Γ₂⁻¹ (Y₂A′X₁) Γ₁ (λ̄I − Λ₁)⁻¹`.
///
/// `gamma1 = None` means `Γ₁ = I`.
pub fn cross_blocks_projected(
    y1_a_x2: ArrayView2<C64>,
    y2_a_x1: ArrayView2<C64>,
    lambda1: ArrayView1<C64>,
    lambda_bar: C64,
    gamma1: Option<ArrayView2<C64>>,
    gamma2: ArrayView2<C64>,
    tol: f64,
) -> Result<(Array2<C64>, Array2<C64>)> {
    let m = lambda1.len();
    let r = gamma2.nrows();
    if y1_a_x2.dim() != (m, r) || y2_a_x1.dim() != (r, m) {
        return Err(Error::InvalidInput(
            "coupling blocks have inconsistent shapes".into(),
        ));
    }
    let shift: Vec<C64> = lambda1.iter().map(|l| lambda_bar - l).collect();
    if let Some(pos) = shift.iter().position(|d| d.norm() <= tol) {
        return Err(Error::Degenerate(format!(
            "eigenvalue {} of the complement coincides with the block value {lambda_bar}",
            lambda1[pos]
        )));
    }
    let singular = |_| Error::Numerical("singular Γ block".into());
    let gamma2_inv = gamma2.to_owned().inv().map_err(singular)?;

    let mut b12 = y1_a_x2.dot(&gamma2);
    let mut b21 = gamma2_inv.dot(&y2_a_x1);
    if let Some(g1) = gamma1 {
        let g1_inv = g1.to_owned().inv().map_err(singular)?;
        b12 = g1_inv.dot(&b12);
        b21 = b21.dot(&g1);
    }
    for (mut row, d) in b12.axis_iter_mut(Axis(0)).zip(&shift) {
        row.mapv_inplace(|v| v / d);
    }
    for (mut col, d) in b21.axis_iter_mut(Axis(1)).zip(&shift) {
        col.mapv_inplace(|v| -v / d);
    }
    Ok((b12, b21))
}

/// [`cross_blocks_projected`] with the projections taken from `sys`.
///
/// `gamma1` acts on the complement of `block` (in increasing index order).
pub fn cross_blocks(
    sys: &DiagonalizableSystem,
    gamma1: &Array2<C64>,
    gamma2: &Array2<C64>,
    block: &[usize],
    tol: f64,
) -> Result<(Array2<C64>, Array2<C64>)> {
    let rest = sys.complement(block);
    let y1_a = sys.y.select(Axis(0), &rest).dot(&sys.a_prime);
    let y2_a = sys.y.select(Axis(0), block).dot(&sys.a_prime);
    let y1_a_x2 = y1_a.dot(&sys.x.select(Axis(1), block));
    let y2_a_x1 = y2_a.dot(&sys.x.select(Axis(1), &rest));
    let lambda1 = sys.lambda.select(Axis(0), &rest);
    let lambda_bar = block.iter().map(|&i| sys.lambda[i]).sum::<C64>() / block.len() as f64;
    cross_blocks_projected(
        y1_a_x2.view(),
        y2_a_x1.view(),
        lambda1.view(),
        lambda_bar,
        Some(gamma1.view()),
        gamma2.view(),
        tol,
    )
}

/// Off-diagonal intra-block mixing in projected form.
///
/// Differentiating the eigen-equation twice and keeping the degenerate block
/// gives
/// `2(B₂₂Λ₂′ − Λ₂′B₂₂) = Γ₂⁻¹Y₂A″X₂Γ₂ + 2 M₂₁B₁₂ − Λ₂″`
/// with `M₂₁ = Γ₂⁻¹Y₂A′X₁Γ₁`, hence
/// `(B₂₂)_ij = [(Γ₂⁻¹Y₂A″X₂Γ₂)_ij + 2(M₂₁B₁₂)_ij] / (2(λ′_j − λ′_i))`.
/// The returned diagonal is zero; see [`second_order_block`] for the
/// normalized one.
pub fn second_order_block_projected(
    a_double_prime_rot: Option<ArrayView2<C64>>,
    m21_rot: ArrayView2<C64>,
    b12: ArrayView2<C64>,
    lambda_prime2: ArrayView1<C64>,
    tol: f64,
) -> Result<Array2<C64>> {
    let r = lambda_prime2.len();
    let mut numer = m21_rot.dot(&b12).mapv(|v| v * 2.0);
    if let Some(h) = a_double_prime_rot {
        numer = numer + h;
    }
    let mut b22 = Array2::zeros((r, r));
    for i in 0..r {
        for j in 0..r {
            if i == j {
                continue;
            }
            let split = lambda_prime2[j] - lambda_prime2[i];
            if split.norm() <= tol {
                return Err(Error::UnresolvedDegeneracy(format!(
                    "repeated first-order split {} inside a degenerate block",
                    lambda_prime2[i]
                )));
            }
            b22[(i, j)] = numer[(i, j)] / (split * 2.0);
        }
    }
    Ok(b22)
}

fn block_inverse(gamma: &Array2<C64>, blocks: &[Vec<usize>], unitary: bool) -> Result<Array2<C64>> {
    let mut inv = Array2::<C64>::eye(gamma.nrows());
    for block in blocks {
        let g = gamma.select(Axis(0), block).select(Axis(1), block);
        let gi = if unitary { dagger(&g) } else { g.inv()? };
        for (a, &i) in block.iter().enumerate() {
            for (b, &j) in block.iter().enumerate() {
                inv[(i, j)] = gi[(a, b)];
            }
        }
    }
    Ok(inv)
}

/// `B₂₂` for one degenerate block: off-diagonal from
/// [`second_order_block_projected`], diagonal from the unit-norm constraint
/// on the rotated columns.
///
/// `gamma` is the full block-diagonal rotation and `b12` the couplings of the
/// complement into the block (rows in increasing complement order).
pub fn second_order_block(
    sys: &DiagonalizableSystem,
    gamma: &Array2<C64>,
    block: &[usize],
    lambda_prime2: &Array1<C64>,
    b12: &Array2<C64>,
    tol: f64,
) -> Result<Array2<C64>> {
    let rest = sys.complement(block);
    let blocks: Vec<Vec<usize>> = sys
        .clusters(tol)
        .into_iter()
        .filter(|c| c.len() > 1)
        .collect();
    let gamma_inv = block_inverse(gamma, &blocks, false)?;
    let x_rot = sys.x.dot(gamma);
    let y_rot = gamma_inv.dot(&sys.y);
    let y2 = y_rot.select(Axis(0), block);
    let m21 = y2.dot(&sys.a_prime).dot(&x_rot.select(Axis(1), &rest));
    let h = sys
        .a_double_prime
        .as_ref()
        .map(|add| y2.dot(add).dot(&x_rot.select(Axis(1), block)));
    let mut b22 = second_order_block_projected(
        h.as_ref().map(|h| h.view()),
        m21.view(),
        b12.view(),
        lambda_prime2.view(),
        tol,
    )?;

    let gram = dagger(&x_rot).dot(&x_rot);
    for (a, &i) in block.iter().enumerate() {
        let mut re = 0.0;
        for (c, &k) in rest.iter().enumerate() {
            re += (gram[(i, k)] * b12[(c, a)]).re;
        }
        for (c, &k) in block.iter().enumerate() {
            if k != i {
                re += (gram[(i, k)] * b22[(c, a)]).re;
            }
        }
        b22[(a, a)] = C64::new(-re, 0.0);
    }
    Ok(b22)
}

/// Full first-order result, handling any number of degenerate blocks whose
/// first-order splits are distinct.
pub fn perturb(sys: &DiagonalizableSystem, tol: f64) -> Result<PerturbationResult> {
    let n = sys.n();
    let clusters = sys.clusters(tol);
    let mut cluster_of = vec![0usize; n];
    for (c, members) in clusters.iter().enumerate() {
        for &i in members {
            cluster_of[i] = c;
        }
    }

    let mut gamma = Array2::<C64>::eye(n);
    let mut blocks = Vec::new();
    let mut unitary_rotation = sys.unitary;
    let degenerate: Vec<Vec<usize>> = clusters.iter().filter(|c| c.len() > 1).cloned().collect();
    for block in &degenerate {
        let (g2, lp2) = repeated_block_solve(sys, block, tol)?;
        let gram = dagger(&g2).dot(&g2);
        if frobenius((gram - Array2::<C64>::eye(block.len())).view()) > 1e-10 {
            unitary_rotation = false;
        }
        for (a, &i) in block.iter().enumerate() {
            for (b, &j) in block.iter().enumerate() {
                gamma[(i, j)] = g2[(a, b)];
            }
        }
        let lambda_bar = block.iter().map(|&i| sys.lambda[i]).sum::<C64>() / block.len() as f64;
        blocks.push(DegenerateBlock {
            indices: block.clone(),
            lambda_bar,
            lambda_prime: lp2,
        });
    }

    let gamma_inv = block_inverse(&gamma, &degenerate, unitary_rotation)?;
    let x_rot = sys.x.dot(&gamma);
    let y_rot = if unitary_rotation {
        dagger(&x_rot)
    } else {
        gamma_inv.dot(&sys.y)
    };
    let projected = y_rot.dot(&sys.a_prime).dot(&x_rot);

    let mut lambda_prime = projected.diag().to_owned();
    for block in &blocks {
        for (a, &i) in block.indices.iter().enumerate() {
            lambda_prime[i] = block.lambda_prime[a];
        }
    }

    let mut b = Array2::from_shape_fn((n, n), |(i, j)| {
        if cluster_of[i] == cluster_of[j] {
            ZERO
        } else {
            projected[(i, j)] / (sys.lambda[j] - sys.lambda[i])
        }
    });

    let add_rot = sys
        .a_double_prime
        .as_ref()
        .map(|add| y_rot.dot(add).dot(&x_rot));
    for block in &blocks {
        let rest: Vec<usize> = (0..n).filter(|i| !block.indices.contains(i)).collect();
        let m21 = projected
            .select(Axis(0), &block.indices)
            .select(Axis(1), &rest);
        let b12 = b.select(Axis(0), &rest).select(Axis(1), &block.indices);
        let h = add_rot.as_ref().map(|h| {
            h.select(Axis(0), &block.indices)
                .select(Axis(1), &block.indices)
        });
        let b22 = second_order_block_projected(
            h.as_ref().map(|h| h.view()),
            m21.view(),
            b12.view(),
            block.lambda_prime.view(),
            tol,
        )?;
        for (a, &i) in block.indices.iter().enumerate() {
            for (c, &j) in block.indices.iter().enumerate() {
                b[(i, j)] = b22[(a, c)];
            }
        }
    }

    if !unitary_rotation {
        let gram = dagger(&x_rot).dot(&x_rot);
        fill_normalization_diagonal(gram.view(), &mut b);
    }
    let c = b.mapv(|v| -v);
    Ok(PerturbationResult {
        lambda_prime,
        b,
        c,
        gamma,
        blocks,
    })
}

/// The Hermitian shortcut: unitary `X`, `Y = X†`, `b_ii = 0`.
///
/// A system built with the general solver is re-decomposed with the
/// Hermitian one first.
pub fn hermitian_specialize(sys: &DiagonalizableSystem, tol: f64) -> Result<PerturbationResult> {
    let rebuilt;
    let sys = if sys.unitary {
        sys
    } else {
        rebuilt = DiagonalizableSystem::hermitian(
            sys.a.clone(),
            sys.a_prime.clone(),
            sys.a_double_prime.clone(),
        )?;
        &rebuilt
    };
    perturb(sys, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, s};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn real(m: Array2<f64>) -> Array2<C64> {
        m.mapv(c)
    }

    #[test]
    fn diagonal_examples() {
        let a = real(array![[1.0, 0.0], [0.0, 2.0]]);
        let sys = DiagonalizableSystem::new(a.clone(), real(array![[3.0, 0.0], [0.0, 5.0]]), None)
            .unwrap();
        let lp = eigenvalue_derivatives_distinct(&sys, 1e-9).unwrap();
        assert!((lp[0] - c(3.0)).norm() < 1e-14 && (lp[1] - c(5.0)).norm() < 1e-14);

        let sys = DiagonalizableSystem::new(a, real(array![[0.0, 1.0], [1.0, 0.0]]), None).unwrap();
        let lp = eigenvalue_derivatives_distinct(&sys, 1e-9).unwrap();
        assert!(lp.iter().all(|v| v.norm() < 1e-14));
        let b = mixing_matrix_distinct(&sys, 1e-9).unwrap();
        let expect = real(array![[0.0, 1.0], [-1.0, 0.0]]);
        assert!(frobenius((b - expect).view()) < 1e-14);
    }

    #[test]
    fn distinct_paths_refuse_degeneracy() {
        let sys =
            DiagonalizableSystem::new(Array2::eye(2), real(array![[0.0, 1.0], [1.0, 0.0]]), None)
                .unwrap();
        assert!(matches!(
            eigenvalue_derivatives_distinct(&sys, 1e-9),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            mixing_matrix_distinct(&sys, 1e-9),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn repeated_block_examples() {
        let sys = DiagonalizableSystem::hermitian(
            Array2::zeros((2, 2)),
            real(array![[0.0, 1.0], [1.0, 0.0]]),
            None,
        )
        .unwrap();
        let (g, lp) = repeated_block_solve(&sys, &[0, 1], 1e-9).unwrap();
        assert!((lp[0] - c(-1.0)).norm() < 1e-14 && (lp[1] - c(1.0)).norm() < 1e-14);
        let r = 0.5f64.sqrt();
        let xg = sys.x.dot(&g);
        let expect = real(array![[r, r], [-r, r]]);
        assert!(
            frobenius((xg - expect).view()) < 1e-14,
            "{:?}",
            sys.x.dot(&g)
        );

        let sys = DiagonalizableSystem::new(
            Array2::eye(3),
            real(array![[1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 3.0]]),
            None,
        )
        .unwrap();
        let (g, lp) = repeated_block_solve(&sys, &[0, 1, 2], 1e-9).unwrap();
        for (i, want) in [1.0, 2.0, 3.0].into_iter().enumerate() {
            assert!((lp[i] - c(want)).norm() < 1e-14);
        }
        assert!(frobenius((sys.x.dot(&g) - Array2::<C64>::eye(3)).view()) < 1e-14);
    }

    #[test]
    fn repeated_split_is_rejected() {
        let sys = DiagonalizableSystem::new(Array2::eye(3), Array2::eye(3), None).unwrap();
        assert!(matches!(
            repeated_block_solve(&sys, &[0, 1, 2], 1e-9),
            Err(Error::UnresolvedDegeneracy(_))
        ));
        assert!(matches!(
            perturb(&sys, 1e-9),
            Err(Error::UnresolvedDegeneracy(_))
        ));
        let sys =
            DiagonalizableSystem::new(real(array![[1.0, 0.0], [0.0, 2.0]]), Array2::eye(2), None)
                .unwrap();
        assert!(repeated_block_solve(&sys, &[0, 1], 1e-9).is_err());
    }

    #[test]
    fn block_diagonal_perturbation_has_no_cross_coupling() {
        let a = real(array![[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
        let ap = real(array![[1.0, 2.0, 0.0], [2.0, -1.0, 0.0], [0.0, 0.0, 4.0]]);
        let sys = DiagonalizableSystem::new(a, ap, None).unwrap();
        let (g2, _) = repeated_block_solve(&sys, &[0, 1], 1e-9).unwrap();
        let (b12, b21) = cross_blocks(&sys, &Array2::eye(1), &g2, &[0, 1], 1e-9).unwrap();
        assert!(b12.iter().chain(b21.iter()).all(|v| v.norm() < 1e-15));
    }

    #[test]
    fn linear_family_without_coupling_has_zero_intra_block_mixing() {
        let a = real(array![[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
        let ap = real(array![[1.0, 2.0, 0.0], [2.0, -1.0, 0.0], [0.0, 0.0, 4.0]]);
        let sys = DiagonalizableSystem::hermitian(a, ap, None).unwrap();
        let res = perturb(&sys, 1e-9).unwrap();
        let b22 = res.b.slice(s![0..2, 0..2]).to_owned();
        assert!(b22.iter().all(|v| v.norm() < 1e-15));
    }

    #[test]
    fn unitary_rotation_zero_block_diagonal() {
        let a = real(array![[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
        let ap = Array2::from_elem((3, 3), c(1.0));
        let sys = DiagonalizableSystem::hermitian(a.clone(), ap.clone(), None).unwrap();
        let res = perturb(&sys, 1e-9).unwrap();
        for i in 0..3 {
            assert_eq!(res.b[(i, i)], ZERO);
        }
        let (g2, lp2) = repeated_block_solve(&sys, &[0, 1], 1e-9).unwrap();
        let (b12, _) = cross_blocks(&sys, &Array2::eye(1), &g2, &[0, 1], 1e-9).unwrap();
        let b22 = second_order_block(&sys, &res.gamma, &[0, 1], &lp2, &b12, 1e-9).unwrap();
        assert!(b22.diag().iter().all(|v| v.norm() < 1e-14));
        assert!(frobenius((b22 - res.b.slice(s![0..2, 0..2])).view()) < 1e-14);
    }

    #[test]
    fn c_is_minus_b_and_diagonal_phase_is_real() {
        let a = array![
            [c(1.0), C64::new(0.3, 0.2), c(0.0)],
            [C64::new(0.0, -0.4), c(2.5), c(0.7)],
            [c(0.2), c(0.0), C64::new(-1.0, 0.5)]
        ];
        let ap = array![
            [C64::new(0.1, 0.3), c(1.0), c(-0.2)],
            [c(0.4), C64::new(0.0, 1.0), c(0.3)],
            [c(0.9), c(0.1), c(0.5)]
        ];
        let sys = DiagonalizableSystem::new(a, ap, None).unwrap();
        let res = perturb(&sys, sys.default_tolerance()).unwrap();
        assert_eq!(res.c, res.b.mapv(|v| -v));
        assert!(res.b.diag().iter().all(|v| v.im == 0.0));
        let (e, i, nrm) = sys.residuals();
        assert!(e < 1e-12 && i < 1e-12 && nrm < 1e-14);
    }

    #[test]
    fn real_symmetric_gives_real_antisymmetric_mixing() {
        let sys = DiagonalizableSystem::hermitian(
            real(array![[1.0, 0.0], [0.0, 2.0]]),
            real(array![[0.5, -0.7], [-0.7, 2.0]]),
            None,
        )
        .unwrap();
        let res = hermitian_specialize(&sys, 1e-9).unwrap();
        assert!(res.b.iter().all(|v| v.im == 0.0));
        assert!((res.b[(0, 1)] + res.b[(1, 0)]).norm() < 1e-15);
        assert_eq!(res.b[(0, 0)], ZERO);
    }

    #[test]
    fn hermitian_requires_hermitian_input() {
        let a = real(array![[1.0, 2.0], [0.0, 1.0]]);
        assert!(DiagonalizableSystem::hermitian(a, Array2::eye(2), None).is_err());
    }

    #[test]
    fn defective_matrix_is_not_supported() {
        // Jordan block: eig returns (numerically) parallel eigenvectors
        let a = real(array![[1.0, 1.0], [0.0, 1.0]]);
        let r = DiagonalizableSystem::new(a, Array2::eye(2), None);
        assert!(matches!(r, Err(Error::NotSupported(_))));
    }
}
