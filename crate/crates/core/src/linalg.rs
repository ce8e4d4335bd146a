//! Small dense helpers shared by the exact and perturbative paths.

use ndarray::{Array1, Array2, ArrayView2, ArrayViewMut1, Axis, ShapeBuilder};
use ndarray_linalg::{Eigh, Inverse, SVD, UPLO};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Relative slack used when deciding that two entries have the same magnitude
/// for the sign/phase convention.
const TIE_SLACK: f64 = 1e-12;

fn pivot_index<I: Iterator<Item = f64> + Clone>(mags: I) -> Option<usize> {
    let max = mags.clone().fold(0.0_f64, f64::max);
    if max == 0.0 {
        return None;
    }
    mags.enumerate()
        .find(|(_, m)| *m >= max * (1.0 - TIE_SLACK))
        .map(|(i, _)| i)
}

/// Flips a real column so that its entry of largest magnitude (lowest index
/// on ties) is positive.
pub fn fix_sign(mut col: ArrayViewMut1<f64>) {
    if let Some(i) = pivot_index(col.iter().map(|v| v.abs())) {
        if col[i] < 0.0 {
            col.mapv_inplace(|v| -v);
        }
    }
}

/// Complex analogue of [`fix_sign`]: rotates the global phase so the pivot
/// entry is real and positive.
pub fn fix_phase(mut col: ArrayViewMut1<C64>) {
    if let Some(i) = pivot_index(col.iter().map(|v| v.norm())) {
        let pivot = col[i];
        let phase = pivot.conj() / pivot.norm();
        col.mapv_inplace(|v| v * phase);
        col[i] = C64::new(col[i].re, 0.0);
    }
}

pub fn to_complex(a: &Array2<f64>) -> Array2<C64> {
    a.mapv(|v| C64::new(v, 0.0))
}

pub fn dagger(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|v| v.conj())
}

pub fn frobenius(a: ArrayView2<C64>) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frobenius_real(a: ArrayView2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn norm2(v: &Array1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Induced 1-norm (maximum absolute column sum).
pub fn norm1(a: ArrayView2<C64>) -> f64 {
    a.axis_iter(Axis(1))
        .map(|c| c.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `‖A − A†‖_F`.
pub fn hermiticity_defect(a: ArrayView2<C64>) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (a[(i, j)] - a[(j, i)].conj()).norm_sqr();
        }
    }
    acc.sqrt()
}

pub fn hermitian_part(a: &Array2<C64>) -> Array2<C64> {
    (a + &dagger(a)).mapv(|v| v * 0.5)
}

/// Eigendecomposition of a complex Hermitian matrix, eigenvalues ascending.
///
/// `Eigh` on a row-major complex array hands LAPACK the conjugate and
/// returns conjugated eigenvectors, so the input is copied to column-major
/// order first.
pub fn eigh_hermitian(a: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let mut f = Array2::<C64>::zeros(a.raw_dim().f());
    f.assign(a);
    Ok(f.eigh(UPLO::Lower)?)
}

pub fn kron<T>(a: &Array2<T>, b: &Array2<T>) -> Array2<T>
where
    T: Copy + std::ops::Mul<Output = T>,
{
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    Array2::from_shape_fn((ar * br, ac * bc), |(i, j)| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// Spectral condition number `σ_max / σ_min`; infinite for singular input.
pub fn condition_number(a: &Array2<C64>) -> Result<f64> {
    let (_, sigma, _) = a.svd(false, false)?;
    let max = sigma.iter().cloned().fold(0.0, f64::max);
    let min = sigma.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(if min == 0.0 { f64::INFINITY } else { max / min })
}

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
// Backward-error bounds for each Padé degree in double precision.
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA13: f64 = 5.371920351148152;

fn scaled(a: &Array2<C64>, s: f64) -> Array2<C64> {
    a.mapv(|v| v * s)
}

fn pade_low(a: &Array2<C64>, coeffs: &[f64]) -> (Array2<C64>, Array2<C64>) {
    let n = a.nrows();
    let a2 = a.dot(a);
    let mut power = Array2::<C64>::eye(n);
    let mut u_inner = Array2::<C64>::zeros((n, n));
    let mut v = Array2::<C64>::zeros((n, n));
    for (k, &b) in coeffs.iter().enumerate() {
        if k % 2 == 0 {
            v = v + scaled(&power, b);
        } else {
            u_inner = u_inner + scaled(&power, b);
            power = power.dot(&a2);
        }
    }
    (a.dot(&u_inner), v)
}

fn pade13(a: &Array2<C64>) -> (Array2<C64>, Array2<C64>) {
    let b = &PADE13;
    let n = a.nrows();
    let id = Array2::<C64>::eye(n);
    let a2 = a.dot(a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let inner_u = scaled(&a6, b[13]) + scaled(&a4, b[11]) + scaled(&a2, b[9]);
    let u = a.dot(
        &(a6.dot(&inner_u)
            + scaled(&a6, b[7])
            + scaled(&a4, b[5])
            + scaled(&a2, b[3])
            + scaled(&id, b[1])),
    );
    let inner_v = scaled(&a6, b[12]) + scaled(&a4, b[10]) + scaled(&a2, b[8]);
    let v = a6.dot(&inner_v)
        + scaled(&a6, b[6])
        + scaled(&a4, b[4])
        + scaled(&a2, b[2])
        + scaled(&id, b[0]);
    (u, v)
}

/// Dense complex matrix exponential by scaling and squaring with Padé
/// approximants of degree 3 to 13.
pub fn expm(a: &Array2<C64>) -> Result<Array2<C64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::InvalidInput("expm needs a square matrix".into()));
    }
    if a.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Numerical("expm input is not finite".into()));
    }
    let norm = norm1(a.view());
    let solve = |u: Array2<C64>, v: Array2<C64>| -> Result<Array2<C64>> {
        let denom = (&v - &u).inv()?;
        Ok(denom.dot(&(v + u)))
    };
    for (degree, theta) in THETA {
        if norm <= theta {
            let coeffs: &[f64] = match degree {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            let (u, v) = pade_low(a, coeffs);
            return solve(u, v);
        }
    }
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a_scaled = scaled(a, 2f64.powi(-s));
    let (u, v) = pade13(&a_scaled);
    let mut r = solve(u, v)?;
    for _ in 0..s {
        r = r.dot(&r);
    }
    Ok(r)
}
