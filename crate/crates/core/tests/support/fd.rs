//! Finite-difference oracle for the generic eigen-perturbation routines.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Eigh, Inverse, UPLO};
use qwalk_core::dqw::match_spectra;
use qwalk_core::linalg::{condition_number, dagger};
use qwalk_core::perturb::{
    hermitian_specialize, perturb, DiagonalizableSystem, PerturbationResult,
};
use qwalk_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const STEPS: [f64; 3] = [1e-3, 5e-4, 2.5e-4];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    Distinct,
    Repeated,
    Hermitian,
    SecondOrder,
}

pub const CASES: [Case; 4] = [
    Case::Distinct,
    Case::Repeated,
    Case::Hermitian,
    Case::SecondOrder,
];

/// `A(h) = A + hA′ + h²A″/2`.
pub struct Family {
    pub case: Case,
    pub a: Array2<C64>,
    pub a1: Array2<C64>,
    pub a2: Option<Array2<C64>>,
}

impl Family {
    pub fn at(&self, h: f64) -> Array2<C64> {
        let mut m = &self.a + &self.a1.mapv(|v| v * h);
        if let Some(a2) = &self.a2 {
            m = m + a2.mapv(|v| v * (h * h / 2.0));
        }
        m
    }

    pub fn system(&self) -> DiagonalizableSystem {
        if self.case == Case::Hermitian {
            DiagonalizableSystem::hermitian(self.a.clone(), self.a1.clone(), self.a2.clone())
                .unwrap()
        } else {
            DiagonalizableSystem::new(self.a.clone(), self.a1.clone(), self.a2.clone()).unwrap()
        }
    }

    pub fn solve(&self, sys: &DiagonalizableSystem) -> PerturbationResult {
        let tol = sys.default_tolerance();
        if self.case == Case::Hermitian {
            hermitian_specialize(sys, tol).unwrap()
        } else {
            perturb(sys, tol).unwrap()
        }
    }
}

fn random_complex(rng: &mut ChaCha8Rng, n: usize) -> Array2<C64> {
    Array2::from_shape_fn((n, n), |_| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> Array2<C64> {
    let m = random_complex(rng, n);
    (&m + &dagger(&m)).mapv(|v| v * 0.5)
}

/// Eigenvalues `0, 1, 2, …` (with a small imaginary scatter for the
/// non-Hermitian cases); the repeated cases collapse the first two (or
/// three, when `n ≥ 5`) onto one value.
fn spectrum(case: Case, n: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let mut d: Vec<C64> = (0..n)
        .map(|i| {
            let im = if case == Case::Hermitian {
                0.0
            } else {
                rng.random_range(-0.4..0.4)
            };
            C64::new(i as f64, im)
        })
        .collect();
    if case != Case::Distinct {
        let r = if n >= 5 { 3 } else { 2 };
        for i in 1..r {
            d[i] = d[0];
        }
    }
    d
}

pub fn random_family(case: Case, n: usize, seed: u64) -> Family {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = spectrum(case, n, &mut rng);
    let diag = Array2::from_diag(&Array1::from(d));
    let a = if case == Case::Hermitian {
        let (_, u) = random_hermitian(&mut rng, n).eigh(UPLO::Lower).unwrap();
        u.dot(&diag).dot(&dagger(&u))
    } else {
        loop {
            let v = random_complex(&mut rng, n) + Array2::<C64>::eye(n).mapv(|z| z * 2.0);
            if condition_number(&v).unwrap() < 30.0 {
                let vi = v.inv().unwrap();
                break v.dot(&diag).dot(&vi);
            }
        }
    };
    let (a1, a2) = match case {
        Case::Hermitian => (random_hermitian(&mut rng, n), None),
        Case::SecondOrder => (
            random_complex(&mut rng, n),
            Some(random_complex(&mut rng, n)),
        ),
        _ => (random_complex(&mut rng, n), None),
    };
    Family { case, a, a1, a2 }
}

/// Largest eigenvalue and eigenvector error of the first-order prediction
/// at step `h`. Exact eigenvectors are aligned to the prediction by the
/// least-squares complex scalar before comparing.
pub fn first_order_errors(
    family: &Family,
    sys: &DiagonalizableSystem,
    b: &Array2<C64>,
    res: &PerturbationResult,
    h: f64,
) -> (f64, f64) {
    let (vals, vecs) = family.at(h).eig().unwrap();
    let predicted_vals = res.eigenvalues_at(sys, h);
    let n = sys.n();
    let step = Array2::<C64>::eye(n) + b.mapv(|v| v * h);
    let predicted_vecs = res.continuous_basis(sys).dot(&step);
    let pairs = match_spectra(predicted_vals.as_slice().unwrap(), vals.as_slice().unwrap());
    let mut eig_err: f64 = 0.0;
    let mut vec_err: f64 = 0.0;
    for (i, j, d) in pairs {
        eig_err = eig_err.max(d);
        let x = predicted_vecs.column(i);
        let v = vecs.column(j);
        let vv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let alpha: C64 = v
            .iter()
            .zip(x.iter())
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            / vv;
        let err = v
            .iter()
            .zip(x.iter())
            .map(|(a, b)| (alpha * a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        vec_err = vec_err.max(err);
    }
    (eig_err, vec_err)
}

/// Errors at each of [`STEPS`] and the two successive halving ratios.
pub struct HalvingRun {
    pub eig: [f64; 3],
    pub vec: [f64; 3],
}

impl HalvingRun {
    pub fn eig_ratios(&self) -> [f64; 2] {
        [self.eig[0] / self.eig[1], self.eig[1] / self.eig[2]]
    }

    pub fn vec_ratios(&self) -> [f64; 2] {
        [self.vec[0] / self.vec[1], self.vec[1] / self.vec[2]]
    }

    pub fn second_order(&self, lo: f64, hi: f64) -> bool {
        self.eig_ratios()
            .iter()
            .chain(self.vec_ratios().iter())
            .all(|r| (lo..=hi).contains(r))
    }
}

pub fn halving_run(family: &Family, b_override: Option<&Array2<C64>>) -> HalvingRun {
    let sys = family.system();
    let res = family.solve(&sys);
    let b = b_override.unwrap_or(&res.b);
    let mut eig = [0.0; 3];
    let mut vec = [0.0; 3];
    for (k, &h) in STEPS.iter().enumerate() {
        let (e, v) = first_order_errors(family, &sys, b, &res, h);
        eig[k] = e;
        vec[k] = v;
    }
    HalvingRun { eig, vec }
}
