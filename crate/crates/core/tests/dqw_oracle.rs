mod support;

use qwalk_core::dqw::{
    approximate, co_observation, eigenvalue_derivatives, mixing_coefficients, perturb_evolve,
    validate_against_oracle,
};
use qwalk_core::lindblad::DensityMatrix;
use qwalk_core::{
    build_laplacian, build_superoperator, eigendecompose, exact_evolve, pure_ctqw_evolve, Graph,
    C64,
};
use support::walk::{eigenvector_residual, fixture_graphs, invariant_graphs, spectral_error};

#[test]
fn p3_order_estimate() {
    let g = Graph::path(3).unwrap();
    let rho0 = DensityMatrix::localized(3, 0).unwrap();
    let r = validate_against_oracle(&g, 1e-2, &[1.0, 2.0, 5.0], &rho0).unwrap();
    let order = r.order_estimate.unwrap();
    assert!((1.7..=2.3).contains(&order), "order {order}");
    assert!(r.eig_err <= 1e-3);
}

#[test]
fn zero_rate_matches_oracle() {
    let g = Graph::path(3).unwrap();
    let rho0 = DensityMatrix::localized(3, 0).unwrap();
    let r = validate_against_oracle(&g, 0.0, &[0.0, 1.0, 2.0, 5.0], &rho0).unwrap();
    assert!(r.eig_err <= 1e-10 && r.evo_err <= 1e-9, "{r:?}");
    assert!(r.order_estimate.is_none());
}

#[test]
fn eigenvalues_are_second_order_on_fixtures() {
    for g in fixture_graphs() {
        let (a, b) = (spectral_error(&g, 1e-2), spectral_error(&g, 5e-3));
        assert!(
            a.is_finite() && (3.0..=5.0).contains(&(a / b)),
            "n={} ratio {}",
            g.n(),
            a / b
        );
    }
}

#[test]
fn eigenvectors_are_second_order_on_fixtures() {
    for g in fixture_graphs() {
        let (a, b) = (
            eigenvector_residual(&g, 1e-3),
            eigenvector_residual(&g, 5e-4),
        );
        assert!(a <= 10.0 * 1e-6, "n={} residual {a}", g.n());
        assert!(
            (3.0..=5.0).contains(&(a / b)),
            "n={} ratio {}",
            g.n(),
            a / b
        );
    }
}

#[test]
fn p3_evolution_error_shrinks() {
    let g = Graph::path(3).unwrap();
    let rho0 = DensityMatrix::localized(3, 0).unwrap();
    let times = [0.5, 1.0, 2.0, 5.0];
    let e1 = validate_against_oracle(&g, 1e-2, &times, &rho0)
        .unwrap()
        .evo_err;
    let e2 = validate_against_oracle(&g, 5e-3, &times, &rho0)
        .unwrap()
        .evo_err;
    assert!(e1 <= 1e-2);
    assert!((3.0..=5.0).contains(&(e1 / e2)), "ratio {}", e1 / e2);
}

#[test]
fn zero_rate_equals_pure_walk() {
    for g in fixture_graphs() {
        let n = g.n();
        let spectrum = eigendecompose(&build_laplacian(&g)).unwrap();
        let approx = approximate(&spectrum, 0.0, spectrum.default_tolerance()).unwrap();
        let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.7).collect();
        let perturbed =
            perturb_evolve(&approx, &DensityMatrix::localized(n, 1).unwrap(), &times).unwrap();
        let mut psi0 = ndarray::Array1::from_elem(n, C64::new(0.0, 0.0));
        psi0[1] = C64::new(1.0, 0.0);
        let pure = pure_ctqw_evolve(&spectrum, &psi0, &times).unwrap();
        assert!(perturbed.max_abs_diff(&pure) < 1e-9);
    }
}

/// Two-node dephasing walk from node 0: with `z = ρ00 − ρ11`,
/// `ż = −2y`, `ẏ = 2z − py`, so `z = e^{−pt/2}(cos ωt + p/(2ω) sin ωt)`
/// with `ω = √(4 − p²/4)`.
fn k2_population(p: f64, t: f64) -> f64 {
    let w = (4.0 - p * p / 4.0).sqrt();
    let z = (-p * t / 2.0).exp() * ((w * t).cos() + p / (2.0 * w) * (w * t).sin());
    (1.0 + z) / 2.0
}

#[test]
fn k2_long_time_behaviour() {
    let (p, t) = (0.1, 50.0);
    let g = Graph::path(2).unwrap();
    let l = build_laplacian(&g);
    let spectrum = eigendecompose(&l).unwrap();
    let rho0 = DensityMatrix::localized(2, 0).unwrap();
    let exact = exact_evolve(&build_superoperator(&l, p).unwrap(), &rho0, &[t]).unwrap();
    assert!((exact.node_probs[0][0] - k2_population(p, t)).abs() < 1e-10);

    let approx = approximate(&spectrum, p, 1e-9).unwrap();
    let perturbed = perturb_evolve(&approx, &rho0, &[t]).unwrap();
    // both sit within the surviving e^{−pt/2} envelope of 1/2 and agree to O(p)
    let envelope = (-p * t / 2.0).exp();
    for probs in [&perturbed.node_probs[0], &exact.node_probs[0]] {
        assert!(probs.iter().all(|v| (v - 0.5).abs() <= envelope));
    }
    assert!(perturbed.max_abs_diff(&exact) < p);
}

#[test]
fn structural_invariants_on_random_graphs() {
    for g in invariant_graphs(20) {
        let spectrum = eigendecompose(&build_laplacian(&g)).unwrap();
        let tol = spectrum.default_tolerance();
        let co = co_observation(&spectrum).unwrap();
        assert!(co.doubly_stochastic_defect() < 1e-12);
        assert!(co.o.iter().all(|v| (-1e-15..=1.0 + 1e-15).contains(v)));
        assert!(co.xi_eigs[0].abs() < 1e-10);
        assert!(co.xi_eigs.iter().skip(1).all(|v| *v < 0.0));
        let d = eigenvalue_derivatives(&spectrum, &co, tol).unwrap();
        assert!(d.iter().all(|v| (-1.0 - 1e-12..=1e-12).contains(v)));
        let mix = mixing_coefficients(&spectrum, &co, None, tol).unwrap();
        let coh = mix.index.coherences();
        for &a in &coh {
            for &b in &coh {
                let (x, y) = (mix.b[(a, b)], mix.b[(b, a)]);
                assert!(x.re == 0.0 && (x + y).norm() < 1e-12);
            }
        }
    }
}
