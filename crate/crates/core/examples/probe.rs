use qwalk_core::dqw::validate_against_oracle;
use qwalk_core::families::{sample_unique_gaps, GraphFamily};
use qwalk_core::DensityMatrix;
fn main() {
    for n in 5..=8 {
        for seed in 0..3 {
            let s = sample_unique_gaps(GraphFamily::ErdosRenyi { q: 0.5 }, n, seed, 0.05, 1000)
                .unwrap();
            let times: Vec<f64> = (0..=20).map(|i| i as f64 * 0.5).collect();
            for &p in &[1e-3, 1e-2, 1e-1] {
                let r = validate_against_oracle(
                    &s.graph,
                    p,
                    &times,
                    &DensityMatrix::localized(n, 0).unwrap(),
                )
                .unwrap();
                println!(
                    "n={n} seed={seed} sep={:.3} p={p} eig={:.2e} evo={:.2e} order={:?}",
                    s.min_separation, r.eig_err, r.evo_err, r.order_estimate
                );
            }
        }
    }
}
