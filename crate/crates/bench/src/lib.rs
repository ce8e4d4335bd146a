//! Wall-clock scaling of the perturbative eigensystem against dense
//! diagonalization of the `n² × n²` super-operator.

use std::time::Instant;

use qwalk_core::dqw::approximate;
use qwalk_core::families::{sample_unique_gaps, GraphFamily};
use qwalk_core::{build_laplacian, build_superoperator, eigendecompose, Error, Graph, Result};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

pub const DEFAULT_PERTURB_MAX_N: usize = 32;
pub const DEFAULT_ORACLE_MAX_N: usize = 16;

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub family: GraphFamily,
    pub seed: u64,
    pub reps: usize,
    pub threads: usize,
    pub perturb_max_n: usize,
    pub oracle_max_n: usize,
    /// Minimum gap separation demanded of sampled graphs.
    pub min_separation: f64,
    pub max_tries: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: vec![8, 12, 16],
            family: GraphFamily::ErdosRenyi { q: 0.5 },
            seed: 1,
            reps: 3,
            threads: 1,
            perturb_max_n: DEFAULT_PERTURB_MAX_N,
            oracle_max_n: DEFAULT_ORACLE_MAX_N,
            min_separation: 0.0,
            max_tries: 10_000,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::InvalidInput("no sizes given".into()));
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "sizes must be strictly increasing".into(),
            ));
        }
        if self.sizes[0] < 2 {
            return Err(Error::InvalidInput("sizes must be at least 2".into()));
        }
        if self.reps < 3 {
            return Err(Error::InvalidInput(
                "at least 3 repetitions are needed for a median".into(),
            ));
        }
        if self.threads == 0 {
            return Err(Error::InvalidInput("thread count must be positive".into()));
        }
        let largest = *self.sizes.last().unwrap();
        if largest > self.perturb_max_n {
            return Err(Error::TooLarge {
                n: largest,
                limit: self.perturb_max_n,
                what: "perturbative timings",
            });
        }
        Ok(())
    }
}

/// The graph timed at one size. The per-size seed is derived from the
/// configured seed, so fixtures do not depend on which other sizes run.
#[derive(Debug, Clone, Serialize)]
pub struct Fixture {
    pub n: usize,
    pub seed: u64,
    pub resamples: usize,
    pub min_separation: f64,
    pub edges: Vec<(usize, usize)>,
}

pub fn size_seed(seed: u64, n: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(n as u64)
}

pub fn fixture(
    family: GraphFamily,
    n: usize,
    seed: u64,
    min_separation: f64,
    max_tries: usize,
) -> Result<(Graph, Fixture)> {
    let seed = size_seed(seed, n);
    let sample = sample_unique_gaps(family, n, seed, min_separation, max_tries)?;
    let info = Fixture {
        n,
        seed,
        resamples: sample.resamples,
        min_separation: sample.min_separation,
        edges: sample.graph.edges().to_vec(),
    };
    Ok((sample.graph, info))
}

/// Laplacian diagonalization, co-observations, mixing tensor and assembly.
pub fn perturbative_assembly(g: &Graph) -> Result<()> {
    let spectrum = eigendecompose(&build_laplacian(g))?;
    approximate(&spectrum, 0.01, spectrum.default_tolerance())?;
    Ok(())
}

/// Building `M` and computing its full eigendecomposition.
pub fn oracle_eigendecomposition(g: &Graph) -> Result<()> {
    build_superoperator(&build_laplacian(g), 0.01)?.eigendecomposition()?;
    Ok(())
}

pub fn median(samples: &[f64]) -> f64 {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

fn time_reps(reps: usize, f: impl Fn() -> Result<()>) -> Result<Vec<f64>> {
    // one untimed warm-up run
    f()?;
    (0..reps)
        .map(|_| {
            let start = Instant::now();
            f()?;
            Ok(start.elapsed().as_secs_f64())
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SizeTiming {
    pub fixture: Fixture,
    pub perturb_samples: Vec<f64>,
    pub perturb_median: f64,
    pub oracle_samples: Option<Vec<f64>>,
    pub oracle_median: Option<f64>,
}

/// Least-squares line through `(ln n, ln seconds)`.
#[derive(Debug, Clone, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Two-sided 95% Student-t interval on the slope; absent with only two
    /// points.
    pub ci95: Option<(f64, f64)>,
    pub points: usize,
}

pub fn fit_loglog(ns: &[usize], secs: &[f64]) -> Option<SlopeFit> {
    let k = ns.len();
    if k < 2 || secs.len() != k {
        return None;
    }
    let x: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = secs.iter().map(|s| s.ln()).collect();
    let mx = x.iter().sum::<f64>() / k as f64;
    let my = y.iter().sum::<f64>() / k as f64;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ci95 = (k > 2).then(|| {
        let sse: f64 = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (b - intercept - slope * a).powi(2))
            .sum();
        let se = (sse / (k - 2) as f64 / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, (k - 2) as f64)
            .unwrap()
            .inverse_cdf(0.975);
        (slope - t * se, slope + t * se)
    });
    Some(SlopeFit {
        slope,
        intercept,
        ci95,
        points: k,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Environment {
    pub os: &'static str,
    pub arch: &'static str,
    pub available_parallelism: usize,
    pub threads: usize,
    pub version: &'static str,
    pub profile: &'static str,
}

impl Environment {
    fn capture(threads: usize) -> Self {
        Self {
            os: std::env::consts::OS,
            arch: std::env::consts::ARCH,
            available_parallelism: std::thread::available_parallelism().map_or(1, |n| n.get()),
            threads,
            version: env!("CARGO_PKG_VERSION"),
            profile: if cfg!(debug_assertions) {
                "debug"
            } else {
                "release"
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub family: String,
    pub seed: u64,
    pub reps: usize,
    pub timings: Vec<SizeTiming>,
    pub perturb_fit: Option<SlopeFit>,
    pub oracle_fit: Option<SlopeFit>,
    pub notices: Vec<String>,
    pub environment: Environment,
}

impl BenchReport {
    pub fn sizes(&self) -> Vec<usize> {
        self.timings.iter().map(|t| t.fixture.n).collect()
    }
}

/// Runs every size on a pool of `config.threads` workers.
pub fn run_bench(config: &BenchConfig) -> Result<BenchReport> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    pool.install(|| run_sizes(config))
}

fn run_sizes(config: &BenchConfig) -> Result<BenchReport> {
    let mut timings = Vec::with_capacity(config.sizes.len());
    let mut notices = Vec::new();
    for &n in &config.sizes {
        let (g, info) = fixture(
            config.family,
            n,
            config.seed,
            config.min_separation,
            config.max_tries,
        )?;
        log::info!(
            "n = {n}: {} edges after {} resample(s)",
            g.edges().len(),
            info.resamples
        );
        let perturb_samples = time_reps(config.reps, || perturbative_assembly(&g))?;
        let oracle_samples = if n <= config.oracle_max_n {
            Some(time_reps(config.reps, || oracle_eigendecomposition(&g))?)
        } else {
            notices.push(format!(
                "n = {n} exceeds the oracle limit {}; oracle not timed",
                config.oracle_max_n
            ));
            None
        };
        timings.push(SizeTiming {
            fixture: info,
            perturb_median: median(&perturb_samples),
            perturb_samples,
            oracle_median: oracle_samples.as_deref().map(median),
            oracle_samples,
        });
    }

    let ns: Vec<usize> = timings.iter().map(|t| t.fixture.n).collect();
    let perturb: Vec<f64> = timings.iter().map(|t| t.perturb_median).collect();
    let perturb_fit = fit_loglog(&ns, &perturb);
    let (oracle_ns, oracle): (Vec<usize>, Vec<f64>) = timings
        .iter()
        .filter_map(|t| t.oracle_median.map(|m| (t.fixture.n, m)))
        .unzip();
    let oracle_fit = fit_loglog(&oracle_ns, &oracle);
    if perturb_fit.is_none() {
        notices.push("a single size gives no slope; timings only".into());
    }

    Ok(BenchReport {
        family: config.family.to_string(),
        seed: config.seed,
        reps: config.reps,
        timings,
        perturb_fit,
        oracle_fit,
        notices,
        environment: Environment::capture(config.threads),
    })
}
