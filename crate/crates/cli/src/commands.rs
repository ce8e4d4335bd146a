use std::path::{Path, PathBuf};

use ndarray::Array1;
use qwalk_bench::{run_bench, BenchConfig, BenchReport};
use qwalk_core::dqw::{
    approximate, co_observation, eigenvalue_derivatives, max_matching_error, mixing_coefficients,
    perturb_evolve, PairIndex, ORACLE_MAX_N,
};
use qwalk_core::families::GraphFamily;
use qwalk_core::trace::ExactBackend;
use qwalk_core::{
    build_laplacian, build_superoperator, check_gap_uniqueness, classical_ctrw_evolve,
    eigendecompose, exact_evolve, pure_ctqw_evolve, DensityMatrix, Error, EvolutionTrace, Graph,
    C64,
};
use serde::Serialize;

use crate::args::{BenchArgs, EigReportArgs, Format, InitArgs, MethodArg, RunArgs};
use crate::error::{CliError, CliResult};
use crate::input::{parse_init, read_graph, read_text, TimeGrid};
use crate::output::{emit, json, sidecar_path, trace_csv, trace_json};

/// Largest graph for dense super-operator evolution.
pub const EXACT_MAX_N: usize = 24;
/// Largest graph for the perturbative path (the mixing tensor has `n⁴` entries).
pub const PERTURB_MAX_N: usize = 40;
/// Allowed drift of each row sum from 1 in a written trace.
pub const ROW_SUM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    Node(usize),
    Uniform,
    File(PathBuf),
}

impl InitSpec {
    fn describe(&self) -> String {
        match self {
            InitSpec::Node(j) => format!("node {j}"),
            InitSpec::Uniform => "uniform".into(),
            InitSpec::File(p) => format!("file {}", p.display()),
        }
    }
}

impl From<&InitArgs> for InitSpec {
    fn from(a: &InitArgs) -> Self {
        match (&a.init_file, a.uniform, a.start_node) {
            (Some(path), _, _) => InitSpec::File(path.clone()),
            (None, true, _) => InitSpec::Uniform,
            (None, false, node) => InitSpec::Node(node.unwrap_or(0)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub graph_path: PathBuf,
    pub method: MethodArg,
    pub p: f64,
    pub grid: TimeGrid,
    pub init: InitSpec,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
    pub threads: usize,
    pub tol: Option<f64>,
}

impl From<&RunArgs> for RunConfig {
    fn from(a: &RunArgs) -> Self {
        Self {
            graph_path: a.graph.clone(),
            method: a.method,
            p: a.p,
            grid: TimeGrid {
                start: a.t_start,
                stop: a.t_stop,
                steps: a.t_steps,
            },
            init: InitSpec::from(&a.init),
            out: a.out.clone(),
            format: a.format,
            seed: a.seed,
            threads: a.threads,
            tol: a.tol,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> CliResult<()> {
        self.grid.validate()?;
        if !(self.p >= 0.0 && self.p.is_finite()) {
            return Err(CliError::Config(format!(
                "--p must be finite and ≥ 0, got {}",
                self.p
            )));
        }
        if self.threads == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(CliError::Config(format!(
                    "--tol must be positive, got {tol}"
                )));
            }
        }
        Ok(())
    }

    fn ignores_p(&self) -> bool {
        matches!(self.method, MethodArg::Pure | MethodArg::Classical)
    }
}

fn method_name(m: MethodArg) -> &'static str {
    match m {
        MethodArg::Perturb => "perturb",
        MethodArg::Exact => "exact",
        MethodArg::Pure => "pure",
        MethodArg::Classical => "classical",
    }
}

/// Written as the CSV header comments or the JSON sidecar.
#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub version: &'static str,
    pub graph: String,
    pub n: usize,
    pub edges: usize,
    pub method: &'static str,
    pub p: f64,
    pub p_ignored: bool,
    pub tol: Option<f64>,
    pub t_start: f64,
    pub t_stop: f64,
    pub t_steps: usize,
    pub init: String,
    pub seed: u64,
    pub threads: usize,
    pub backend: String,
    pub eigenbasis_condition: Option<f64>,
    pub fallback_triggered: bool,
    pub max_hermiticity_drift: f64,
    pub max_trace_deviation: f64,
    pub renormalized: bool,
    pub first_order_warning: bool,
}

fn normalized(values: Vec<C64>, path: &Path) -> CliResult<Array1<C64>> {
    let norm = values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(CliError::InitFile {
            path: path.to_path_buf(),
            line: 0,
            message: "zero state vector".into(),
        });
    }
    if (norm - 1.0).abs() > 1e-9 {
        log::warn!("initial amplitudes have norm {norm}; normalizing");
    }
    Ok(Array1::from(values).mapv(|v| v / norm))
}

fn amplitudes(init: &InitSpec, n: usize) -> CliResult<Array1<C64>> {
    match init {
        InitSpec::Node(j) => {
            if *j >= n {
                return Err(Error::InvalidState(format!(
                    "start node {j} out of range for {n} nodes"
                ))
                .into());
            }
            let mut psi = Array1::from_elem(n, C64::new(0.0, 0.0));
            psi[*j] = C64::new(1.0, 0.0);
            Ok(psi)
        }
        InitSpec::Uniform => Ok(Array1::from_elem(n, C64::new(1.0 / (n as f64).sqrt(), 0.0))),
        InitSpec::File(path) => normalized(parse_init(&read_text(path)?, n, path)?, path),
    }
}

fn density(init: &InitSpec, n: usize) -> CliResult<DensityMatrix> {
    match init {
        InitSpec::Uniform => Ok(DensityMatrix::maximally_mixed(n)?),
        other => Ok(DensityMatrix::from_pure(&amplitudes(other, n)?)?),
    }
}

fn probabilities(init: &InitSpec, n: usize) -> CliResult<Array1<f64>> {
    match init {
        InitSpec::File(path) => {
            let values = parse_init(&read_text(path)?, n, path)?;
            let bad = |message: String| CliError::InitFile {
                path: path.clone(),
                line: 0,
                message,
            };
            if values.iter().any(|v| v.im != 0.0 || v.re < 0.0) {
                return Err(bad(
                    "classical probabilities must be real and non-negative".into()
                ));
            }
            let total: f64 = values.iter().map(|v| v.re).sum();
            if !(total > 0.0) {
                return Err(bad("probabilities sum to zero".into()));
            }
            if (total - 1.0).abs() > 1e-9 {
                log::warn!("initial probabilities sum to {total}; normalizing");
            }
            Ok(values.iter().map(|v| v.re / total).collect())
        }
        other => Ok(amplitudes(other, n)?.mapv(|a| a.norm_sqr())),
    }
}

fn check_limit(n: usize, limit: usize, what: &'static str) -> CliResult<()> {
    if n > limit {
        return Err(Error::TooLarge { n, limit, what }.into());
    }
    Ok(())
}

fn check_row_sums(trace: &EvolutionTrace) -> CliResult<()> {
    for (t, row) in trace.times.iter().zip(&trace.node_probs) {
        let sum: f64 = row.iter().sum();
        if !((sum - 1.0).abs() <= ROW_SUM_TOL) {
            return Err(Error::Numerical(format!("probabilities at t = {t} sum to {sum}")).into());
        }
    }
    Ok(())
}

fn pool(threads: usize) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

/// Evolves the configured state and returns the trace with its metadata.
pub fn simulate(cfg: &RunConfig) -> CliResult<(EvolutionTrace, RunMetadata)> {
    cfg.validate()?;
    let graph = read_graph(&cfg.graph_path)?;
    let n = graph.n();
    let times = cfg.grid.times();
    if cfg.ignores_p() && cfg.p != 0.0 {
        log::warn!("method {} ignores --p {}", method_name(cfg.method), cfg.p);
    }
    let laplacian = build_laplacian(&graph);
    let mut tol_used = None;
    let trace = match cfg.method {
        MethodArg::Exact => {
            check_limit(n, EXACT_MAX_N, "exact evolution")?;
            exact_evolve(
                &build_superoperator(&laplacian, cfg.p)?,
                &density(&cfg.init, n)?,
                &times,
            )?
        }
        MethodArg::Perturb => {
            check_limit(n, PERTURB_MAX_N, "perturbative evolution")?;
            let rho0 = density(&cfg.init, n)?;
            let spectrum = eigendecompose(&laplacian)?;
            let tol = cfg.tol.unwrap_or_else(|| spectrum.default_tolerance());
            tol_used = Some(tol);
            let approx = pool(cfg.threads)?.install(|| approximate(&spectrum, cfg.p, tol))?;
            perturb_evolve(&approx, &rho0, &times)?
        }
        MethodArg::Pure => pure_ctqw_evolve(
            &eigendecompose(&laplacian)?,
            &amplitudes(&cfg.init, n)?,
            &times,
        )?,
        MethodArg::Classical => {
            classical_ctrw_evolve(&laplacian, &probabilities(&cfg.init, n)?, &times)?
        }
    };
    check_row_sums(&trace)?;

    let (backend, condition) = match trace.meta.backend {
        Some(ExactBackend::Eigenbasis { condition }) => ("eigenbasis".to_string(), Some(condition)),
        Some(ExactBackend::MatrixExponential { condition }) => {
            ("matrix-exponential".to_string(), Some(condition))
        }
        None => (
            match cfg.method {
                MethodArg::Perturb => "first-order-eigensystem",
                MethodArg::Pure => "laplacian-eigenbasis",
                MethodArg::Classical => "laplacian-eigenbasis",
                MethodArg::Exact => "unknown",
            }
            .to_string(),
            None,
        ),
    };
    let meta = RunMetadata {
        version: env!("CARGO_PKG_VERSION"),
        graph: cfg.graph_path.display().to_string(),
        n,
        edges: graph.edges().len(),
        method: method_name(cfg.method),
        p: cfg.p,
        p_ignored: cfg.ignores_p(),
        tol: tol_used,
        t_start: cfg.grid.start,
        t_stop: cfg.grid.stop,
        t_steps: cfg.grid.steps,
        init: cfg.init.describe(),
        seed: cfg.seed,
        threads: cfg.threads,
        backend,
        eigenbasis_condition: condition,
        fallback_triggered: trace.meta.fallback_triggered,
        max_hermiticity_drift: trace.meta.max_hermiticity_drift,
        max_trace_deviation: trace.meta.max_trace_deviation,
        renormalized: trace.meta.renormalized,
        first_order_warning: trace.meta.first_order_warning,
    };
    Ok((trace, meta))
}

pub fn run(args: &RunArgs) -> CliResult<()> {
    let cfg = RunConfig::from(args);
    let (trace, meta) = simulate(&cfg)?;
    match cfg.format {
        Format::Csv => emit(cfg.out.as_deref(), &trace_csv(&trace, &meta)?),
        Format::Json => {
            emit(cfg.out.as_deref(), &trace_json(&trace)?)?;
            match &cfg.out {
                Some(out) => emit(Some(&sidecar_path(out)), &json(&meta)?),
                None => {
                    log::info!("metadata: {}", serde_json::to_string(&meta)?);
                    Ok(())
                }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeValue {
    pub j: usize,
    pub k: usize,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MixingEntry {
    pub jk: (usize, usize),
    pub lm: (usize, usize),
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DoublyStochasticCheck {
    pub max_defect: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleComparison {
    pub eigenvalues: Vec<(f64, f64)>,
    pub max_matching_error: f64,
}

/// Laplacian and first-order super-operator quantities for one graph.
/// Entries `(c, c)` of the mode lists refer to the rotated population
/// modes (column `c` of `gamma`), not to `φ_c φ_cᵀ`.
#[derive(Debug, Clone, Serialize)]
pub struct EigReport {
    pub n: usize,
    pub p: f64,
    pub tol: f64,
    pub lambdas: Vec<f64>,
    pub min_gap_separation: f64,
    pub pi: Vec<ModeValue>,
    pub pi_prime: Vec<ModeValue>,
    pub first_order_eigenvalues: Vec<ModeValue>,
    pub o: Vec<Vec<f64>>,
    pub doubly_stochastic: DoublyStochasticCheck,
    pub xi_eigenvalues: Vec<f64>,
    pub gamma: Vec<Vec<f64>>,
    pub pb_norm: f64,
    pub first_order_warning: bool,
    pub mixing: Option<Vec<MixingEntry>>,
    pub oracle: Option<OracleComparison>,
}

fn rows(m: &ndarray::Array2<f64>) -> Vec<Vec<f64>> {
    m.outer_iter().map(|r| r.to_vec()).collect()
}

pub fn build_eig_report(
    graph: &Graph,
    p: f64,
    tol: Option<f64>,
    with_mixing: bool,
    threads: usize,
) -> CliResult<EigReport> {
    if !(p >= 0.0 && p.is_finite()) {
        return Err(CliError::Config(format!(
            "--p must be finite and ≥ 0, got {p}"
        )));
    }
    let n = graph.n();
    check_limit(n, PERTURB_MAX_N, "the eigen report")?;
    let laplacian = build_laplacian(graph);
    let spectrum = eigendecompose(&laplacian)?;
    let tol = tol.unwrap_or_else(|| spectrum.default_tolerance());
    let gaps = check_gap_uniqueness(&spectrum, tol).into_result()?;
    let co = co_observation(&spectrum)?;
    let derivative = eigenvalue_derivatives(&spectrum, &co, tol)?;
    let pool = pool(threads)?;
    let mixing = pool.install(|| mixing_coefficients(&spectrum, &co, None, tol))?;
    let index = PairIndex::new(n);
    let mixing_entries = with_mixing.then(|| {
        let mut out = Vec::new();
        for r in 0..index.len() {
            for c in 0..index.len() {
                let b = mixing.b[(r, c)];
                if b != C64::new(0.0, 0.0) {
                    out.push(MixingEntry {
                        jk: index.pair(r),
                        lm: index.pair(c),
                        re: b.re,
                        im: b.im,
                    });
                }
            }
        }
        out
    });
    let approx = qwalk_core::dqw::assemble(&spectrum, &co, mixing, p, tol)?;
    let mode = |q: usize, z: C64| {
        let (j, k) = index.pair(q);
        ModeValue {
            j,
            k,
            re: z.re,
            im: z.im,
        }
    };
    let unperturbed = qwalk_core::dqw::unperturbed_spectrum(&spectrum);
    let oracle = if n <= ORACLE_MAX_N {
        let exact = build_superoperator(&laplacian, p)?.eigenvalues()?;
        let err = max_matching_error(
            approx.eigenvalues.as_slice().unwrap(),
            exact.as_slice().unwrap(),
        );
        Some(OracleComparison {
            eigenvalues: exact.iter().map(|z| (z.re, z.im)).collect(),
            max_matching_error: err,
        })
    } else {
        None
    };
    let defect = co.doubly_stochastic_defect();
    Ok(EigReport {
        n,
        p,
        tol,
        lambdas: spectrum.lambdas.to_vec(),
        min_gap_separation: gaps.min_separation,
        pi: unperturbed
            .pi
            .iter()
            .enumerate()
            .map(|(q, &z)| mode(q, z))
            .collect(),
        pi_prime: derivative
            .iter()
            .enumerate()
            .map(|(q, &d)| mode(q, C64::new(d, 0.0)))
            .collect(),
        first_order_eigenvalues: approx
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(q, &z)| mode(q, z))
            .collect(),
        o: rows(&co.o),
        doubly_stochastic: DoublyStochasticCheck {
            max_defect: defect,
            tolerance: 1e-12,
            passed: defect <= 1e-12,
        },
        xi_eigenvalues: co.xi_eigs.to_vec(),
        gamma: rows(&co.gamma),
        pb_norm: approx.pb_norm,
        first_order_warning: approx.first_order_warning,
        mixing: mixing_entries,
        oracle,
    })
}

pub fn eig_report(args: &EigReportArgs) -> CliResult<()> {
    if args.threads == 0 {
        return Err(CliError::Config("--threads must be positive".into()));
    }
    let graph = read_graph(&args.graph)?;
    let report = build_eig_report(&graph, args.p, args.tol, args.mixing, args.threads)?;
    emit(args.out.as_deref(), &json(&report)?)
}

pub fn bench_config(args: &BenchArgs) -> CliResult<BenchConfig> {
    let family: GraphFamily = args
        .family
        .parse()
        .map_err(|e: Error| CliError::Config(e.to_string()))?;
    Ok(BenchConfig {
        sizes: args.sizes.clone(),
        family,
        seed: args.seed,
        reps: args.reps,
        threads: args.threads,
        perturb_max_n: args.max_n,
        oracle_max_n: args.oracle_max_n,
        ..BenchConfig::default()
    })
}

fn summarize(report: &BenchReport) {
    for t in &report.timings {
        match t.oracle_median {
            Some(o) => eprintln!(
                "n = {:>3}  perturbative {:.4e} s  dense oracle {:.4e} s",
                t.fixture.n, t.perturb_median, o
            ),
            None => eprintln!(
                "n = {:>3}  perturbative {:.4e} s",
                t.fixture.n, t.perturb_median
            ),
        }
    }
    for (name, fit) in [
        ("perturbative", &report.perturb_fit),
        ("dense oracle", &report.oracle_fit),
    ] {
        if let Some(f) = fit {
            match f.ci95 {
                Some((lo, hi)) => eprintln!(
                    "{name} log-log slope {:.3} (95% CI {lo:.3} .. {hi:.3})",
                    f.slope
                ),
                None => eprintln!("{name} log-log slope {:.3}", f.slope),
            }
        }
    }
    for note in &report.notices {
        eprintln!("note: {note}");
    }
}

pub fn bench(args: &BenchArgs) -> CliResult<()> {
    let config = bench_config(args)?;
    let report = match run_bench(&config) {
        Err(Error::InvalidInput(msg)) => return Err(CliError::Config(msg)),
        other => other?,
    };
    summarize(&report);
    emit(args.out.as_deref(), &json(&report)?)
}
