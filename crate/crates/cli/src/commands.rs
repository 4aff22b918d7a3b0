use std::path::PathBuf;

use clap::{Args, ValueEnum};
use wqpe_core::circuit::PhaseOracle;
use wqpe_core::experiment::{run_prep_experiment, InitialState, PrepExperiment, ThirringSetup, DEFAULT_XI_BINS};
use wqpe_core::optimize::NelderMeadOptions;
use wqpe_core::qpe::{
    cbar_metric, error_rate, min_extra_qubits, run_qpe_circuit_with, verify_tail_bound, QpeConfig, CBAR_NODES,
    NUMERICAL_ZERO, TAIL_GRID_POINTS,
};
use wqpe_core::stateprep::{perturbation_error_bound, SpectrumScaling};
use wqpe_core::statevector::{eig_hermitian, expi_hermitian, HermitianOperator, QuantumState};
use wqpe_core::thirring::{
    build_hamiltonian, optimize_overlap, reference_state, OptimizeOptions, ThirringParams, DEFAULT_LAYERS,
    DEFAULT_RESTARTS, DEFAULT_SAMPLES, DEFAULT_SEED,
};
use wqpe_core::windows::{filter, window_amplitudes, WindowKind, WindowSpec};

use crate::model::ModelFile;
use crate::output::{emit, num, opt_num, RunManifest, Table};
use crate::{CliError, KindArg, OutArg, WindowArg};

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// `thirring`, or a JSON model file
    #[arg(long, default_value = "thirring")]
    model: String,
    #[arg(long, default_value_t = 4)]
    sites: usize,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    mass: f64,
    /// Interaction strength, taken as given
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    coupling: f64,
}

impl ModelArgs {
    fn params(&self) -> Result<ThirringParams, CliError> {
        if self.model == "thirring" {
            Ok(ThirringParams::new(self.sites, self.mass, self.coupling)?)
        } else {
            ModelFile::read(&PathBuf::from(&self.model))?.thirring()
        }
    }

    fn record(&self, manifest: &mut RunManifest, params: &ThirringParams) {
        manifest
            .param("model", &self.model)
            .param("sites", params.sites)
            .param("mass", num(params.mass))
            .param("coupling", num(params.coupling));
    }
}

fn window_label(kind: WindowKind) -> &'static str {
    kind.short_name()
}

fn ensure_range(name: &str, lo: u32, hi: u32) -> Result<(), CliError> {
    if lo > hi {
        return Err(CliError::Input(format!("--{name}-min {lo} exceeds --{name}-max {hi}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct DumpArgs {
    #[arg(long)]
    m: u32,
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Filter samples per unit of q
    #[arg(long, default_value_t = 1)]
    oversample: u32,
    #[command(flatten)]
    out: OutArg,
}

pub fn windows_dump(a: &DumpArgs) -> Result<(), CliError> {
    if a.oversample == 0 {
        return Err(CliError::Input("--oversample must be at least 1".into()));
    }
    let kind = WindowKind::from(a.kind);
    let spec = WindowSpec::new(a.m, kind)?;
    let size = spec.size() as i64;
    let mut table = Table::new(&["x", "re_window", "im_window", "q", "re_filter", "im_filter", "abs2_filter"]);
    for (k, w) in window_amplitudes(spec).iter().enumerate() {
        let x = k as i64 - size / 2;
        table.push(vec![x.to_string(), num(w.re), num(w.im), String::new(), String::new(), String::new(), String::new()]);
    }
    let steps = size * a.oversample as i64;
    for j in 0..steps {
        let q = -(size as f64) / 2.0 + j as f64 / a.oversample as f64;
        let f = filter(kind, q, a.m);
        table.push(vec![String::new(), String::new(), String::new(), num(q), num(f.re), num(f.im), num(f.norm_sqr())]);
    }
    let mut manifest = RunManifest::new("windows dump");
    manifest.param("m", a.m).param("kind", kind.short_name()).param("oversample", a.oversample);
    manifest.output_path = a.out.path();
    Ok(emit(&manifest, &table, a.out.path().as_deref())?)
}

#[derive(Debug, Clone, Args)]
pub struct ErrorRateArgs {
    /// Precision qubits
    #[arg(long)]
    t: u32,
    /// Phase offset in units of 2^-m
    #[arg(long, allow_hyphen_values = true)]
    delta2m: f64,
    #[arg(long, default_value_t = 1)]
    p_min: u32,
    #[arg(long, default_value_t = 8)]
    p_max: u32,
    #[arg(long, value_enum, default_value_t = WindowArg::Both)]
    window: WindowArg,
    #[command(flatten)]
    out: OutArg,
}

pub fn qpe_error_rate(a: &ErrorRateArgs) -> Result<(), CliError> {
    ensure_range("p", a.p_min, a.p_max)?;
    if !(-0.5..=0.5).contains(&a.delta2m) {
        return Err(CliError::Input(format!("--delta2m {} outside [-0.5, 0.5]", a.delta2m)));
    }
    let kinds = a.window.kinds();
    let mut table = Table::new(&["p", "e_rect", "e_cos"]);
    for p in a.p_min..=a.p_max {
        let cell = |kind: WindowKind| -> Result<String, CliError> {
            Ok(if kinds.contains(&kind) { num(error_rate(a.t, p, a.delta2m, kind)?) } else { String::new() })
        };
        let rect = cell(WindowKind::Rectangular)?;
        let cos = cell(WindowKind::Cosine)?;
        table.push(vec![p.to_string(), rect, cos]);
    }
    let mut manifest = RunManifest::new("qpe error-rate");
    manifest
        .param("t", a.t)
        .param("delta2m", num(a.delta2m))
        .param("p_min", a.p_min)
        .param("p_max", a.p_max)
        .param("window", a.window.name())
        .param("numerical_zero", num(NUMERICAL_ZERO));
    manifest.output_path = a.out.path();
    Ok(emit(&manifest, &table, a.out.path().as_deref())?)
}

#[derive(Debug, Clone, Args)]
pub struct QubitsArgs {
    /// Target error rate
    #[arg(long)]
    e: f64,
    #[arg(long, value_enum, default_value_t = WindowArg::Both)]
    window: WindowArg,
    /// Precision qubits; adds the total m = t + p when given
    #[arg(long)]
    t: Option<u32>,
    #[command(flatten)]
    out: OutArg,
}

pub fn qpe_qubits(a: &QubitsArgs) -> Result<(), CliError> {
    let mut table = Table::new(&["window", "e_target", "p", "t", "m"]);
    for kind in a.window.kinds() {
        let p = min_extra_qubits(a.e, kind)?;
        let t = a.t.map(|t| t.to_string()).unwrap_or_default();
        let m = a.t.map(|t| (t + p).to_string()).unwrap_or_default();
        table.push(vec![window_label(kind).into(), num(a.e), p.to_string(), t, m]);
    }
    let mut manifest = RunManifest::new("qpe qubits");
    manifest.param("e", num(a.e)).param("window", a.window.name());
    if let Some(t) = a.t {
        manifest.param("t", t);
    }
    manifest.output_path = a.out.path();
    Ok(emit(&manifest, &table, a.out.path().as_deref())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateArg {
    /// The file's state, else the reference state for thirring, else the ground state
    Auto,
    Ground,
    Reference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleArg {
    /// Controlled powers from the eigendecomposition
    Spectral,
    /// Controlled powers by repeated application
    Repeated,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// JSON model file
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    m: u32,
    #[arg(long, value_enum, default_value_t = WindowArg::Both)]
    window: WindowArg,
    /// Phase turns per unit energy; defaults to 1 / (2 spectral width)
    #[arg(long)]
    lambda: Option<f64>,
    /// Energy offset; defaults to minus the spectral midpoint
    #[arg(long, allow_hyphen_values = true)]
    shift: Option<f64>,
    #[arg(long, value_enum, default_value_t = StateArg::Auto)]
    state: StateArg,
    #[arg(long, value_enum, default_value_t = OracleArg::Spectral)]
    oracle: OracleArg,
    #[command(flatten)]
    out: OutArg,
}

pub fn qpe_run(a: &RunArgs) -> Result<(), CliError> {
    let file = ModelFile::read(&a.input)?;
    let (h, given, reference): (HermitianOperator, Option<QuantumState>, Option<QuantumState>) = match &file {
        ModelFile::Thirring { .. } => {
            let model = build_hamiltonian(file.thirring()?)?;
            let reference = reference_state(&model.terms)?;
            (model.hamiltonian, None, Some(reference))
        }
        ModelFile::Matrix { hamiltonian, state } => {
            (hamiltonian.to_hermitian()?, state.as_ref().map(|s| s.to_state()).transpose()?, None)
        }
    };
    let eig = eig_hermitian(&h)?;
    let input = match a.state {
        StateArg::Ground => eig.ground_state(),
        StateArg::Reference => {
            reference.ok_or_else(|| CliError::Input("--state reference needs a thirring model".into()))?
        }
        StateArg::Auto => given.or(reference).unwrap_or_else(|| eig.ground_state()),
    };
    if input.dim() != h.dim() {
        return Err(CliError::Input(format!("state length {} does not match dimension {}", input.dim(), h.dim())));
    }
    let policy = SpectrumScaling::for_spectrum(&eig.eigenvalues)?;
    let scaling = SpectrumScaling { lambda: a.lambda.unwrap_or(policy.lambda), shift: a.shift.unwrap_or(policy.shift) };
    if !(scaling.lambda > 0.0 && scaling.lambda.is_finite()) {
        return Err(CliError::Input(format!("--lambda {} must be positive", scaling.lambda)));
    }
    let oracle = match a.oracle {
        OracleArg::Spectral => PhaseOracle::from_eigen(&eig, scaling.lambda, scaling.shift),
        OracleArg::Repeated => {
            let shifted = h.shifted(scaling.shift);
            PhaseOracle::Repeated(expi_hermitian(&shifted, 2.0 * std::f64::consts::PI * scaling.lambda)?)
        }
    };
    let size = (1u64 << a.m) as f64;
    let mut table = Table::new(&["window", "q", "phase", "energy", "probability"]);
    for kind in a.window.kinds() {
        let dist = run_qpe_circuit_with(&input, &oracle, &QpeConfig::with_m(a.m, kind)?)?;
        for (q, p) in dist.labels().zip(dist.probabilities()) {
            let phase = q as f64 / size;
            let energy = phase / scaling.lambda - scaling.shift;
            table.push(vec![window_label(kind).into(), q.to_string(), num(phase), num(energy), num(*p)]);
        }
    }
    let mut manifest = RunManifest::new("qpe run");
    manifest
        .param("input", a.input.display())
        .param("m", a.m)
        .param("window", a.window.name())
        .param("lambda", num(scaling.lambda))
        .param("shift", num(scaling.shift))
        .param("state", format!("{:?}", a.state).to_lowercase())
        .param("oracle", format!("{:?}", a.oracle).to_lowercase());
    manifest.output_path = a.out.path();
    Ok(emit(&manifest, &table, a.out.path().as_deref())?)
}

#[derive(Debug, Clone, Args)]
pub struct CbarArgs {
    #[arg(long, default_value_t = 1)]
    m_min: u32,
    #[arg(long, default_value_t = 8)]
    m_max: u32,
    #[arg(long, value_enum, default_value_t = WindowArg::Both)]
    window: WindowArg,
    #[command(flatten)]
    out: OutArg,
}

pub fn qpe_cbar(a: &CbarArgs) -> Result<(), CliError> {
    ensure_range("m", a.m_min, a.m_max)?;
    let kinds = a.window.kinds();
    let mut table = Table::new(&["m", "cbar_rect", "cbar_cos"]);
    for m in a.m_min..=a.m_max {
        let cell = |kind: WindowKind| -> Result<Option<f64>, CliError> {
            Ok(if kinds.contains(&kind) { Some(cbar_metric(&QpeConfig::with_m(m, kind)?)?) } else { None })
        };
        let rect = cell(WindowKind::Rectangular)?;
        let cos = cell(WindowKind::Cosine)?;
        table.push(vec![m.to_string(), opt_num(rect), opt_num(cos)]);
    }
    let mut manifest = RunManifest::new("qpe cbar");
    manifest
        .param("m_min", a.m_min)
        .param("m_max", a.m_max)
        .param("window", a.window.name())
        .param("nodes", CBAR_NODES);
    manifest.output_path = a.out.path();
    Ok(emit(&manifest, &table, a.out.path().as_deref())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitialArg {
    Variational,
    Reference,
}

#[derive(Debug, Clone, Args)]
pub struct OptimizerArgs {
    #[arg(long, default_value_t = DEFAULT_LAYERS)]
    layers: usize,
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    restarts: usize,
    /// Seed for optimizer restarts
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

impl OptimizerArgs {
    fn options(&self) -> OptimizeOptions {
        OptimizeOptions { restarts: self.restarts, seed: self.seed, nelder_mead: NelderMeadOptions::default() }
    }

    fn record(&self, manifest: &mut RunManifest) {
        let nm = NelderMeadOptions::default();
        manifest
            .param("layers", self.layers)
            .param("restarts", self.restarts)
            .param("nm_max_evaluations", nm.max_evaluations)
            .param("nm_f_tolerance", num(nm.f_tolerance))
            .param("nm_x_tolerance", num(nm.x_tolerance));
        manifest.seed = Some(self.seed);
    }
}

#[derive(Debug, Clone, Args)]
pub struct PrepareArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Trotter steps per unit of evolution
    #[arg(long, default_value_t = 1)]
    d: u32,
    #[arg(long, default_value_t = 8)]
    m: u32,
    #[arg(long, default_value_t = 6)]
    r_max: u32,
    #[arg(long, value_enum, default_value_t = WindowArg::Both)]
    window: WindowArg,
    /// Estimate offset from the true ground phase, in units of 2^-m
    #[arg(long, default_value_t = DEFAULT_XI_BINS)]
    xi_bins: f64,
    /// Even runs place the estimate above the true phase, odd runs below
    #[arg(long, default_value_t = 0)]
    run_index: u64,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    n_samples: usize,
    #[arg(long, value_enum, default_value_t = InitialArg::Variational)]
    initial: InitialArg,
    #[command(flatten)]
    optimizer: OptimizerArgs,
    #[command(flatten)]
    out: OutArg,
}

pub fn prepare(a: &PrepareArgs) -> Result<(), CliError> {
    let params = a.model.params()?;
    let mut exp = PrepExperiment::new(params, a.d, a.m, a.r_max);
    exp.windows = a.window.kinds();
    exp.xi_bins = a.xi_bins;
    exp.run_index = a.run_index;
    exp.n_samples = a.n_samples;
    exp.initial = match a.initial {
        InitialArg::Reference => InitialState::Reference,
        InitialArg::Variational => InitialState::Variational { layers: a.optimizer.layers, options: a.optimizer.options() },
    };
    let out = run_prep_experiment(&exp)?;
    let mut table = Table::new(&["r", "window", "success_prob", "cum_Pr", "epsilon", "sigma_chi"]);
    for row in &out.rows {
        table.push(vec![
            row.r.to_string(),
            window_label(row.window).into(),
            num(row.success_prob),
            num(row.cumulative_success),
            num(row.epsilon),
            num(row.sigma_chi),
        ]);
    }
    let mut manifest = RunManifest::new("prepare");
    a.model.record(&mut manifest, &params);
    manifest
        .param("d", a.d)
        .param("m", a.m)
        .param("r_max", a.r_max)
        .param("window", a.window.name())
        .param("xi_bins", num(a.xi_bins))
        .param("run_index", a.run_index)
        .param("n_samples", a.n_samples)
        .param("initial", format!("{:?}", a.initial).to_lowercase())
        .param("lambda", num(out.lambda))
        .param("shift", num(out.shift))
        .param("theta0", num(out.theta0))
        .param("theta0_est", num(out.theta0_est))
        .param("ground_overlap", num(out.ground_overlap))
        .param("initial_sigma_chi", num(out.initial_sigma_chi));
    if a.initial == InitialArg::Variational {
        a.optimizer.record(&mut manifest);
    }
    manifest.output_path = a.out.path();
    Ok(emit(&manifest, &table, a.out.path().as_deref())?)
}

#[derive(Debug, Clone, Args)]
pub struct VarprepArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    optimizer: OptimizerArgs,
    #[command(flatten)]
    out: OutArg,
}

pub fn varprep(a: &VarprepArgs) -> Result<(), CliError> {
    let params = a.model.params()?;
    let model = build_hamiltonian(params)?;
    let reference = reference_state(&model.terms)?;
    let res = optimize_overlap(&model.terms, a.optimizer.layers, &reference, &a.optimizer.options())?;
    let mut table = Table::new(&["key", "value"]);
    let mut put = |k: String, v: String| table.push(vec![k, v]);
    put("energy".into(), num(res.energy));
    put("reference_energy".into(), num(res.reference_energy));
    put("ground_energy".into(), num(res.ground_energy));
    put("overlap".into(), num(res.overlap));
    put("reference_overlap".into(), num(res.reference_overlap));
    put("evaluations".into(), res.evaluations.to_string());
    for l in 0..res.params.layers() {
        put(format!("alpha_{}", l + 1), num(res.params.alpha[l]));
        put(format!("beta_{}", l + 1), num(res.params.beta[l]));
        put(format!("gamma_{}", l + 1), num(res.params.gamma[l]));
    }
    let mut manifest = RunManifest::new("varprep");
    a.model.record(&mut manifest, &params);
    a.optimizer.record(&mut manifest);
    manifest.output_path = a.out.path();
    Ok(emit(&manifest, &table, a.out.path().as_deref())?)
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    /// Precision qubits for the cosine tail-bound sweep
    #[arg(long, default_value_t = 8)]
    t: u32,
    #[arg(long, default_value_t = 3)]
    p_min: u32,
    #[arg(long, default_value_t = 5)]
    p_max: u32,
    #[command(flatten)]
    model: ModelArgs,
    /// Trotter depths 1..=d-max for the perturbation check
    #[arg(long, default_value_t = 3)]
    d_max: u32,
    #[command(flatten)]
    out: OutArg,
}

pub fn bounds_check(a: &BoundsArgs) -> Result<(), CliError> {
    ensure_range("p", a.p_min, a.p_max)?;
    let params = a.model.params()?;
    let mut table = Table::new(&["check", "t", "p", "d", "empirical", "bound", "holds"]);
    let mut failed = Vec::new();
    for p in a.p_min..=a.p_max {
        let c = verify_tail_bound(a.t, p)?;
        if !c.holds() {
            failed.push(format!("tail bound p = {p}"));
        }
        table.push(vec![
            "cosine_tail".into(),
            a.t.to_string(),
            p.to_string(),
            String::new(),
            num(c.empirical_max),
            num(c.bound),
            c.holds().to_string(),
        ]);
    }
    for d in 1..=a.d_max {
        let s = ThirringSetup::new(params, d)?;
        let c = perturbation_error_bound(&s.model.hamiltonian, &s.h_eff, s.scaling.lambda)?;
        if !c.holds() {
            failed.push(format!("perturbation bound d = {d}"));
        }
        table.push(vec![
            "perturbation".into(),
            String::new(),
            String::new(),
            d.to_string(),
            num(c.distance),
            num(c.bound),
            c.holds().to_string(),
        ]);
    }
    let mut manifest = RunManifest::new("bounds check");
    a.model.record(&mut manifest, &params);
    manifest
        .param("t", a.t)
        .param("p_min", a.p_min)
        .param("p_max", a.p_max)
        .param("d_max", a.d_max)
        .param("tail_grid_points", TAIL_GRID_POINTS);
    manifest.output_path = a.out.path();
    emit(&manifest, &table, a.out.path().as_deref())?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(format!("violated: {}", failed.join(", "))))
    }
}
