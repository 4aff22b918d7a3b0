//! End-to-end Thirring preparation runs shared by the CLI and the tests.

use crate::error::{Error, Result};
use crate::stateprep::{run_preparation, PrepConfig, SpectrumScaling};
use crate::statevector::{eig_hermitian, EigenDecomposition, HermitianOperator, QuantumState, UnitaryOperator};
use crate::thirring::{
    build_hamiltonian, effective_hamiltonian, optimize_overlap, reference_state, sigma_chi, suzuki2_step, OptimizeOptions,
    ThirringModel, ThirringParams, TrotterConfig, VariationalResult, DEFAULT_LAYERS, DEFAULT_SAMPLES,
};
use crate::windows::WindowKind;

/// Trotterized evolution of a Thirring chain under the default scaling.
#[derive(Debug, Clone)]
pub struct ThirringSetup {
    pub model: ThirringModel,
    pub scaling: SpectrumScaling,
    pub trotter: TrotterConfig,
    /// One step of `e^{2 pi i lambda (H + shift)}` split into `d` steps.
    pub u_step: UnitaryOperator,
    /// Effective Hamiltonian of the product formula, shift removed.
    pub h_eff: HermitianOperator,
    pub eff_eigen: EigenDecomposition,
}

impl ThirringSetup {
    pub fn new(params: ThirringParams, d: u32) -> Result<Self> {
        let model = build_hamiltonian(params)?;
        let eig = eig_hermitian(&model.hamiltonian)?;
        let scaling = SpectrumScaling::for_spectrum(&eig.eigenvalues)?;
        Self::with_scaling(model, d, scaling)
    }

    pub fn with_scaling(model: ThirringModel, d: u32, scaling: SpectrumScaling) -> Result<Self> {
        let trotter = TrotterConfig::new(d, scaling.lambda)?;
        let u_step = suzuki2_step(&model.terms.shifted(scaling.shift), &trotter)?;
        let h_eff = effective_hamiltonian(&u_step, d, scaling.lambda)?.shifted(-scaling.shift);
        let eff_eigen = eig_hermitian(&h_eff)?;
        Ok(Self { model, scaling, trotter, u_step, h_eff, eff_eigen })
    }

    /// Scaled phase of the effective ground state.
    pub fn theta0(&self) -> f64 {
        self.scaling.phase(self.eff_eigen.ground_energy())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    /// Computational-basis ground state of the diagonal term.
    Reference,
    /// Optimized layered ansatz on top of the reference state.
    Variational { layers: usize, options: OptimizeOptions },
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::Variational { layers: DEFAULT_LAYERS, options: OptimizeOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrepExperiment {
    pub params: ThirringParams,
    pub d: u32,
    pub m: u32,
    pub r_max: u32,
    pub windows: Vec<WindowKind>,
    pub n_samples: usize,
    pub initial: InitialState,
    /// Magnitude of the offset between the estimate and the true phase,
    /// in units of `2^-m`.
    pub xi_bins: f64,
    /// Even runs offset the estimate upward, odd runs downward.
    pub run_index: u64,
}

/// Default estimate offset: a quarter of an outcome bin.
pub const DEFAULT_XI_BINS: f64 = 0.25;

impl PrepExperiment {
    pub fn new(params: ThirringParams, d: u32, m: u32, r_max: u32) -> Self {
        Self {
            params,
            d,
            m,
            r_max,
            windows: WindowKind::ALL.to_vec(),
            n_samples: DEFAULT_SAMPLES,
            initial: InitialState::default(),
            xi_bins: DEFAULT_XI_BINS,
            run_index: 0,
        }
    }

    pub fn xi(&self) -> f64 {
        self.xi_bins / (1u64 << self.m) as f64
    }

    pub fn offset_sign(&self) -> f64 {
        if self.run_index % 2 == 0 { 1.0 } else { -1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrepRow {
    pub r: u32,
    pub window: WindowKind,
    pub success_prob: f64,
    pub cumulative_success: f64,
    pub epsilon: f64,
    pub sigma_chi: f64,
}

#[derive(Debug, Clone)]
pub struct PrepOutcome {
    pub rows: Vec<PrepRow>,
    pub lambda: f64,
    pub shift: f64,
    pub theta0: f64,
    pub theta0_est: f64,
    /// `|phi_0|` of the initial state against the effective ground state.
    pub ground_overlap: f64,
    pub variational: Option<VariationalResult>,
    /// `sigma_chi` of the initial state.
    pub initial_sigma_chi: f64,
}

impl PrepOutcome {
    pub fn series(&self, window: WindowKind) -> Vec<PrepRow> {
        self.rows.iter().copied().filter(|r| r.window == window).collect()
    }
}

pub fn initial_state(setup: &ThirringSetup, initial: &InitialState) -> Result<(QuantumState, Option<VariationalResult>)> {
    let reference = reference_state(&setup.model.terms)?;
    match initial {
        InitialState::Reference => Ok((reference, None)),
        InitialState::Variational { layers, options } => {
            let result = optimize_overlap(&setup.model.terms, *layers, &reference, options)?;
            let state = crate::thirring::variational_state(&result.params, &setup.model.terms, &reference)?;
            Ok((state, Some(result)))
        }
    }
}

/// Filters the initial state `r_max` times per window against the
/// effective Hamiltonian and records `sigma_chi` after every round.
pub fn run_prep_experiment(exp: &PrepExperiment) -> Result<PrepOutcome> {
    if exp.r_max == 0 {
        return Err(Error::InvalidParameter("r_max must be at least 1".into()));
    }
    if !(exp.xi_bins >= 0.0 && exp.xi_bins.is_finite()) {
        return Err(Error::InvalidParameter(format!("xi = {} bins", exp.xi_bins)));
    }
    let setup = ThirringSetup::new(exp.params, exp.d)?;
    let (initial, variational) = initial_state(&setup, &exp.initial)?;
    let theta0 = setup.theta0();
    let theta0_est = theta0 + exp.offset_sign() * exp.xi();
    let (_, initial_sigma_chi) = sigma_chi(&initial, &setup.u_step, exp.n_samples)?;

    let mut rows = Vec::new();
    let mut ground_overlap = 0.0;
    for &window in &exp.windows {
        let mut cfg = PrepConfig::new(exp.m, window, exp.r_max, theta0_est, setup.scaling)?;
        cfg.xi = exp.xi();
        let report = run_preparation(&initial, &setup.h_eff, &cfg)?;
        ground_overlap = report.ground_overlap;
        for rec in &report.records {
            let (_, s) = sigma_chi(&rec.state, &setup.u_step, exp.n_samples)?;
            rows.push(PrepRow {
                r: rec.r,
                window,
                success_prob: rec.success_prob,
                cumulative_success: rec.cumulative_success,
                epsilon: rec.epsilon,
                sigma_chi: s,
            });
        }
    }
    Ok(PrepOutcome {
        rows,
        lambda: setup.scaling.lambda,
        shift: setup.scaling.shift,
        theta0,
        theta0_est,
        ground_overlap,
        variational,
        initial_sigma_chi,
    })
}

/// Least-squares line through `(x, y)`: `(slope, intercept, r_squared)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidParameter("linear fit needs two or more paired points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("degenerate abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok((slope, intercept, r2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_fit_exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let (s, b, r2) = linear_fit(&x, &y).unwrap();
        assert!((s + 0.5).abs() < 1e-14 && (b - 2.0).abs() < 1e-14 && (r2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn setup_effective_ground_inside_quarter_band() {
        let setup = ThirringSetup::new(ThirringParams::new(4, 1.0, 0.5).unwrap(), 1).unwrap();
        assert!(setup.theta0() > -0.3 && setup.theta0() < -0.2);
    }

    #[test]
    fn experiment_rows_per_window() {
        let mut exp = PrepExperiment::new(ThirringParams::new(4, 1.0, 0.5).unwrap(), 1, 6, 3);
        exp.initial = InitialState::Reference;
        exp.n_samples = 5;
        let out = run_prep_experiment(&exp).unwrap();
        assert_eq!(out.rows.len(), 6);
        assert_eq!(out.series(WindowKind::Cosine).len(), 3);
    }
}
