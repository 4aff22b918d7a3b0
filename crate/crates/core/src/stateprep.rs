//! Iterative projective ground-state preparation.
//!
//! One round applies the windowed phase-estimation circuit centred at the
//! estimate `theta0` and post-selects the all-zero ancilla. On eigenstate
//! `i` this multiplies the amplitude by `gamma_i`, which is `G` (rectangular)
//! or `F+` (cosine) at offset `2^m (theta0 - theta_i)`.

use std::f64::consts::PI;

use crate::circuit::{filter_circuit, PhaseOracle};
use crate::error::{Error, Result};
use crate::statevector::{
    eig_hermitian, expi_hermitian, CVector, EigenDecomposition, HermitianOperator, QuantumState, UnitaryOperator, C64,
    MAX_QFT_QUBITS,
};
use crate::windows::{prep_filter, WindowKind};

const MIN_SUCCESS: f64 = 1e-300;
const MIN_OVERLAP: f64 = 1e-12;
const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FilterPath {
    #[default]
    Eigen,
    Circuit,
}

/// Energy-to-phase map `theta = lambda (E + shift)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumScaling {
    pub lambda: f64,
    pub shift: f64,
}

impl SpectrumScaling {
    /// Centres the spectrum and scales it into `[-1/4, 1/4]`.
    pub fn for_spectrum(eigenvalues: &[f64]) -> Result<Self> {
        let (lo, hi) = eigenvalues
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| (lo.min(e), hi.max(e)));
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidParameter("empty or non-finite spectrum".into()));
        }
        let width = hi - lo;
        // A flat spectrum maps to zero phase for any lambda.
        let lambda = if width > 0.0 { 1.0 / (2.0 * width) } else { 1.0 };
        Ok(Self { lambda, shift: -(hi + lo) / 2.0 })
    }

    pub fn phase(&self, energy: f64) -> f64 {
        self.lambda * (energy + self.shift)
    }

    pub fn phases(&self, eigenvalues: &[f64]) -> Vec<f64> {
        eigenvalues.iter().map(|&e| self.phase(e)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrepConfig {
    pub m: u32,
    pub window: WindowKind,
    pub r: u32,
    pub theta0_est: f64,
    pub xi: f64,
    pub lambda: f64,
    pub shift: f64,
    pub path: FilterPath,
}

impl PrepConfig {
    pub fn new(m: u32, window: WindowKind, r: u32, theta0_est: f64, scaling: SpectrumScaling) -> Result<Self> {
        let cfg = Self {
            m,
            window,
            r,
            theta0_est,
            xi: 0.0,
            lambda: scaling.lambda,
            shift: scaling.shift,
            path: FilterPath::Eigen,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_QFT_QUBITS).contains(&self.m) {
            return Err(Error::AncillaRange { m: self.m, min: 1, max: MAX_QFT_QUBITS });
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("lambda = {} must be positive", self.lambda)));
        }
        if !self.shift.is_finite() || !self.theta0_est.is_finite() || !(self.xi >= 0.0) {
            return Err(Error::InvalidParameter("shift, theta0 and xi must be finite, xi >= 0".into()));
        }
        Ok(())
    }

    pub fn scaling(&self) -> SpectrumScaling {
        SpectrumScaling { lambda: self.lambda, shift: self.shift }
    }

    pub fn size(&self) -> f64 {
        (1u64 << self.m) as f64
    }

    /// Evolution operator `e^{2 pi i lambda (H + shift)}` seen by the circuit.
    pub fn evolution(&self, h: &HermitianOperator) -> Result<UnitaryOperator> {
        expi_hermitian(&h.shifted(self.shift), 2.0 * PI * self.lambda)
    }
}

/// Rejects phases closer than `1/2^(m+1)` to the wrap-around at `+-1/2`.
pub fn check_aliasing(eigphases: &[f64], m: u32) -> Result<()> {
    let margin = 1.0 / (1u64 << (m + 1)) as f64;
    let (lo, hi) = (-0.5 + margin, 0.5 - margin);
    for &theta in eigphases {
        if !(theta >= lo && theta <= hi) {
            return Err(Error::Aliasing { theta, lo, hi });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterCoefficients {
    pub gamma: Vec<C64>,
}

impl FilterCoefficients {
    /// `|gamma_i|^r`
    pub fn magnitudes_pow(&self, r: u32) -> Vec<f64> {
        self.gamma.iter().map(|g| g.norm().powi(r as i32)).collect()
    }
}

/// `gamma_i = filter(2^m (theta0 - theta_i))`.
pub fn filter_coefficients(eigphases: &[f64], cfg: &PrepConfig) -> Result<FilterCoefficients> {
    cfg.validate()?;
    check_aliasing(eigphases, cfg.m)?;
    Ok(FilterCoefficients { gamma: raw_coefficients(eigphases, cfg.window, cfg.m, cfg.theta0_est) })
}

fn raw_coefficients(eigphases: &[f64], window: WindowKind, m: u32, theta0: f64) -> Vec<C64> {
    let size = (1u64 << m) as f64;
    eigphases.iter().map(|&t| prep_filter(window, size * (theta0 - t), m)).collect()
}

fn filter_in_eigenbasis(coeffs: &CVector, gamma: &[C64]) -> (CVector, f64) {
    let out = CVector::from_iterator(coeffs.len(), coeffs.iter().zip(gamma).map(|(c, g)| c * g));
    let success = out.norm_squared();
    (out, success)
}

/// One filter round via the eigendecomposition of `H`. Returns the
/// renormalized state and the post-selection probability.
pub fn apply_filter_eigen(state: &QuantumState, h_eig: &EigenDecomposition, cfg: &PrepConfig) -> Result<(QuantumState, f64)> {
    let gammas = filter_coefficients(&cfg.scaling().phases(&h_eig.eigenvalues), cfg)?;
    let coeffs = h_eig.coefficients(state)?;
    let (filtered, success) = filter_in_eigenbasis(&coeffs, &gammas.gamma);
    if !(success > MIN_SUCCESS) {
        return Err(Error::FilteredToNothing { success });
    }
    let out = QuantumState::from_amplitudes(&h_eig.eigenvectors * filtered.unscale(success.sqrt()))?;
    Ok((out, success))
}

/// One filter round by simulating the full ancilla circuit with repeated
/// applications of `u = e^{2 pi i lambda (H + shift)}`.
pub fn apply_filter_circuit(state: &QuantumState, u: &UnitaryOperator, cfg: &PrepConfig) -> Result<(QuantumState, f64)> {
    cfg.validate()?;
    filter_circuit(state, &PhaseOracle::Repeated(u.clone()), cfg.m, cfg.window, cfg.theta0_est)
}

#[derive(Debug, Clone)]
pub struct PrepRecord {
    pub r: u32,
    /// Post-selection probability of this round alone.
    pub success_prob: f64,
    /// `P_r`, the probability that all `r` rounds succeed.
    pub cumulative_success: f64,
    /// `min_alpha || psi_r - e^{i alpha} psi_0 ||` against the exact ground state.
    pub epsilon: f64,
    /// `||sum_{i>0} phi_i gamma_i^r psi_i|| / ||sum_i phi_i gamma_i^r psi_i||`.
    pub epsilon_ratio: f64,
    /// `1 - P_r / |phi_0|^2`.
    pub rho: f64,
    pub state: QuantumState,
}

#[derive(Debug, Clone)]
pub struct PrepReport {
    pub records: Vec<PrepRecord>,
    /// `|phi_0|` of the initial state.
    pub ground_overlap: f64,
    pub gammas: FilterCoefficients,
    pub eigen: EigenDecomposition,
}

impl PrepReport {
    pub fn final_state(&self) -> Option<&QuantumState> {
        self.records.last().map(|r| &r.state)
    }
}

/// Applies `cfg.r` filter rounds to `initial`, recording each round.
pub fn run_preparation(initial: &QuantumState, h: &HermitianOperator, cfg: &PrepConfig) -> Result<PrepReport> {
    cfg.validate()?;
    let eig = eig_hermitian(h)?;
    let gammas = filter_coefficients(&cfg.scaling().phases(&eig.eigenvalues), cfg)?;
    let phi = eig.coefficients(initial)?;
    let norm = phi.norm();
    let ground_overlap = phi[0].norm() / norm;
    if !(ground_overlap > MIN_OVERLAP) {
        return Err(Error::ZeroOverlap);
    }
    let ground = eig.ground_state();
    let oracle = match cfg.path {
        FilterPath::Eigen => None,
        FilterPath::Circuit => Some(cfg.evolution(h)?),
    };

    let mut records = Vec::with_capacity(cfg.r as usize);
    let mut state = initial.clone();
    let mut cumulative = 1.0;
    let mut weighted: Vec<C64> = phi.iter().map(|c| c / norm).collect();
    for r in 1..=cfg.r {
        let (next, success) = match &oracle {
            None => apply_filter_eigen(&state, &eig, cfg)?,
            Some(u) => apply_filter_circuit(&state, u, cfg)?,
        };
        state = next;
        cumulative *= success;
        for (w, g) in weighted.iter_mut().zip(&gammas.gamma) {
            *w *= g;
        }
        let all: f64 = weighted.iter().map(|w| w.norm_sqr()).sum();
        let excited: f64 = weighted[1..].iter().map(|w| w.norm_sqr()).sum();
        records.push(PrepRecord {
            r,
            success_prob: success,
            cumulative_success: cumulative,
            epsilon: state.phase_aligned_distance(&ground),
            epsilon_ratio: (excited / all).sqrt(),
            rho: 1.0 - cumulative / (ground_overlap * ground_overlap),
            state: state.clone(),
        });
    }
    Ok(PrepReport { records, ground_overlap, gammas, eigen: eig })
}

/// `max_{i>0} |gamma_i|^r`, the norm of the residual operator after `r` rounds.
pub fn residual_norm(gammas: &FilterCoefficients, r: u32) -> f64 {
    gammas.gamma.iter().skip(1).map(|g| g.norm().powi(r as i32)).fold(0.0, f64::max)
}

fn check_bound_inputs(epsilon: f64, phi0: f64, rho: f64, gap: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon} not in (0, 1)")));
    }
    if !(phi0 > 0.0 && phi0 <= 1.0) {
        return Err(Error::InvalidParameter(format!("|phi0| = {phi0} not in (0, 1]")));
    }
    if !(rho >= 0.0 && rho < 1.0) {
        return Err(Error::InvalidParameter(format!("rho = {rho} not in [0, 1)")));
    }
    if !(gap > 0.0 && gap.is_finite()) {
        return Err(Error::InvalidParameter(format!("gap = {gap} must be positive")));
    }
    Ok(())
}

/// Argument of the logarithm that sets the per-round suppression:
/// `2^(m+1) gap` or `2^(3m+3) gap (gap + 2^-m)(gap - 2^-m) / pi^2`.
pub fn suppression_argument(m: u32, gap: f64, window: WindowKind) -> f64 {
    let size = (1u64 << m) as f64;
    match window {
        WindowKind::Rectangular => 2.0 * size * gap,
        WindowKind::Cosine => 8.0 * size.powi(3) * gap * (gap + 1.0 / size) * (gap - 1.0 / size) / (PI * PI),
    }
}

fn suppression_log(m: u32, gap: f64, window: WindowKind) -> Result<f64> {
    let argument = suppression_argument(m, gap, window);
    if !(argument > 1.0) {
        return Err(Error::GapTooSmall { argument });
    }
    Ok(argument.ln())
}

/// Rounds needed for preparation error `epsilon`, with all asymptotic
/// constants set to 1: `ln(1/(eps |phi0| sqrt(1-rho))) / ln(suppression)`.
/// `gap` is in phase units.
pub fn iteration_bound(epsilon: f64, phi0: f64, rho: f64, m: u32, gap: f64, window: WindowKind) -> Result<f64> {
    check_bound_inputs(epsilon, phi0, rho, gap)?;
    let numerator = (1.0 / (epsilon * phi0 * (1.0 - rho).sqrt())).ln();
    Ok(numerator / suppression_log(m, gap, window)?)
}

/// Curvature `a` of the parabola `1 - a u^2` that caps `|gamma_0|^2` over
/// the main lobe.
pub fn parabola_coefficient(window: WindowKind) -> f64 {
    match window {
        WindowKind::Rectangular => 1.0,
        WindowKind::Cosine => 0.25,
    }
}

/// Half-width of the main lobe in units of `1/2^m`.
pub fn main_lobe_half_width(window: WindowKind) -> f64 {
    match window {
        WindowKind::Rectangular => 1.0,
        WindowKind::Cosine => 2.0,
    }
}

/// Tolerable error `xi` in the energy estimate, constants set to 1:
/// `2^-m sqrt(ln(suppression) / (a ln(1/(eps |phi0| sqrt(1-rho)))) * ln(1/(1-rho)))`.
pub fn precision_bound(epsilon: f64, phi0: f64, rho: f64, m: u32, gap: f64, window: WindowKind) -> Result<f64> {
    check_bound_inputs(epsilon, phi0, rho, gap)?;
    let numerator = (1.0 / (epsilon * phi0 * (1.0 - rho).sqrt())).ln();
    let ratio = suppression_log(m, gap, window)? / numerator;
    let size = (1u64 << m) as f64;
    Ok((ratio * (1.0 / (1.0 - rho)).ln() / parabola_coefficient(window)).sqrt() / size)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub theta0: f64,
    pub success: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub estimate: f64,
    pub threshold: f64,
    /// Every grid point visited, the accepted one last.
    pub trace: Vec<ScanPoint>,
}

/// Sweeps `theta0` upward from `-1/2` in steps of `xi_step`, running one
/// exact filter round at each point, and stops at the first point whose
/// success probability exceeds `|phi_0|^2 / 2`. `cfg.theta0_est` is ignored.
pub fn ground_energy_scan(initial: &QuantumState, h: &HermitianOperator, cfg: &PrepConfig, xi_step: f64) -> Result<ScanResult> {
    cfg.validate()?;
    if !(xi_step > 0.0 && xi_step.is_finite()) {
        return Err(Error::InvalidParameter(format!("xi_step = {xi_step} must be positive")));
    }
    let eig = eig_hermitian(h)?;
    let phases = cfg.scaling().phases(&eig.eigenvalues);
    check_aliasing(&phases, cfg.m)?;
    let phi = eig.coefficients(initial)?;
    let weights: Vec<f64> = {
        let norm = phi.norm_squared();
        phi.iter().map(|c| c.norm_sqr() / norm).collect()
    };
    let threshold = weights[0] / 2.0;
    let mut trace = Vec::new();
    for k in 0.. {
        let theta0 = -0.5 + k as f64 * xi_step;
        if theta0 >= 0.5 {
            break;
        }
        let gamma = raw_coefficients(&phases, cfg.window, cfg.m, theta0);
        let success: f64 = gamma.iter().zip(&weights).map(|(g, w)| g.norm_sqr() * w).sum();
        trace.push(ScanPoint { theta0, success });
        if success > threshold {
            return Ok(ScanResult { estimate: theta0, threshold, trace });
        }
    }
    Err(Error::ScanFailed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationCheck {
    /// `lambda ||H_eff - H|| / (lambda gap)`.
    pub bound: f64,
    /// Phase-aligned distance between the two ground states.
    pub distance: f64,
    pub gap: f64,
    pub perturbation_norm: f64,
}

impl PerturbationCheck {
    pub fn holds(&self) -> bool {
        self.distance <= self.bound
    }
}

/// First-order bound on the ground-state shift caused by replacing `h` with
/// `h_eff`, alongside the exact shift.
pub fn perturbation_error_bound(h: &HermitianOperator, h_eff: &HermitianOperator, lambda: f64) -> Result<PerturbationCheck> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda = {lambda} must be positive")));
    }
    let eig = eig_hermitian(h)?;
    let scale = eig.eigenvalues.iter().fold(1.0f64, |a, e| a.max(e.abs()));
    let gap = eig.gap();
    if !(gap > DEGENERACY_TOL * scale) {
        return Err(Error::DegenerateGround { gap });
    }
    let perturbation_norm = h_eff.minus(h)?.spectral_norm()?;
    let eig_eff = eig_hermitian(h_eff)?;
    let distance = eig_eff.ground_state().phase_aligned_distance(&eig.ground_state());
    Ok(PerturbationCheck { bound: lambda * perturbation_norm / (lambda * gap), distance, gap, perturbation_norm })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessRelations {
    pub p_r: f64,
    pub rho: f64,
    pub epsilon_sq: f64,
    /// `|gamma_0|^(2r)`
    pub gamma0_pow: f64,
    pub p_r_below_overlap: bool,
    pub gamma_relation_holds: bool,
}

/// Exact `P_r = sum_i |phi_i|^2 |gamma_i|^(2r)` and the derived quantities,
/// with `P_r <= |phi_0|^2` and `|gamma_0|^(2r) <= (1-rho)(1+10 eps^2)` checked.
pub fn success_rate_relations_check(gammas: &FilterCoefficients, phi: &[C64], r: u32) -> Result<SuccessRelations> {
    if gammas.gamma.len() != phi.len() || phi.is_empty() {
        return Err(Error::DimensionMismatch { expected: gammas.gamma.len(), actual: phi.len() });
    }
    let norm: f64 = phi.iter().map(|c| c.norm_sqr()).sum();
    let weighted: Vec<f64> = phi
        .iter()
        .zip(&gammas.gamma)
        .map(|(c, g)| c.norm_sqr() / norm * g.norm_sqr().powi(r as i32))
        .collect();
    let p_r: f64 = weighted.iter().sum();
    let phi0_sq = phi[0].norm_sqr() / norm;
    if !(phi0_sq > 0.0) {
        return Err(Error::ZeroOverlap);
    }
    let rho = 1.0 - p_r / phi0_sq;
    // eps^2 = 2 - 2 |c_0| for the normalized filtered state.
    let c0 = if p_r > 0.0 { (weighted[0] / p_r).sqrt() } else { 0.0 };
    let epsilon_sq = (2.0 - 2.0 * c0).max(0.0);
    let gamma0_pow = gammas.gamma[0].norm_sqr().powi(r as i32);
    Ok(SuccessRelations {
        p_r,
        rho,
        epsilon_sq,
        gamma0_pow,
        p_r_below_overlap: p_r <= phi0_sq + 1e-12,
        gamma_relation_holds: gamma0_pow <= (1.0 - rho) * (1.0 + 10.0 * epsilon_sq) + 1e-12,
    })
}
