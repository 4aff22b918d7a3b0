//! Lattice Thirring model in its spin formulation, Suzuki-2 Trotter steps,
//! the effective Hamiltonian of a step, the chiral condensate and the
//! layered variational warm start.
//!
//! Site `n` is qubit `n`. Spin up is `|0>`, so `S^z_n + 1/2` projects onto
//! bit `n` being clear and `S^+_n = |0><1|` on that site.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::statevector::{
    apply_unitary, check_amplitude_cap, eig_hermitian, expi_from_eigen, expi_hermitian, principal_log_unitary,
    CMatrix, CVector, EigenDecomposition, HermitianOperator, QuantumState, UnitaryOperator, C64,
};

pub const MIN_SITES: usize = 2;
pub const MAX_SITES: usize = 12;
/// Seed for the random optimizer restarts.
pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_RESTARTS: usize = 5;
pub const DEFAULT_LAYERS: usize = 2;
pub const DEFAULT_SAMPLES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThirringParams {
    pub sites: usize,
    pub mass: f64,
    pub coupling: f64,
}

impl ThirringParams {
    pub fn new(sites: usize, mass: f64, coupling: f64) -> Result<Self> {
        if sites % 2 != 0 || !(MIN_SITES..=MAX_SITES).contains(&sites) {
            return Err(Error::InvalidParameter(format!(
                "site count {sites} must be even and within {MIN_SITES}..={MAX_SITES}"
            )));
        }
        if !mass.is_finite() || !coupling.is_finite() {
            return Err(Error::InvalidParameter("mass and coupling must be finite".into()));
        }
        Ok(Self { sites, mass, coupling })
    }

    pub fn dim(&self) -> usize {
        1 << self.sites
    }
}

/// The three non-commuting pieces: even-bond hopping, odd-bond hopping,
/// and the diagonal mass plus interaction terms.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianTerms {
    pub alpha: HermitianOperator,
    pub beta: HermitianOperator,
    pub gamma: HermitianOperator,
}

impl HamiltonianTerms {
    pub fn dim(&self) -> usize {
        self.alpha.dim()
    }

    pub fn total(&self) -> HermitianOperator {
        self.alpha.plus(&self.beta).and_then(|s| s.plus(&self.gamma)).expect("terms share a dimension")
    }

    /// Adds `shift * I` to the diagonal term.
    pub fn shifted(&self, shift: f64) -> Self {
        Self { alpha: self.alpha.clone(), beta: self.beta.clone(), gamma: self.gamma.shifted(shift) }
    }
}

#[derive(Debug, Clone)]
pub struct ThirringModel {
    pub params: ThirringParams,
    pub hamiltonian: HermitianOperator,
    pub terms: HamiltonianTerms,
}

fn spin_up(index: usize, site: usize) -> bool {
    index & (1 << site) == 0
}

fn hopping(sites: usize, bonds: impl Iterator<Item = usize>) -> HermitianOperator {
    let dim = 1usize << sites;
    let mut h = CMatrix::zeros(dim, dim);
    for n in bonds {
        let mask = (1usize << n) | (1usize << (n + 1));
        for idx in 0..dim {
            if spin_up(idx, n) != spin_up(idx, n + 1) {
                h[(idx ^ mask, idx)] += C64::new(-0.5, 0.0);
            }
        }
    }
    HermitianOperator::new(h).expect("hopping is symmetric")
}

pub fn build_hamiltonian(params: ThirringParams) -> Result<ThirringModel> {
    let params = ThirringParams::new(params.sites, params.mass, params.coupling)?;
    let n = params.sites;
    let dim = params.dim();
    check_amplitude_cap(dim * dim)?;
    let alpha = hopping(n, (0..n - 1).filter(|b| b % 2 == 0));
    let beta = hopping(n, (0..n - 1).filter(|b| b % 2 == 1));
    let diag: Vec<f64> = (0..dim)
        .map(|idx| {
            let occ = |s: usize| if spin_up(idx, s) { 1.0 } else { 0.0 };
            let mass: f64 = (0..n).map(|s| if s % 2 == 0 { occ(s) } else { -occ(s) }).sum();
            let inter: f64 = (0..n - 1).map(|s| occ(s) * occ(s + 1)).sum();
            params.mass * mass + params.coupling * inter
        })
        .collect();
    let gamma = HermitianOperator::from_real_diagonal(&diag);
    let terms = HamiltonianTerms { alpha, beta, gamma };
    Ok(ThirringModel { params, hamiltonian: terms.total(), terms })
}

/// `sum_n S^z_n` as a diagonal operator.
pub fn total_sz(sites: usize) -> HermitianOperator {
    let diag: Vec<f64> = (0..1usize << sites)
        .map(|idx| (0..sites).map(|s| if spin_up(idx, s) { 0.5 } else { -0.5 }).sum())
        .collect();
    HermitianOperator::from_real_diagonal(&diag)
}

/// `(1/N) sum_i (-1)^(i+1) Z_i`.
pub fn chiral_condensate(sites: usize) -> Result<HermitianOperator> {
    if sites == 0 {
        return Err(Error::InvalidParameter("chiral condensate needs at least one site".into()));
    }
    check_amplitude_cap(1 << sites)?;
    let diag: Vec<f64> = (0..1usize << sites)
        .map(|idx| {
            let sum: f64 = (0..sites)
                .map(|i| {
                    let z = if spin_up(idx, i) { 1.0 } else { -1.0 };
                    if i % 2 == 0 { -z } else { z }
                })
                .sum();
            sum / sites as f64
        })
        .collect();
    Ok(HermitianOperator::from_real_diagonal(&diag))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrotterConfig {
    pub d: u32,
    pub dt: f64,
}

impl TrotterConfig {
    /// `d` steps covering the evolution `e^{2 pi i lambda H}`.
    pub fn new(d: u32, lambda: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("Trotter depth d must be at least 1".into()));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("lambda = {lambda} must be positive")));
        }
        Ok(Self { d, dt: 2.0 * PI * lambda / d as f64 })
    }
}

/// `e^{i dt/2 Ha} e^{i dt/2 Hb} e^{i dt Hg} e^{i dt/2 Hb} e^{i dt/2 Ha}`.
pub fn suzuki2_step(terms: &HamiltonianTerms, cfg: &TrotterConfig) -> Result<UnitaryOperator> {
    suzuki2_step_dt(terms, cfg.dt)
}

pub fn suzuki2_step_dt(terms: &HamiltonianTerms, dt: f64) -> Result<UnitaryOperator> {
    let a = expi_hermitian(&terms.alpha, dt / 2.0)?;
    let b = expi_hermitian(&terms.beta, dt / 2.0)?;
    let g = expi_hermitian(&terms.gamma, dt)?;
    let product = a.matrix() * b.matrix() * g.matrix() * b.matrix() * a.matrix();
    UnitaryOperator::new(product)
}

/// `d / (2 pi lambda) * L` with `e^{iL} = u_step`.
pub fn effective_hamiltonian(u_step: &UnitaryOperator, d: u32, lambda: f64) -> Result<HermitianOperator> {
    if d == 0 || !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("d = {d}, lambda = {lambda}")));
    }
    let log = principal_log_unitary(u_step)?;
    Ok(log.scaled(d as f64 / (2.0 * PI * lambda)))
}

/// Mean and population deviation of the chiral condensate along
/// `n = 1..=n_samples` Trotter steps.
pub fn sigma_chi(state: &QuantumState, u_step: &UnitaryOperator, n_samples: usize) -> Result<(f64, f64)> {
    let chi = chiral_condensate(state.n_qubits())?;
    stroboscopic_spread(state, u_step, &chi, n_samples)
}

/// Stroboscopic expectations `O_n = <psi| U^-n obs U^n |psi>` for
/// `n = 1..=n_samples`; returns their mean and population deviation.
pub fn stroboscopic_spread(state: &QuantumState, u_step: &UnitaryOperator, chi: &HermitianOperator, n_samples: usize) -> Result<(f64, f64)> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("sigma_chi needs at least one sample".into()));
    }
    if chi.dim() != state.dim() {
        return Err(Error::DimensionMismatch { expected: state.dim(), actual: chi.dim() });
    }
    let mut psi = state.clone();
    let mut values = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        psi = apply_unitary(&psi, u_step)?;
        values.push(psi.expectation(chi));
    }
    let mean = values.iter().sum::<f64>() / n_samples as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n_samples as f64;
    Ok((mean, var.sqrt()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzParams {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl AnsatzParams {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        if alpha.len() != beta.len() || beta.len() != gamma.len() {
            return Err(Error::InvalidParameter(format!(
                "angle vectors differ in length ({}, {}, {})",
                alpha.len(),
                beta.len(),
                gamma.len()
            )));
        }
        Ok(Self { alpha, beta, gamma })
    }

    pub fn zeros(layers: usize) -> Self {
        Self { alpha: vec![0.0; layers], beta: vec![0.0; layers], gamma: vec![0.0; layers] }
    }

    pub fn layers(&self) -> usize {
        self.alpha.len()
    }

    /// Interleaved `(alpha_j, beta_j, gamma_j)` per layer.
    pub fn to_flat(&self) -> Vec<f64> {
        (0..self.layers()).flat_map(|j| [self.alpha[j], self.beta[j], self.gamma[j]]).collect()
    }

    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if flat.len() % 3 != 0 {
            return Err(Error::InvalidParameter(format!("{} angles is not a multiple of 3", flat.len())));
        }
        let layer = |k: usize| flat.iter().skip(k).step_by(3).copied().collect::<Vec<_>>();
        Self::new(layer(0), layer(1), layer(2))
    }
}

/// Precomputed eigenpairs of the three terms, for repeated ansatz evaluation.
#[derive(Debug, Clone)]
pub struct Ansatz {
    terms: HamiltonianTerms,
    alpha: EigenDecomposition,
    beta: EigenDecomposition,
    gamma: EigenDecomposition,
}

impl Ansatz {
    pub fn new(terms: &HamiltonianTerms) -> Result<Self> {
        Ok(Self {
            terms: terms.clone(),
            alpha: eig_hermitian(&terms.alpha)?,
            beta: eig_hermitian(&terms.beta)?,
            gamma: eig_hermitian(&terms.gamma)?,
        })
    }

    /// `prod_j e^{-i gamma_j Hg} e^{-i beta_j Hb} e^{-i alpha_j Ha} |reference>`,
    /// layer 1 acting first.
    pub fn state(&self, params: &AnsatzParams, reference: &QuantumState) -> Result<QuantumState> {
        if reference.dim() != self.terms.dim() {
            return Err(Error::DimensionMismatch { expected: self.terms.dim(), actual: reference.dim() });
        }
        let mut v: CVector = reference.amplitudes().clone();
        for j in 0..params.layers() {
            for (eig, angle) in [(&self.alpha, params.alpha[j]), (&self.beta, params.beta[j]), (&self.gamma, params.gamma[j])] {
                if angle != 0.0 {
                    v = expi_from_eigen(eig, -angle).matrix() * v;
                }
            }
        }
        QuantumState::from_amplitudes(v)?.normalized()
    }

    pub fn energy(&self, params: &AnsatzParams, reference: &QuantumState, h: &HermitianOperator) -> Result<f64> {
        Ok(self.state(params, reference)?.expectation(h))
    }
}

pub fn variational_state(params: &AnsatzParams, terms: &HamiltonianTerms, reference: &QuantumState) -> Result<QuantumState> {
    Ansatz::new(terms)?.state(params, reference)
}

/// Computational-basis ground state of the diagonal term; ties go to the
/// lowest index.
pub fn reference_state(terms: &HamiltonianTerms) -> Result<QuantumState> {
    let g = terms.gamma.matrix();
    let n = g.nrows();
    let best = (0..n).min_by(|&a, &b| g[(a, a)].re.total_cmp(&g[(b, b)].re)).unwrap_or(0);
    QuantumState::basis(n.trailing_zeros() as usize, best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariationalResult {
    pub params: AnsatzParams,
    pub energy: f64,
    pub reference_energy: f64,
    pub ground_energy: f64,
    /// `|<psi_0|phi>|` against the exact ground state.
    pub overlap: f64,
    pub reference_overlap: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeOptions {
    pub restarts: usize,
    pub seed: u64,
    pub nelder_mead: NelderMeadOptions,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self { restarts: DEFAULT_RESTARTS, seed: DEFAULT_SEED, nelder_mead: NelderMeadOptions::default() }
    }
}

/// Minimizes the energy of the layered ansatz by Nelder-Mead. The first
/// start is all-zero angles; the rest are uniform in `[-pi, pi)` from a
/// seeded ChaCha8 stream. Never returns parameters worse than the reference.
pub fn optimize_overlap(
    terms: &HamiltonianTerms,
    layers: usize,
    reference: &QuantumState,
    opts: &OptimizeOptions,
) -> Result<VariationalResult> {
    if layers == 0 {
        return Err(Error::InvalidParameter("ansatz needs at least one layer".into()));
    }
    let h = terms.total();
    let ansatz = Ansatz::new(terms)?;
    let reference_energy = reference.expectation(&h);
    let objective = |x: &[f64]| {
        AnsatzParams::from_flat(x)
            .and_then(|p| ansatz.energy(&p, reference, &h))
            .unwrap_or(f64::INFINITY)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best_x = vec![0.0; 3 * layers];
    let mut best_value = reference_energy;
    let mut evaluations = 0;
    for restart in 0..opts.restarts.max(1) {
        let start: Vec<f64> = if restart == 0 {
            vec![0.0; 3 * layers]
        } else {
            (0..3 * layers).map(|_| rng.random_range(-PI..PI)).collect()
        };
        let found = nelder_mead(objective, &start, &opts.nelder_mead);
        evaluations += found.evaluations;
        if found.value < best_value {
            best_value = found.value;
            best_x = found.x;
        }
    }

    let params = AnsatzParams::from_flat(&best_x)?;
    let state = ansatz.state(&params, reference)?;
    let eig = eig_hermitian(&h)?;
    let ground = eig.ground_state();
    Ok(VariationalResult {
        energy: state.expectation(&h),
        reference_energy,
        ground_energy: eig.ground_energy(),
        overlap: ground.inner(&state).norm(),
        reference_overlap: ground.inner(reference).norm(),
        params,
        evaluations,
    })
}
