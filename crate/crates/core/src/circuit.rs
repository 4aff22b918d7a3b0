//! Gate-level simulation of a system register coupled to an `m`-qubit
//! ancilla register.
//!
//! The combined amplitude index is `anc * D + sys`, so the ancilla occupies
//! the high bits and each ancilla value owns a contiguous system block.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};
use crate::statevector::{
    centered_label, check_amplitude_cap, CMatrix, CVector, EigenDecomposition, QuantumState,
    UnitaryOperator, C64, MAX_QFT_QUBITS,
};
use crate::windows::WindowKind;

/// How controlled powers of the evolution operator are realised.
#[derive(Debug, Clone)]
pub enum PhaseOracle {
    /// Apply `U` (or `U^dagger`) repeatedly, as a circuit would.
    Repeated(UnitaryOperator),
    /// Diagonal phases `e^{2 pi i theta_j x}` in a known eigenbasis.
    Spectral { phases: Vec<f64>, vectors: CMatrix },
}

impl PhaseOracle {
    /// Fast path for `U = e^{2 pi i lambda (H + shift)}` from the eigenpairs of `H`.
    pub fn from_eigen(eig: &EigenDecomposition, lambda: f64, shift: f64) -> Self {
        PhaseOracle::Spectral {
            phases: eig.eigenvalues.iter().map(|e| lambda * (e + shift)).collect(),
            vectors: eig.eigenvectors.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            PhaseOracle::Repeated(u) => u.dim(),
            PhaseOracle::Spectral { vectors, .. } => vectors.nrows(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Register {
    sys_dim: usize,
    m: u32,
    amps: Vec<C64>,
}

impl Register {
    /// `|0>_a (x) |system>`.
    pub fn new(system: &QuantumState, m: u32) -> Result<Self> {
        if !(1..=MAX_QFT_QUBITS).contains(&m) {
            return Err(Error::AncillaRange { m, min: 1, max: MAX_QFT_QUBITS });
        }
        let sys_dim = system.dim();
        let total = sys_dim
            .checked_mul(1usize << m)
            .ok_or(Error::AmplitudeCap { requested: usize::MAX, cap: crate::statevector::max_amplitudes() })?;
        check_amplitude_cap(total)?;
        let mut amps = vec![C64::new(0.0, 0.0); total];
        amps[..sys_dim].copy_from_slice(system.amplitudes().as_slice());
        Ok(Self { sys_dim, m, amps })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn sys_dim(&self) -> usize {
        self.sys_dim
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    fn anc_size(&self) -> usize {
        1 << self.m
    }

    fn check_qubit(&self, j: u32) {
        assert!(j < self.m, "ancilla qubit {j} out of range for m = {}", self.m);
    }

    /// Single-qubit gate `[[a, b], [c, d]]` on ancilla qubit `j`.
    pub fn gate(&mut self, j: u32, g: [[C64; 2]; 2]) {
        self.check_qubit(j);
        let d = self.sys_dim;
        let bit = 1usize << j;
        for anc in 0..self.anc_size() {
            if anc & bit != 0 {
                continue;
            }
            let (lo, hi) = (anc * d, (anc | bit) * d);
            for s in 0..d {
                let a0 = self.amps[lo + s];
                let a1 = self.amps[hi + s];
                self.amps[lo + s] = g[0][0] * a0 + g[0][1] * a1;
                self.amps[hi + s] = g[1][0] * a0 + g[1][1] * a1;
            }
        }
    }

    pub fn hadamard(&mut self, j: u32) {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        self.gate(j, [[h, h], [h, -h]]);
    }

    /// `R_phi(phi) = diag(1, e^{i phi})` on ancilla qubit `j`.
    pub fn phase(&mut self, j: u32, phi: f64) {
        self.check_qubit(j);
        let w = C64::from_polar(1.0, phi);
        self.scale_where(|anc| anc & (1 << j) != 0, w);
    }

    /// Controlled phase: `e^{i phi}` when ancilla qubits `a` and `b` are both set.
    pub fn controlled_phase(&mut self, a: u32, b: u32, phi: f64) {
        self.check_qubit(a);
        self.check_qubit(b);
        let mask = (1usize << a) | (1usize << b);
        let w = C64::from_polar(1.0, phi);
        self.scale_where(|anc| anc & mask == mask, w);
    }

    fn scale_where(&mut self, pred: impl Fn(usize) -> bool, w: C64) {
        let d = self.sys_dim;
        for anc in 0..self.anc_size() {
            if pred(anc) {
                for z in &mut self.amps[anc * d..(anc + 1) * d] {
                    *z *= w;
                }
            }
        }
    }

    pub fn swap(&mut self, a: u32, b: u32) {
        self.check_qubit(a);
        self.check_qubit(b);
        if a == b {
            return;
        }
        let d = self.sys_dim;
        let (ba, bb) = (1usize << a, 1usize << b);
        for anc in 0..self.anc_size() {
            if anc & ba != 0 && anc & bb == 0 {
                let other = (anc & !ba) | bb;
                for s in 0..d {
                    self.amps.swap(anc * d + s, other * d + s);
                }
            }
        }
    }

    /// Centered QFT on the ancilla from Hadamards, controlled phases and swaps.
    ///
    /// Forward maps `|n>` to `sum_k e^{-2 pi i n k / 2^m} |k> / sqrt(2^m)`,
    /// which in storage order equals the almost-centered transform.
    pub fn qft(&mut self, inverse: bool) {
        let sign = if inverse { 1.0 } else { -1.0 };
        for a in (0..self.m).rev() {
            self.hadamard(a);
            for b in (0..a).rev() {
                let phi = sign * PI / (1u64 << (a - b)) as f64;
                self.controlled_phase(a, b, phi);
            }
        }
        for i in 0..self.m / 2 {
            self.swap(i, self.m - 1 - i);
        }
    }

    /// `U^x` on the system for ancilla label `x`: `U^{2^j}` controlled by
    /// qubit `j < m-1` and `U^{-2^(m-1)}` by the top qubit.
    pub fn controlled_powers(&mut self, oracle: &PhaseOracle) -> Result<()> {
        if oracle.dim() != self.sys_dim {
            return Err(Error::DimensionMismatch { expected: self.sys_dim, actual: oracle.dim() });
        }
        match oracle {
            PhaseOracle::Repeated(u) => {
                let u_dag = u.adjoint();
                for j in 0..self.m {
                    let (op, reps) = if j + 1 == self.m { (&u_dag, 1usize << j) } else { (u, 1usize << j) };
                    self.repeat_on_controlled(j, op, reps);
                }
            }
            PhaseOracle::Spectral { phases, vectors } => self.spectral_powers(phases, vectors),
        }
        Ok(())
    }

    fn repeat_on_controlled(&mut self, j: u32, op: &UnitaryOperator, reps: usize) {
        let d = self.sys_dim;
        let controlled: Vec<usize> = (0..self.anc_size()).filter(|anc| anc & (1 << j) != 0).collect();
        let mut block = CMatrix::from_fn(d, controlled.len(), |s, c| self.amps[controlled[c] * d + s]);
        for _ in 0..reps {
            block = op.matrix() * block;
        }
        for (c, &anc) in controlled.iter().enumerate() {
            for s in 0..d {
                self.amps[anc * d + s] = block[(s, c)];
            }
        }
    }

    fn spectral_powers(&mut self, phases: &[f64], vectors: &CMatrix) {
        let d = self.sys_dim;
        let size = self.anc_size();
        let all = CMatrix::from_fn(d, size, |s, anc| self.amps[anc * d + s]);
        let mut coeffs = vectors.adjoint() * all;
        for anc in 0..size {
            let x = centered_label(anc, self.m) as f64;
            for (i, &theta) in phases.iter().enumerate() {
                // Reduce theta * x to a fraction of a turn before exponentiating.
                let turns = (theta * x).rem_euclid(1.0);
                coeffs[(i, anc)] *= C64::from_polar(1.0, 2.0 * PI * turns);
            }
        }
        let back = vectors * coeffs;
        for anc in 0..size {
            for s in 0..d {
                self.amps[anc * d + s] = back[(s, anc)];
            }
        }
    }

    /// Applies `e^{-2 pi i theta0 x}` to ancilla label `x` through `R_phi` gates.
    pub fn shift_layer(&mut self, theta0: f64) {
        let top = self.m - 1;
        self.phase(top, 2.0 * PI * (1u64 << top) as f64 * theta0);
        for l in 0..top {
            self.phase(l, -2.0 * PI * (1u64 << l) as f64 * theta0);
        }
    }

    /// Prepares the QPE window from `|0>_a`: Hadamards for the rectangular
    /// window; LSB Hadamard, inverse QFT and centering phases for the cosine.
    pub fn prepare_qpe_window(&mut self, kind: WindowKind) {
        match kind {
            WindowKind::Rectangular => {
                for j in 0..self.m {
                    self.hadamard(j);
                }
            }
            WindowKind::Cosine => {
                self.hadamard(0);
                self.qft(true);
                let size = (1u64 << self.m) as f64;
                let top = self.m - 1;
                self.phase(top, PI * (1u64 << top) as f64 / size);
                for l in 0..top {
                    self.phase(l, -PI * (1u64 << l) as f64 / size);
                }
            }
        }
    }

    /// Probability of each ancilla storage index.
    pub fn ancilla_marginal(&self) -> Vec<f64> {
        self.amps
            .chunks(self.sys_dim)
            .map(|block| block.iter().map(|z| z.norm_sqr()).sum())
            .collect()
    }

    /// Post-selects ancilla value `anc`; returns the normalized system state
    /// and the selection probability.
    pub fn postselect(&self, anc: usize) -> Result<(QuantumState, f64)> {
        let d = self.sys_dim;
        let block = CVector::from_column_slice(&self.amps[anc * d..(anc + 1) * d]);
        let prob = block.norm_squared();
        if !(prob > 1e-300) {
            return Err(Error::FilteredToNothing { success: prob });
        }
        let state = QuantumState::from_amplitudes(block.unscale(prob.sqrt()))?;
        Ok((state, prob))
    }
}

/// Full windowed QPE circuit; returns the ancilla marginal in storage order.
pub fn qpe_circuit_marginal(input: &QuantumState, oracle: &PhaseOracle, m: u32, kind: WindowKind) -> Result<Vec<f64>> {
    let mut reg = Register::new(input, m)?;
    reg.prepare_qpe_window(kind);
    reg.controlled_powers(oracle)?;
    reg.qft(false);
    Ok(reg.ancilla_marginal())
}

/// One round of the filtering circuit centred at `theta0`, post-selected on
/// the all-zero ancilla.
pub fn filter_circuit(
    input: &QuantumState,
    oracle: &PhaseOracle,
    m: u32,
    kind: WindowKind,
    theta0: f64,
) -> Result<(QuantumState, f64)> {
    let mut reg = Register::new(input, m)?;
    match kind {
        WindowKind::Rectangular => {
            for j in 0..m {
                reg.hadamard(j);
            }
        }
        WindowKind::Cosine => {
            reg.hadamard(0);
            reg.qft(true);
        }
    }
    reg.shift_layer(theta0);
    reg.controlled_powers(oracle)?;
    reg.qft(false);
    if kind == WindowKind::Cosine {
        reg.hadamard(0);
    }
    reg.postselect(0)
}
