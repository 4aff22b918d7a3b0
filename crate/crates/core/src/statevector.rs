//! Dense complex linear algebra for exact state-vector simulation.
//!
//! Qubit 0 is the least significant bit of a basis-state index. Ancilla
//! registers use the almost-centered labelling: storage index `k` in
//! `0..2^m` carries label `x = k` for `k < 2^(m-1)` and `x = k - 2^m`
//! otherwise.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const DEFAULT_MAX_AMPLITUDES: usize = 1 << 26;
pub const MAX_QFT_QUBITS: u32 = 14;

const HERMITIAN_TOL: f64 = 1e-12;
const UNITARY_TOL: f64 = 1e-10;
const BRANCH_CUT_TOL: f64 = 1e-9;

/// Largest number of amplitudes any simulated register may hold.
///
/// Reads `WQPE_MAX_AMPLITUDES` once; falls back to 2^26.
pub fn max_amplitudes() -> usize {
    static CAP: OnceLock<usize> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var("WQPE_MAX_AMPLITUDES")
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_MAX_AMPLITUDES)
    })
}

pub fn check_amplitude_cap(requested: usize) -> Result<()> {
    let cap = max_amplitudes();
    if requested > cap {
        return Err(Error::AmplitudeCap { requested, cap });
    }
    Ok(())
}

/// Centered label of storage index `k` in an `m`-qubit register.
pub fn centered_label(k: usize, m: u32) -> i64 {
    let size = 1usize << m;
    if k < size / 2 {
        k as i64
    } else {
        k as i64 - size as i64
    }
}

/// Storage index of centered label `x` (any integer, reduced mod 2^m).
pub fn storage_index(x: i64, m: u32) -> usize {
    let size = 1i64 << m;
    x.rem_euclid(size) as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    n_qubits: usize,
    amplitudes: CVector,
}

impl QuantumState {
    pub fn new(n_qubits: usize, amplitudes: CVector) -> Result<Self> {
        let dim = 1usize
            .checked_shl(n_qubits as u32)
            .ok_or(Error::AmplitudeCap { requested: usize::MAX, cap: max_amplitudes() })?;
        check_amplitude_cap(dim)?;
        if amplitudes.len() != dim {
            return Err(Error::BadStateLength { len: amplitudes.len(), n_qubits });
        }
        Ok(Self { n_qubits, amplitudes })
    }

    /// Infers the qubit count from the vector length.
    pub fn from_amplitudes(amplitudes: CVector) -> Result<Self> {
        let len = amplitudes.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::BadStateLength { len, n_qubits: len.max(1).ilog2() as usize });
        }
        Self::new(len.trailing_zeros() as usize, amplitudes)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amps = CVector::zeros(dim);
        amps[index] = C64::new(1.0, 0.0);
        Self::new(n_qubits, amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn normalize(&mut self) -> Result<f64> {
        let norm = self.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidParameter(format!("cannot normalize a state of norm {norm}")));
        }
        self.amplitudes.unscale_mut(norm);
        Ok(norm)
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// `<self|other>`
    pub fn inner(&self, other: &QuantumState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn fidelity(&self, other: &QuantumState) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// `min_alpha || |self> - e^{i alpha} |other> ||`, formed from the
    /// difference vector so small distances keep full relative precision.
    pub fn phase_aligned_distance(&self, other: &QuantumState) -> f64 {
        let overlap = other.inner(self);
        let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { C64::new(1.0, 0.0) };
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| (a - phase * b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn expectation(&self, op: &HermitianOperator) -> f64 {
        let applied = op.matrix() * &self.amplitudes;
        self.amplitudes.dotc(&applied).re
    }
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

fn ensure_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(())
}

/// Hermitian matrix: Hamiltonians, effective Hamiltonians, observables.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator(CMatrix);

impl HermitianOperator {
    /// Validates Hermiticity to 1e-12 relative to the largest entry.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        ensure_square(&matrix)?;
        let deviation = hermitian_deviation(&matrix);
        if deviation > HERMITIAN_TOL * max_abs(&matrix).max(1.0) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self(matrix))
    }

    /// Replaces the matrix by `(A + A^dagger) / 2`.
    pub fn symmetrized(matrix: CMatrix) -> Result<Self> {
        ensure_square(&matrix)?;
        let adj = matrix.adjoint();
        Ok(Self((matrix + adj).scale(0.5)))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = CVector::from_iterator(diag.len(), diag.iter().map(|&v| C64::new(v, 0.0)));
        Self(CMatrix::from_diagonal(&d))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.map(|z| z * factor))
    }

    pub fn shifted(&self, shift: f64) -> Self {
        let mut m = self.0.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += C64::new(shift, 0.0);
        }
        Self(m)
    }

    pub fn plus(&self, other: &HermitianOperator) -> Result<Self> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: other.dim() });
        }
        Ok(Self(&self.0 + &other.0))
    }

    pub fn minus(&self, other: &HermitianOperator) -> Result<Self> {
        self.plus(&other.scaled(-1.0))
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> Result<f64> {
        let eig = eig_hermitian(self)?;
        Ok(eig.eigenvalues.iter().fold(0.0, |acc: f64, e| acc.max(e.abs())))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOperator(CMatrix);

impl UnitaryOperator {
    /// Validates `U U^dagger = I` to 1e-10 in Frobenius norm, which
    /// dominates the spectral norm.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        ensure_square(&matrix)?;
        let n = matrix.nrows();
        let deviation = (&matrix * matrix.adjoint() - CMatrix::identity(n, n)).norm();
        if deviation > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self(matrix))
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn compose(&self, then: &UnitaryOperator) -> Result<Self> {
        if then.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: then.dim() });
        }
        Ok(Self(&then.0 * &self.0))
    }

    pub fn power(&self, exponent: u32) -> Self {
        let mut acc = CMatrix::identity(self.dim(), self.dim());
        for _ in 0..exponent {
            acc = &self.0 * acc;
        }
        Self(acc)
    }
}

/// Eigenpairs of a Hermitian operator, eigenvalues ascending, eigenvectors
/// as orthonormal columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn gap(&self) -> f64 {
        if self.eigenvalues.len() < 2 {
            return 0.0;
        }
        self.eigenvalues[1] - self.eigenvalues[0]
    }

    pub fn eigenstate(&self, i: usize) -> QuantumState {
        let col = self.eigenvectors.column(i).into_owned();
        QuantumState::from_amplitudes(col).expect("eigenvector length is a power of two")
    }

    pub fn ground_state(&self) -> QuantumState {
        self.eigenstate(0)
    }

    /// Amplitudes `<psi_i|state>` in the eigenbasis.
    pub fn coefficients(&self, state: &QuantumState) -> Result<CVector> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: state.dim() });
        }
        Ok(self.eigenvectors.adjoint() * state.amplitudes())
    }

    /// `V diag(f(E_i)) V^dagger`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (j, &e) in self.eigenvalues.iter().enumerate() {
            let factor = f(e);
            for z in scaled.column_mut(j).iter_mut() {
                *z *= factor;
            }
        }
        scaled * self.eigenvectors.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map_spectrum(|e| C64::new(e, 0.0))
    }
}

pub fn apply_unitary(state: &QuantumState, u: &UnitaryOperator) -> Result<QuantumState> {
    if u.dim() != state.dim() {
        return Err(Error::DimensionMismatch { expected: state.dim(), actual: u.dim() });
    }
    QuantumState::new(state.n_qubits(), u.matrix() * state.amplitudes())
}

pub fn eig_hermitian(h: &HermitianOperator) -> Result<EigenDecomposition> {
    let n = h.dim();
    if n == 0 {
        return Ok(EigenDecomposition { eigenvalues: vec![], eigenvectors: CMatrix::zeros(0, 0) });
    }
    let eig = SymmetricEigen::try_new(h.matrix().clone(), f64::EPSILON, 0)
        .ok_or(Error::NoConvergence)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(EigenDecomposition { eigenvalues, eigenvectors })
}

/// `e^{i * scale * h}` through the eigendecomposition of `h`.
pub fn expi_hermitian(h: &HermitianOperator, scale: f64) -> Result<UnitaryOperator> {
    let eig = eig_hermitian(h)?;
    Ok(expi_from_eigen(&eig, scale))
}

pub fn expi_from_eigen(eig: &EigenDecomposition, scale: f64) -> UnitaryOperator {
    UnitaryOperator(eig.map_spectrum(|e| C64::from_polar(1.0, scale * e)))
}

/// Hermitian `L` with `e^{iL} = u` and spectrum in `(-pi, pi)`.
///
/// Uses the complex Schur form, which is diagonal for a normal matrix, so
/// the Schur vectors stay orthonormal inside degenerate eigenspaces.
pub fn principal_log_unitary(u: &UnitaryOperator) -> Result<HermitianOperator> {
    let n = u.dim();
    let schur = Schur::try_new(u.matrix().clone(), f64::EPSILON, 0).ok_or(Error::NoConvergence)?;
    let (q, t) = schur.unpack();
    let mut phases = Vec::with_capacity(n);
    for i in 0..n {
        let phase = t[(i, i)].arg();
        if phase.abs() > PI - BRANCH_CUT_TOL {
            return Err(Error::BranchCut { phase });
        }
        phases.push(phase);
    }
    let mut scaled = q.clone();
    for (j, &phase) in phases.iter().enumerate() {
        for z in scaled.column_mut(j).iter_mut() {
            *z *= phase;
        }
    }
    HermitianOperator::symmetrized(scaled * q.adjoint())
}

fn qft_range(m: u32) -> Result<()> {
    if !(1..=MAX_QFT_QUBITS).contains(&m) {
        return Err(Error::AncillaRange { m, min: 1, max: MAX_QFT_QUBITS });
    }
    Ok(())
}

/// Almost-centered QFT on `m` qubits in storage order.
///
/// Entry `(k, n)` is `e^{-2 pi i x q / 2^m} / sqrt(2^m)` with `q`, `x` the
/// centered labels of `k`, `n`; `inverse` flips the sign of the exponent.
/// The product `x q` is reduced modulo `2^m` as an integer before the
/// exponential, so entries are bit-identical to the uncentered DFT.
pub fn centered_qft(m: u32, inverse: bool) -> Result<UnitaryOperator> {
    qft_range(m)?;
    check_amplitude_cap(1usize << (2 * m))?;
    let size = 1usize << m;
    let sign = if inverse { 1.0 } else { -1.0 };
    let norm = 1.0 / (size as f64).sqrt();
    let table: Vec<C64> = (0..size)
        .map(|r| C64::from_polar(norm, sign * 2.0 * PI * r as f64 / size as f64))
        .collect();
    let mat = CMatrix::from_fn(size, size, |k, n| {
        let q = centered_label(k, m);
        let x = centered_label(n, m);
        table[storage_index(x * q, m)]
    });
    Ok(UnitaryOperator(mat))
}

/// Largest singular value of a general complex matrix.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    m.clone().singular_values().iter().fold(0.0, |acc: f64, &s| acc.max(s))
}

/// Pauli matrices and single-qubit gates used by tests and circuits.
pub mod gates {
    use super::{CMatrix, C64};

    pub fn pauli_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)])
    }

    pub fn pauli_y() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0)])
    }

    pub fn pauli_z() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-1.0, 0.0)])
    }

    pub fn hadamard() -> CMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CMatrix::from_row_slice(2, 2, &[C64::new(s, 0.0), C64::new(s, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0)])
    }
}


#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_leaves_state_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = random_state(&mut rng, 3);
        let out = apply_unitary(&psi, &UnitaryOperator::identity(8)).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn pauli_x_flips_zero() {
        let zero = QuantumState::basis(1, 0).unwrap();
        let x = UnitaryOperator::new(gates::pauli_x()).unwrap();
        let out = apply_unitary(&zero, &x).unwrap();
        assert_eq!(out, QuantumState::basis(1, 1).unwrap());
    }

    #[test]
    fn unitary_then_adjoint_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let u = random_unitary(&mut rng, 16);
            let psi = random_state(&mut rng, 4);
            let there = apply_unitary(&psi, &u).unwrap();
            assert!((there.norm() - 1.0).abs() < 1e-12);
            let back = apply_unitary(&there, &u.adjoint()).unwrap();
            assert!((back.amplitudes() - psi.amplitudes()).norm() < 1e-12);
        }
    }

    #[test]
    fn apply_unitary_rejects_mismatch() {
        let psi = QuantumState::basis(2, 0).unwrap();
        let err = apply_unitary(&psi, &UnitaryOperator::identity(8)).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 4, actual: 8 });
    }

    #[test]
    fn state_length_must_be_power_of_two() {
        assert!(QuantumState::from_amplitudes(CVector::zeros(3)).is_err());
        assert!(QuantumState::new(2, CVector::zeros(8)).is_err());
    }

    #[test]
    fn eig_of_diagonal_is_sorted() {
        let h = HermitianOperator::from_real_diagonal(&[3.0, 1.0, 2.0]);
        let eig = eig_hermitian(&h).unwrap();
        assert_eq!(eig.eigenvalues.len(), 3);
        for (got, want) in eig.eigenvalues.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn eig_of_pauli_x() {
        let h = HermitianOperator::new(gates::pauli_x()).unwrap();
        let eig = eig_hermitian(&h).unwrap();
        assert!((eig.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn single_excitation_block_ground_energy() {
        // [[1, -1/2], [-1/2, -1]] has eigenvalues +-sqrt(5)/2.
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(-0.5, 0.0), c(-0.5, 0.0), c(-1.0, 0.0)]);
        let eig = eig_hermitian(&HermitianOperator::new(m).unwrap()).unwrap();
        assert!((eig.ground_energy() + 5f64.sqrt() / 2.0).abs() < 1e-14);
    }

    #[test]
    fn non_hermitian_input_rejected() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(HermitianOperator::new(m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn eig_reconstruction_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..100 {
            let dim = 1 + (trial * 7) % 64;
            let h = random_hermitian(&mut rng, dim);
            let eig = eig_hermitian(&h).unwrap();
            let scale = spectral_norm(h.matrix());
            let err = spectral_norm(&(eig.reconstruct() - h.matrix()));
            assert!(err < 1e-10 * scale, "dim {dim}: {err}");
            assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            let gram = eig.eigenvectors.adjoint() * &eig.eigenvectors;
            assert!((gram - CMatrix::identity(dim, dim)).norm() < 1e-12);
        }
    }

    #[test]
    fn centered_qft_m1_is_hadamard() {
        let q = centered_qft(1, false).unwrap();
        let h = gates::hadamard();
        assert!((q.matrix() - &h).norm() < 1e-15);
    }

    #[test]
    fn centered_qft_inverse_pair() {
        let f = centered_qft(6, false).unwrap();
        let g = centered_qft(6, true).unwrap();
        let prod = f.matrix() * g.matrix();
        assert!((prod - CMatrix::identity(64, 64)).norm() < 1e-12);
    }

    #[test]
    fn centered_qft_unitary_for_small_m() {
        for m in 1..=10 {
            let f = centered_qft(m, false).unwrap();
            let n = 1 << m;
            let dev = spectral_norm(&(f.matrix() * f.matrix().adjoint() - CMatrix::identity(n, n)));
            assert!(dev < 1e-11, "m = {m}: {dev}");
        }
    }

    #[test]
    fn centered_qft_is_permuted_standard_dft() {
        let m = 4;
        let size = 16usize;
        let norm = 1.0 / 4.0;
        // Standard DFT on 0..2^m-1 with the same integer phase reduction.
        let standard = CMatrix::from_fn(size, size, |k, n| {
            C64::from_polar(norm, -2.0 * PI * ((k * n) % size) as f64 / size as f64)
        });
        // The centered matrix laid out in label order -2^(m-1)..2^(m-1)-1.
        let by_label = CMatrix::from_fn(size, size, |row, col| {
            let q = row as i64 - 8;
            let x = col as i64 - 8;
            C64::from_polar(norm, -2.0 * PI * (x * q).rem_euclid(16) as f64 / size as f64)
        });
        let permuted = CMatrix::from_fn(size, size, |row, col| {
            standard[(storage_index(row as i64 - 8, m), storage_index(col as i64 - 8, m))]
        });
        assert_eq!(permuted, by_label);
        let centered = centered_qft(m, false).unwrap();
        let centered_by_label = CMatrix::from_fn(size, size, |row, col| {
            centered.matrix()[(storage_index(row as i64 - 8, m), storage_index(col as i64 - 8, m))]
        });
        assert_eq!(centered_by_label, by_label);
    }

    #[test]
    fn centered_qft_range_checked() {
        assert!(matches!(centered_qft(0, false), Err(Error::AncillaRange { .. })));
        assert!(matches!(centered_qft(15, false), Err(Error::AncillaRange { .. })));
    }

    #[test]
    fn log_of_identity_is_zero() {
        let l = principal_log_unitary(&UnitaryOperator::identity(4)).unwrap();
        assert!(l.matrix().norm() < 1e-15);
    }

    #[test]
    fn log_of_diagonal_phases() {
        let d = CVector::from_vec(vec![C64::from_polar(1.0, PI / 3.0), C64::from_polar(1.0, -PI / 4.0)]);
        let u = UnitaryOperator::new(CMatrix::from_diagonal(&d)).unwrap();
        let l = principal_log_unitary(&u).unwrap();
        assert!((l.matrix()[(0, 0)] - c(PI / 3.0, 0.0)).norm() < 1e-14);
        assert!((l.matrix()[(1, 1)] - c(-PI / 4.0, 0.0)).norm() < 1e-14);
        assert!(l.matrix()[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn log_rejects_branch_cut() {
        let d = CVector::from_vec(vec![c(-1.0, 0.0), c(1.0, 0.0)]);
        let u = UnitaryOperator::new(CMatrix::from_diagonal(&d)).unwrap();
        assert!(matches!(principal_log_unitary(&u), Err(Error::BranchCut { .. })));
    }

    #[test]
    fn log_recovers_small_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let h = random_hermitian(&mut rng, 8);
            let h = h.scaled(0.9 / h.spectral_norm().unwrap());
            let u = expi_hermitian(&h, 1.0).unwrap();
            let back = principal_log_unitary(&u).unwrap();
            assert!((back.matrix() - h.matrix()).norm() < 1e-9);
        }
    }

    #[test]
    fn exp_log_round_trip_on_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let v = random_unitary(&mut rng, 8);
            let phases: Vec<C64> = (0..8)
                .map(|_| C64::from_polar(1.0, rand::Rng::random_range(&mut rng, -PI + 0.1..PI - 0.1)))
                .collect();
            let u = v.matrix() * CMatrix::from_diagonal(&CVector::from_vec(phases)) * v.matrix().adjoint();
            let u = UnitaryOperator::new(u).unwrap();
            let l = principal_log_unitary(&u).unwrap();
            let back = expi_hermitian(&l, 1.0).unwrap();
            assert!((back.matrix() - u.matrix()).norm() < 1e-9);
            let eig = eig_hermitian(&l).unwrap();
            assert!(eig.eigenvalues.iter().all(|&e| e > -PI && e <= PI));
        }
    }

    #[test]
    fn expi_scale_zero_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let h = random_hermitian(&mut rng, 4);
        let u = expi_hermitian(&h, 0.0).unwrap();
        assert!((u.matrix() - CMatrix::identity(4, 4)).norm() < 1e-14);
    }

    #[test]
    fn expi_pauli_z_at_pi_is_minus_identity() {
        let z = HermitianOperator::new(gates::pauli_z()).unwrap();
        let u = expi_hermitian(&z, PI).unwrap();
        assert!((u.matrix() + CMatrix::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn expi_composes_additively() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = random_hermitian(&mut rng, 8);
        let (a, b) = (0.37, -1.21);
        let ua = expi_hermitian(&h, a).unwrap();
        let ub = expi_hermitian(&h, b).unwrap();
        let uab = expi_hermitian(&h, a + b).unwrap();
        assert!(spectral_norm(&(ua.matrix() * ub.matrix() - uab.matrix())) < 1e-11);
    }

    #[test]
    fn centered_labels_round_trip() {
        for m in 1..6 {
            for k in 0..(1usize << m) {
                let x = centered_label(k, m);
                assert!(x >= -(1 << (m - 1)) && x < (1 << (m - 1)));
                assert_eq!(storage_index(x, m), k);
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn unitary_application_preserves_norm(seed in any::<u64>(), n in 1usize..5) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let u = random_unitary(&mut rng, 1 << n);
                let psi = random_state(&mut rng, n);
                let out = apply_unitary(&psi, &u).unwrap();
                prop_assert!((out.norm() - 1.0).abs() < 1e-12);
            }
        }
    }
}
