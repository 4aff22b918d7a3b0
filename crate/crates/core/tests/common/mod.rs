#![allow(dead_code)]

use rand::Rng;
use wqpe_core::statevector::{CMatrix, CVector, HermitianOperator, QuantumState, C64};

pub fn random_complex<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_hermitian<R: Rng>(rng: &mut R, dim: usize) -> HermitianOperator {
    let a = CMatrix::from_fn(dim, dim, |_, _| random_complex(rng));
    HermitianOperator::symmetrized(a).unwrap()
}

pub fn random_state<R: Rng>(rng: &mut R, n_qubits: usize) -> QuantumState {
    let v = CVector::from_fn(1 << n_qubits, |_, _| random_complex(rng));
    QuantumState::new(n_qubits, v).unwrap().normalized().unwrap()
}
