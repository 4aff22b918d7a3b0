use std::fs;
use std::path::Path;

use serde::Deserialize;
use wqpe_core::statevector::{CMatrix, CVector, HermitianOperator, QuantumState, C64};
use wqpe_core::thirring::ThirringParams;

use crate::CliError;

/// Real and imaginary parts stored side by side.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexMatrix {
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexVector {
    pub re: Vec<f64>,
    #[serde(default)]
    pub im: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelFile {
    Thirring { sites: usize, mass: f64, coupling: f64 },
    Matrix { hamiltonian: ComplexMatrix, state: Option<ComplexVector> },
}

impl ModelFile {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    pub fn thirring(&self) -> Result<ThirringParams, CliError> {
        match *self {
            ModelFile::Thirring { sites, mass, coupling } => Ok(ThirringParams::new(sites, mass, coupling)?),
            ModelFile::Matrix { .. } => Err(CliError::Input("expected a thirring model file".into())),
        }
    }
}

impl ComplexMatrix {
    pub fn to_hermitian(&self) -> Result<HermitianOperator, CliError> {
        let n = self.re.len();
        if n == 0 || self.re.iter().any(|r| r.len() != n) {
            return Err(CliError::Input("hamiltonian.re must be a non-empty square array".into()));
        }
        if let Some(im) = &self.im {
            if im.len() != n || im.iter().any(|r| r.len() != n) {
                return Err(CliError::Input("hamiltonian.im must match hamiltonian.re".into()));
            }
        }
        let m = CMatrix::from_fn(n, n, |i, j| C64::new(self.re[i][j], self.im.as_ref().map_or(0.0, |im| im[i][j])));
        Ok(HermitianOperator::new(m)?)
    }
}

impl ComplexVector {
    pub fn to_state(&self) -> Result<QuantumState, CliError> {
        if let Some(im) = &self.im {
            if im.len() != self.re.len() {
                return Err(CliError::Input("state.im must match state.re".into()));
            }
        }
        let v = CVector::from_fn(self.re.len(), |i, _| C64::new(self.re[i], self.im.as_ref().map_or(0.0, |im| im[i])));
        Ok(QuantumState::from_amplitudes(v)?.normalized()?)
    }
}
