use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("state length {len} is not 2^{n_qubits}")]
    BadStateLength { len: usize, n_qubits: usize },

    #[error("{requested} amplitudes exceed the cap of {cap} (set WQPE_MAX_AMPLITUDES to raise it)")]
    AmplitudeCap { requested: usize, cap: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("eigenphase {phase} lies on the branch cut at -pi")]
    BranchCut { phase: f64 },

    #[error("ancilla width m = {m} outside {min}..={max}")]
    AncillaRange { m: u32, min: u32, max: u32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigenphase {theta} outside the alias-free range [{lo}, {hi}]")]
    Aliasing { theta: f64, lo: f64, hi: f64 },

    #[error("filter annihilated the state (success probability {success:e})")]
    FilteredToNothing { success: f64 },

    #[error("initial state has zero overlap with the ground state")]
    ZeroOverlap,

    #[error("bound requires a larger gap: log argument {argument} <= 1")]
    GapTooSmall { argument: f64 },

    #[error("bound undefined at q = {q}")]
    BoundSingular { q: f64 },

    #[error("tail bound requires k = 2^(p-1) > 2, got k = {k}")]
    TailBoundRange { k: u64 },

    #[error("ground state is degenerate (gap {gap:e})")]
    DegenerateGround { gap: f64 },

    #[error("energy scan found no candidate below +0.5")]
    ScanFailed,

    #[error("eigensolver failed to converge")]
    NoConvergence,
}
