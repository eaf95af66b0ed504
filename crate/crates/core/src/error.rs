use thiserror::Error;

use crate::fock::ModeLabel;

/// Errors raised by the simulation layers (states, elements, evolution, experiments).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("state has no amplitude above the pruning threshold")]
    ZeroState,
    #[error("states occupy overlapping modes: {0:?}")]
    OverlappingModes(Vec<ModeLabel>),
    #[error("state is not normalized (norm^2 = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },
    #[error("states are defined over different mode registries")]
    RegistryMismatch,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("modes not present in registry: {0:?}")]
    MissingModes(Vec<ModeLabel>),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("mode {0} listed more than once")]
    DuplicateMode(ModeLabel),
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix deviates from unitarity by {0:e}")]
    NotUnitary(f64),
    #[error("{photons} photons exceed the cap of {cap}")]
    PhotonCapExceeded { photons: u32, cap: u32 },
    #[error("{modes} modes exceed the cap of {cap}")]
    ModeCapExceeded { modes: usize, cap: usize },
    #[error("herald specification incomplete: {0}")]
    IncompleteSpec(String),
    #[error("nothing to compose")]
    EmptyComposition,
    #[error("sweep has no points")]
    EmptySweep,
    #[error("sweep abscissae must be strictly increasing (at index {0})")]
    NotIncreasing(usize),
    #[error("degenerate fit: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
