//! Error type shared by the spectral substrate.

use thiserror::Error;

/// Everything that can go wrong below the construction layer.
#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("grid size {0} is not a power of two >= 8")]
    BadGridSize(usize),

    #[error("grid size mismatch: {0} vs {1}")]
    GridMismatch(usize, usize),

    #[error("band of outer radius {outer:.1} unresolved on grid with max frequency {max_freq} (lambda = {lambda})")]
    BandUnresolved {
        lambda: f64,
        outer: f64,
        max_freq: usize,
    },

    #[error("low-pass cutoff 2^{{q+1}} = {cutoff} exceeds grid max frequency {max_freq}")]
    CutoffUnresolved { cutoff: u64, max_freq: usize },

    #[error("field has nonzero mean (relative size {rel:.3e}); inverse divergence requires mean zero")]
    NonzeroMean { rel: f64 },

    #[error("spectral mass {rel:.3e} outside the expected band support")]
    OutsideBand { rel: f64 },

    #[error("multiplier is odd: the even parts m(xi) + m(-xi) vanish on every lattice direction searched")]
    OddMultiplier,

    #[error("direction pair is singular: |det [A|B]| = {det:.3e} <= 1e-10")]
    SingularPair { det: f64 },

    #[error("symbol `{name}` violates {what} at xi = ({xi0:.4}, {xi1:.4}) by {err:.3e}")]
    SymbolInvariant {
        name: String,
        what: &'static str,
        xi0: f64,
        xi1: f64,
        err: f64,
    },

    #[error("unknown builtin symbol `{0}`")]
    UnknownSymbol(String),

    #[error("symbol expression error: {0}")]
    Expr(String),

    #[error("snapshot format error: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SpectralError>;
