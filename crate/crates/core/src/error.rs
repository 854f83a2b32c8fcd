//! Error taxonomy for the construction layer.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error(transparent)]
    Spectral(#[from] scalarforge_spectral::SpectralError),

    /// A transported phase gradient left its plateau |∇ξ − ∇ξ̂| ≤ |∇ξ̂|/4.
    #[error("phase gradient escaped its plateau: index (k={k}, sign={sign}), worst relative drift {drift:.3e} at t={t:.6}")]
    PhaseEscape { k: i64, sign: i8, drift: f64, t: f64 },

    /// The measured amplitude correction exceeded 1/2, so (1+ε)^{1/2} is no
    /// longer tame; the energy profile or K is too small for this stress.
    #[error("amplitude correction too large: sup|eps| = {sup:.4} > 1/2 at t={t:.6}")]
    EpsilonTooLarge { sup: f64, t: f64 },

    /// Levels claimed for an input do not hold on inspection.
    #[error("input level check failed: {what} measured {measured:.4e} exceeds budget {budget:.4e}")]
    LevelsViolated {
        what: &'static str,
        measured: f64,
        budget: f64,
    },

    /// The balance-law residual of a finished step failed its gate.
    #[error("defect check failed: relative H^-1 defect {rel:.3e} exceeds {tol:.1e} at t={t:.6}")]
    DefectExceeded { rel: f64, tol: f64, t: f64 },

    /// Time mollification scale must stay below the advective time.
    #[error("time mollification scale eps_t={eps_t:.4e} is not below tau_hat={tau_hat:.4e}")]
    TimeScaleOrder { eps_t: f64, tau_hat: f64 },

    /// The η partition does not cover the requested interval.
    #[error("amplitude partition leaves [{t0:.4}, {t1:.4}] uncovered (min sum of squares {min_sum:.3e})")]
    PartitionGap { t0: f64, t1: f64, min_sum: f64 },

    /// The conservation identities only apply to purely odd multipliers.
    #[error("symbol `{0}` is not odd: its even part is {1:.3e} at its largest sample")]
    NotOdd(String, f64),

    /// Degenerate-constraint tests need ∇φ parallel to the chosen direction.
    #[error("test function gradient is not parallel to xi0: orthogonal residue {0:.3e}")]
    NotParallel(f64),

    /// Iteration parameters failed a schedule precondition.
    #[error("schedule rejected: {0}")]
    Schedule(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
