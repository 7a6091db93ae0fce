use thiserror::Error;

/// Errors produced by beam construction, analysis, design and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation received an argument outside its domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The requested grid truncates a non-negligible fraction of the beam power.
    #[error("grid clips the beam: estimated clipped power fraction {fraction:.3e} exceeds {limit:.1e}")]
    GridClipped { fraction: f64, limit: f64 },

    /// A decomposition origin or sampling path falls outside the sampled grid.
    #[error("origin ({x}, {y}) lies outside the sampled grid")]
    OriginOutsideGrid { x: f64, y: f64 },

    /// Operation requires exactly `expected` vortices.
    #[error("operation requires {expected} vortices, pancake has {got}")]
    WrongVortexCount { expected: usize, got: usize },

    /// Every spectral entry is zero, so weights are undefined.
    #[error("all-zero spectrum: weights are undefined")]
    AllZeroSpectrum,

    /// A closed-form design has no solution for the given parameters.
    #[error("infeasible design: {0}")]
    Infeasible(String),

    /// Requested index is out of range.
    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    /// Sample rate too low for the highest beat frequency.
    #[error("sample rate {got} below Nyquist requirement {required}")]
    NyquistViolation { required: f64, got: f64 },

    /// Signal duration does not span an integer number of beat periods.
    #[error("spectral leakage: duration spans {periods} beat periods, not an integer count")]
    SpectralLeakage { periods: f64 },

    /// Field amplitude along an integration path is too small for a
    /// well-defined phase winding.
    #[error("amplitude below threshold on integration path: winding undefined")]
    AmplitudeBelowThreshold,

    /// The propagation transfer function is under-sampled at this distance.
    #[error("propagation aliasing guard: transfer-function phase step {phase_step:.3} rad exceeds pi at the field bandwidth")]
    AliasingGuard { phase_step: f64 },

    /// An iterative numerical procedure failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Malformed binary or text input.
    #[error("format error: {0}")]
    Format(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
