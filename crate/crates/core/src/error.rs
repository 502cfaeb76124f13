use thiserror::Error;

/// Errors produced by the localization pipeline and the experiment harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Pivoted elimination hit a pivot below the relative rank threshold.
    #[error("singular 3x3 system: pivot {pivot:e} below threshold {threshold:e} (rank-deficient sensor geometry)")]
    SingularMatrix { pivot: f64, threshold: f64 },

    /// A pairing had both range differences at zero and no alternative pairing helped.
    #[error("degenerate range differences: pairing ({k},{j}) has delta_k1 = delta_j1 = 0 and no pairing permutation yields a usable row")]
    DegenerateDeltas { k: usize, j: usize },

    /// The rho_1 quadratic has a genuinely negative discriminant.
    #[error("no real solution for rho_1: discriminant {discriminant:e} is negative (inconsistent range differences)")]
    NoRealSolution { discriminant: f64 },

    /// The rho_1 quadratic degenerated to a linear equation without a unique root.
    #[error("rho_1 equation degenerates to a linear equation with no unique root")]
    DegenerateLinear,

    /// Every root of the rho_1 quadratic was discarded as nonphysical.
    #[error("no physically admissible rho_1 root (all roots negative)")]
    NoCandidates,

    #[error("invalid sensor array: {0}")]
    InvalidArray(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid range differences: {0}")]
    InvalidDeltas(String),

    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),

    /// Scenario sampling kept producing coincident points.
    #[error("scenario sampling failed after {attempts} attempts")]
    DegenerateSampling { attempts: usize },

    #[error("scenario file: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
