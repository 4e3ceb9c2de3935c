use thiserror::Error;

/// Failure modes shared by every forward and inversion routine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singularity: {0}")]
    Singularity(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("infeasible distances: {0}")]
    InfeasibleDistances(String),

    #[error("ambiguous reconstruction: {0}")]
    Ambiguous(String),

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("resonant band: {0}")]
    ResonantBand(String),

    #[error("inconsistent data: {0}")]
    InconsistentData(String),

    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),

    #[error("incomplete data: {0}")]
    IncompleteData(String),

    #[error("indicator field is empty")]
    EmptyField,

    #[error("degenerate direction: {0}")]
    DirectionDegenerate(String),

    #[error("insufficient frequencies: need J > 2*M_bound, got J = {j}, M_bound = {m_bound}")]
    InsufficientFrequencies { j: usize, m_bound: usize },

    #[error("no signal: the Hankel matrix has numerical rank 0")]
    EmptySignal,

    #[error("degenerate projections: {0}")]
    DegenerateProjection(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Short stable name of the variant, used in CLI diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Singularity(_) => "singularity",
            Error::Validation(_) => "validation",
            Error::DegenerateGeometry(_) => "degenerate-geometry",
            Error::InfeasibleDistances(_) => "infeasible-distances",
            Error::Ambiguous(_) => "ambiguous",
            Error::SingularSystem(_) => "singular-system",
            Error::ResonantBand(_) => "resonant-band",
            Error::InconsistentData(_) => "inconsistent-data",
            Error::InvalidMeasurement(_) => "invalid-measurement",
            Error::IncompleteData(_) => "incomplete-data",
            Error::EmptyField => "empty-field",
            Error::DirectionDegenerate(_) => "direction-degenerate",
            Error::InsufficientFrequencies { .. } => "insufficient-frequencies",
            Error::EmptySignal => "empty-signal",
            Error::DegenerateProjection(_) => "degenerate-projection",
            Error::Parse(_) => "parse",
        }
    }

    /// True for errors caused by malformed input rather than by a failing pipeline.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::Validation(_) | Error::Parse(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
