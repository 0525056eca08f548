use thiserror::Error;

/// Errors raised by estimators, samplers and the experiment front end.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sample exceeds population: requested {requested}, available {available}")]
    SampleExceedsPopulation { requested: usize, available: usize },

    #[error("invalid inclusion probability {value} at position {index}")]
    InvalidInclusionProbability { index: usize, value: f64 },

    #[error("missing {0} labels")]
    MissingLabels(&'static str),

    #[error("partial labeling not allowed: column `{0}` is set on some rows only")]
    PartialLabeling(String),

    #[error("infeasible allocation: {0}")]
    InfeasibleAllocation(String),

    #[error("non-finite value {value} at {context}")]
    NonFinite { value: f64, context: String },

    #[error("proposal-target mismatch: all importance weights are zero or undefined")]
    ProposalTargetMismatch,

    #[error("invalid c: c*Q(x) = {envelope} < P*(x) = {density} at x = {point:?}")]
    InvalidEnvelope {
        point: Vec<f64>,
        envelope: f64,
        density: f64,
    },

    #[error("c too large / mismatch: {accepted} accepted out of {proposals} proposals")]
    AcceptanceTooLow { accepted: u64, proposals: u64 },

    #[error("no dominating c found below ceiling {0}")]
    NoDominatingC(f64),

    #[error("initial point {0:?} has zero target density")]
    InitialPointOutsideSupport(Vec<f64>),

    #[error("density not slice-bounded: stepping out exceeded {0} slices")]
    NotSliceBounded(usize),

    #[error("non-stochastic proposal matrix: row {row} sums to {sum}")]
    NonStochastic { row: usize, sum: f64 },

    #[error("Adler requires Gaussian conditionals (coordinate {0})")]
    NonGaussianConditional(usize),

    #[error("degenerate trace: zero variance")]
    DegenerateTrace,

    #[error("insufficient samples: need at least {required}, got {got}")]
    InsufficientSamples { required: usize, got: usize },

    #[error("non-monotone reference CDF near {0}")]
    NonMonotoneCdf(f64),

    #[error("integration failure at leapfrog step {step}: {what}")]
    IntegrationFailure { step: usize, what: String },

    #[error("unknown density `{name}`; valid names: {valid}")]
    UnknownDensity { name: String, valid: String },

    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("slope fit refused: only {0} valid points (need 3)")]
    FitRefused(usize),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Whether the error stems from bad input or configuration, as opposed to
    /// a failure while a valid computation was running.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::EmptyInput
                | Error::InsufficientData(_)
                | Error::LengthMismatch { .. }
                | Error::InvalidParameter(_)
                | Error::SampleExceedsPopulation { .. }
                | Error::InvalidInclusionProbability { .. }
                | Error::MissingLabels(_)
                | Error::PartialLabeling(_)
                | Error::InfeasibleAllocation(_)
                | Error::InitialPointOutsideSupport(_)
                | Error::NonStochastic { .. }
                | Error::NonGaussianConditional(_)
                | Error::InsufficientSamples { .. }
                | Error::UnknownDensity { .. }
                | Error::Malformed { .. }
                | Error::Io(_)
        )
    }
}
