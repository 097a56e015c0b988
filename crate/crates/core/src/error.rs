use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("label set must not be empty")]
    EmptyLabelSet,
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("invalid label `{0}`: labels must be non-empty and free of commas and line breaks")]
    InvalidLabel(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("label sets differ")]
    LabelSetMismatch,
    #[error("relative frequency over an empty prefix")]
    EmptyPrefix,
    #[error("requested prefix of length {requested} but only {available} labels are realized")]
    PrefixTooShort { requested: u64, available: u64 },
    #[error("bad checkpoint schedule: {0}")]
    BadSchedule(String),
    #[error("selection `{0}` selected no positions")]
    EmptySelection(String),
    #[error("paired sequences have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("conditional frequency undefined: label `{0}` never occurs")]
    ConditionUndefined(String),
    #[error("collectives are not combinable")]
    NotCombinable,
    #[error("atom index {0} is not in the space")]
    UnknownAtom(usize),
    #[error("measures live on different spaces")]
    SpaceMismatch,
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("no density: P is not absolutely continuous with respect to Q (atom {0})")]
    NoDensity(usize),
    #[error("observable tables are not induced from shared per-photon values: {0}")]
    StructureViolation(String),
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("setting {0:?} is not a canonical 0 / π/2 pattern")]
    NonCanonicalSetting([f64; 3]),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
