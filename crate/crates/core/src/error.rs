use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),
    #[error("row {row} of prediction `{id}` sums to {sum}, not 1")]
    RowNotNormalized { id: String, row: usize, sum: f64 },
    #[error("label space mismatch: expected {expected}, found {found}")]
    LabelSpaceMismatch { expected: String, found: String },
    #[error("duplicate question id `{0}`")]
    DuplicateQuestionId(String),
    #[error("duplicate example id `{0}`")]
    DuplicateExampleId(String),
    #[error("no prediction for question `{0}`")]
    MissingPrediction(String),
    #[error("ensemble size {found} for `{id}` differs from {expected}")]
    EnsembleSizeMismatch { id: String, expected: usize, found: usize },
    #[error("invalid record: {0}")]
    InvalidRecord(String),
    #[error("unknown answer letter `{0}`")]
    UnknownAnswerLetter(String),
    #[error("generated output is not parsed")]
    NotParsed,
    #[error("empty question")]
    EmptyQuestion,
    #[error("empty question set")]
    EmptyQuestionSet,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("label `{0}` is not one of the declared classes")]
    UnknownLabel(String),
    #[error("dev examples lack difficulty labels")]
    MissingDifficultyLabels,
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("posterior kind mismatch: {0}")]
    PosteriorKindMismatch(String),
}
