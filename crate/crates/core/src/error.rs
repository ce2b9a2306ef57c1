use thiserror::Error;

use crate::data::DatumKind;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dataset is empty")]
    EmptyDataset,

    #[error("dataset mixes datum kinds: expected {expected}, found {found} at index {index}")]
    MixedDatumKinds {
        expected: DatumKind,
        found: DatumKind,
        index: usize,
    },

    #[error("datum {index} is not a finite real number")]
    NonFiniteDatum { index: usize },

    #[error("dataset has {d} data, above the lattice capacity d_max = {d_max}")]
    DatasetTooLarge { d: usize, d_max: usize },

    #[error("d_max {requested} exceeds the hard limit {limit}")]
    CapacityLimit { requested: usize, limit: usize },

    #[error("hypothesis `{hypothesis}` ({model}) cannot score {kind} data (datum {index})")]
    KindMismatch {
        hypothesis: String,
        model: &'static str,
        kind: DatumKind,
        index: usize,
    },

    #[error("datum {index} has label {label} but the model declares {categories} categories")]
    LabelOutOfRange {
        index: usize,
        label: u32,
        categories: usize,
    },

    #[error("subset mask {bits:#x} references indices outside a dataset of size {d}")]
    SubsetOutOfRange { bits: u64, d: usize },

    #[error("datum index {index} out of range for dataset of size {d}")]
    IndexOutOfRange { index: usize, d: usize },

    #[error("datum {index} is already in the conditioning subset")]
    DatumInConditioningSet { index: usize },

    #[error("conditioning subset {bits:#x} has probability zero; its predictive is undefined")]
    ZeroProbabilityConditioning { bits: u64 },

    #[error("operation needs at least {needed} data, dataset has {d}")]
    TooFewData { needed: usize, d: usize },

    #[error("leave-out size {m} outside 1..={max}")]
    LeaveOutOfRange { m: usize, max: usize },

    #[error("invalid fold assignment: {0}")]
    InvalidFolds(String),

    #[error("invalid parameter for {model}: {reason}")]
    InvalidParameter { model: &'static str, reason: String },

    #[error("invalid priors: {0}")]
    InvalidPriors(String),

    #[error("comparison needs at least 2 hypotheses, set has {0}")]
    TooFewHypotheses(usize),

    #[error("hypothesis index {index} out of range for a set of {len}")]
    HypothesisOutOfRange { index: usize, len: usize },

    #[error(
        "prior of hypothesis {index} is {prior}; non-relative Bayes factor needs 0 < prior < 1"
    )]
    DegeneratePrior { index: usize, prior: f64 },

    #[error("every hypothesis with positive prior assigns the data probability zero")]
    DegenerateEvidence,

    #[error("Bayes factor is indeterminate: both likelihoods are zero")]
    IndeterminateBayesFactor,

    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),

    #[error("failed to build worker pool: {0}")]
    ThreadPool(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
