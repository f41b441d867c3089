//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by data loading, model building, fitting, and testing.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv parse error in {path}: {message}")]
    Csv { path: String, message: String },

    #[error("network must have at least 2 nodes, got {0}")]
    TooFewNodes(usize),

    #[error("adjacency matrix is not square: {rows} rows but row {row} has {cols} entries")]
    NonSquareAdjacency { rows: usize, row: usize, cols: usize },

    #[error("adjacency entry at ({row}, {col}) is {value:?}; only 0 and 1 are allowed")]
    NonBinaryEntry { row: usize, col: usize, value: String },

    #[error("undirected adjacency file is asymmetric at ({i}, {j})")]
    AsymmetricAdjacency { i: usize, j: usize },

    #[error("unknown node label or index {label:?} (network has {n} nodes)")]
    UnknownNode { label: String, n: usize },

    #[error("attribute table has {got} rows but the network has {expected} nodes")]
    RowCountMismatch { expected: usize, got: usize },

    #[error("column {column:?} expects numeric values but row {row} holds {token:?}")]
    NonNumericToken { column: String, row: usize, token: String },

    #[error("attribute column {0:?} not found")]
    MissingColumn(String),

    #[error("dyad covariate {name:?} is {rows}x{cols}, expected a square matrix")]
    NonSquareCovariate { name: String, rows: usize, cols: usize },

    #[error("dyad covariate {name:?} holds a non-finite value at ({row}, {col})")]
    NonFiniteCovariate { name: String, row: usize, col: usize },

    #[error("dyad covariate dimension {got} does not match the network size {expected}")]
    CovariateDimensionMismatch { expected: usize, got: usize },

    #[error("model error: {0}")]
    InvalidModel(String),

    #[error("statistic {statistic:?} references missing attribute or covariate {name:?}")]
    MissingReference { statistic: String, name: String },

    #[error("change statistics need i != j, got dyad ({0}, {0})")]
    SelfDyad(usize),

    #[error("exact enumeration supports at most {max} dyads, network has {got}")]
    EnumerationTooLarge { max: usize, got: usize },

    #[error("conditional log-odds became non-finite during simulation")]
    NonFiniteLogOdds,

    #[error(
        "change statistic columns {columns:?} are collinear: X'X condition number {condition:.3e} \
         exceeds {limit:.1e}"
    )]
    CollinearStatistics {
        columns: Vec<String>,
        condition: f64,
        limit: f64,
    },

    #[error("covariance matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error("hypothesis parse error: {0}")]
    HypothesisParse(String),

    #[error("constraints on the edges coefficient are not allowed (it carries a flat prior)")]
    EdgesConstraint,

    #[error("hypothesis {label:?} is internally contradictory: {detail}")]
    ContradictoryHypothesis { label: String, detail: String },

    #[error("duplicate hypothesis label {0:?}")]
    DuplicateLabel(String),

    #[error("pseudolikelihood MLE does not exist (separation or non-convergence after {0} iterations)")]
    MpleDoesNotExist(usize),

    #[error("posterior sampler precondition violated: {0}")]
    SamplerPrecondition(String),

    #[error("proposal tuning failed: acceptance rate {rate:.4} below 0.01 after adaptation")]
    TuningFailure { rate: f64 },

    #[error("sample covariance of the draws is rank deficient")]
    RankDeficientDraws,

    #[error("models are not nested: {0}")]
    NotNested(String),

    #[error("equality transform R S R' is rank deficient")]
    DegenerateTransform,

    #[error("conditioned covariance is degenerate for the order constraints")]
    DegenerateConditioned,

    #[error("Bayes factor inputs must be positive, got {0}")]
    NonPositiveBayesFactor(f64),

    #[error("prior probabilities must be positive and sum to 1")]
    InvalidPriorProbs,

    #[error("simulation tuning failed: {0}")]
    SimulationTuning(String),

    #[error("{0}")]
    Invalid(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by user input (files, configs, hypothesis text)
    /// as opposed to numerical failures.
    pub fn is_user_error(&self) -> bool {
        !matches!(
            self,
            Error::MpleDoesNotExist(_)
                | Error::TuningFailure { .. }
                | Error::RankDeficientDraws
                | Error::DegenerateTransform
                | Error::DegenerateConditioned
                | Error::CollinearStatistics { .. }
                | Error::NonFiniteLogOdds
                | Error::SimulationTuning(_)
                | Error::NotPositiveDefinite
        )
    }
}
