use thiserror::Error;

/// Every failure the library can report.
///
/// Variants are grouped by [`ErrorKind`] so front ends can map them onto
/// stable exit codes without matching on each variant.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("node index {index} out of range for graph with {node_count} nodes")]
    IndexOutOfRange { index: usize, node_count: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("graph must have at least one node")]
    EmptyGraph,
    #[error("dimension mismatch: expected {expected}, got {actual} ({context})")]
    DimensionMismatch {
        expected: usize,
        actual: usize,
        context: &'static str,
    },
    #[error("matrix is not symmetric: |a[{row}][{col}] - a[{col}][{row}]| = {gap:e}")]
    NotSymmetric { row: usize, col: usize, gap: f64 },
    #[error("matrix is not positive semidefinite: eigenvalue {0:e}")]
    NotPsd(f64),
    #[error("all eigenvalues are below the zero tolerance")]
    AllZeroSpectrum,
    #[error("feature columns are numerically rank deficient (sigma_min/sigma_max = {ratio:e})")]
    RankDeficientColumns { ratio: f64 },
    #[error("feature matrix has full row rank ({rows} rows, rank {rank}); counts are not identifiable")]
    FullRowRank { rows: usize, rank: usize },
    #[error("observed count at node {node} is {value}; log-count undefined (use a pseudocount)")]
    NonPositiveCount { node: usize, value: f64 },
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("loss diverged: {loss:e} exceeds 1e6 x initial loss {initial:e}; reduce the step size")]
    DivergedLoss { loss: f64, initial: f64 },
    #[error("non-finite iterate at outer round {0}")]
    NonFiniteIterate(usize),
    #[error("no probability field met p^T L p <= {cap} within {attempts} attempts")]
    SmoothnessUnreachable { cap: f64, attempts: usize },
    #[error("invalid probability {value} at index {index}")]
    InvalidProbability { index: usize, value: f64 },
    #[error("true counts overflow: exp({0}) is too large to round to an integer count")]
    CountOverflow(f64),
    #[error("identifiability assumption violated: {0}")]
    AssumptionViolated(String),
    #[error("delta must lie in (0, 1), got {0}")]
    InvalidDelta(f64),
    #[error("eps must lie in (0, 0.25], got {0}")]
    InvalidEps(f64),
    #[error("reference vector has zero l1 norm")]
    ZeroTruthNorm,
    #[error("fold {fold} is empty ({folds} folds over {nodes} nodes)")]
    FoldTooSmall {
        fold: usize,
        folds: usize,
        nodes: usize,
    },
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },
    #[error("counts are missing node {0}")]
    MissingNode(usize),
    #[error("node {0} appears more than once in counts")]
    DuplicateNode(usize),
    #[error("unknown experiment '{0}'")]
    UnknownExperiment(String),
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

/// Coarse error classes; each maps to one process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Assumption,
    Numerical,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            AssumptionViolated(_) | FullRowRank { .. } => ErrorKind::Assumption,
            NotPsd(_)
            | AllZeroSpectrum
            | RankDeficientColumns { .. }
            | DivergedLoss { .. }
            | NonFiniteIterate(_)
            | SmoothnessUnreachable { .. }
            | CountOverflow(_) => ErrorKind::Numerical,
            _ => ErrorKind::Input,
        }
    }

    /// Short machine-readable identifier, e.g. `"missing_node"`.
    pub fn code(&self) -> &'static str {
        use Error::*;
        match self {
            IndexOutOfRange { .. } => "index_out_of_range",
            SelfLoop(_) => "self_loop",
            EmptyGraph => "empty_graph",
            DimensionMismatch { .. } => "dimension_mismatch",
            NotSymmetric { .. } => "not_symmetric",
            NotPsd(_) => "not_psd",
            AllZeroSpectrum => "all_zero_spectrum",
            RankDeficientColumns { .. } => "rank_deficient_columns",
            FullRowRank { .. } => "full_row_rank",
            NonPositiveCount { .. } => "non_positive_count",
            InvalidParameter { .. } => "invalid_parameter",
            DivergedLoss { .. } => "diverged_loss",
            NonFiniteIterate(_) => "non_finite_iterate",
            SmoothnessUnreachable { .. } => "smoothness_unreachable",
            InvalidProbability { .. } => "invalid_probability",
            CountOverflow(_) => "count_overflow",
            AssumptionViolated(_) => "assumption_violated",
            InvalidDelta(_) => "invalid_delta",
            InvalidEps(_) => "invalid_eps",
            ZeroTruthNorm => "zero_truth_norm",
            FoldTooSmall { .. } => "fold_too_small",
            Parse { .. } => "parse_error",
            MissingNode(_) => "missing_node",
            DuplicateNode(_) => "duplicate_node",
            UnknownExperiment(_) => "unknown_experiment",
            Io { .. } => "io_error",
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(expected: usize, actual: usize, context: &'static str) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected,
            actual,
            context,
        })
    }
}
