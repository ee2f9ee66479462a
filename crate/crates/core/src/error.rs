use std::path::PathBuf;

use thiserror::Error;

/// Pipeline stage, used to tag errors surfaced by [`crate::pipeline::run`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Load,
    LengthSampling,
    Embedding,
    GraphClustering,
    Consensus,
    Interpretability,
    Export,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Stage::Load => "load",
            Stage::LengthSampling => "length-sampling",
            Stage::Embedding => "embedding",
            Stage::GraphClustering => "graph-clustering",
            Stage::Consensus => "consensus",
            Stage::Interpretability => "interpretability",
            Stage::Export => "export",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum KGraphError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("row {row}: {message}")]
    MalformedRow { row: usize, message: String },

    #[error("row {row} has fewer than 5 values")]
    RowTooShort { row: usize },

    #[error("series {id} has {len} values, at least 5 are required")]
    SeriesTooShort { id: usize, len: usize },

    #[error("series {id} contains a non-finite value at position {position}")]
    NonFinite { id: usize, position: usize },

    #[error("dataset needs at least 2 series, got {0}")]
    TooFewSeries(usize),

    #[error("{labels} labels for {series} series")]
    LabelCountMismatch { labels: usize, series: usize },

    #[error("subsequence length {length} outside [5, {max}]")]
    LengthOutOfRange { length: usize, max: usize },

    #[error("zero amplitude: noise ratio undefined for a constant series")]
    ZeroAmplitude,

    #[error("series too short for rml: largest admissible length is {upper}, below the minimum of 5")]
    SeriesTooShortForRml { upper: usize },

    #[error("need at least 3 subsequences to fit a projection, got {0}")]
    TooFewSubsequences(usize),

    #[error("degenerate projection at length {length}: sampled subsequences have zero variance")]
    DegenerateProjection { length: usize },

    #[error("no node can be created: every sampled point lies at the origin")]
    EmptyBins,

    #[error("k = {k} exceeds the number of rows ({n})")]
    TooManyClusters { k: usize, n: usize },

    #[error("size mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("cluster {0} is empty")]
    EmptyCluster(usize),

    #[error("threshold {0} outside [0, 1]")]
    InvalidThreshold(f64),

    #[error("graph has no visited node")]
    NoVisitedNodes,

    #[error("{failed} of {total} lengths failed graph construction")]
    TooManyFailedLengths { failed: usize, total: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("[{stage}] {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<KGraphError>,
    },
}

impl KGraphError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        KGraphError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at(self, stage: Stage) -> Self {
        match self {
            already @ KGraphError::Stage { .. } => already,
            other => KGraphError::Stage {
                stage,
                source: Box::new(other),
            },
        }
    }

    /// The innermost error, with any stage tag stripped.
    pub fn root(&self) -> &KGraphError {
        match self {
            KGraphError::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, KGraphError>;
