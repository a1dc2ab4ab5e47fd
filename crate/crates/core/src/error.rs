use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {what}: {reason}")]
    Validation { what: &'static str, reason: String },

    #[error("infeasible edge probability {prob} between vertices {i} and {j}")]
    Infeasible { i: usize, j: usize, prob: f64 },

    #[error("embedding dimension {requested} exceeds numerical rank {rank}")]
    Rank { requested: usize, rank: usize },

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("requested elbow {requested} but the profile only yields {available}")]
    ElbowRange { requested: usize, available: usize },

    #[error("mixture fit failed: {0}")]
    Convergence(String),

    #[error("degenerate clustering: {0}")]
    DegenerateClustering(String),

    #[error("row {0} has zero norm")]
    ZeroRow(usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error(
        "exhaustive matching over {k2} blocks exceeds the cap of {cap}; \
         lower the cluster range or raise the cap"
    )]
    MatchSize { k2: usize, cap: usize },

    #[error("trimming failed: {0}")]
    Trim(String),

    #[error("query vertex {0} is unclustered")]
    UnclusteredQuery(usize),

    #[error("no ground-truth match for query vertex {0}")]
    Coverage(usize),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Validation {
            what,
            reason: reason.into(),
        }
    }

    /// Wraps an error with the name of the pipeline stage it came from.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping stage annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.in_stage(stage))
    }
}
