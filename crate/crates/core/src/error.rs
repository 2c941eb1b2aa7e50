use std::path::PathBuf;

use crate::parser::ParseDiagnostic;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The observation has zero probability under the given belief and action.
    #[error("observation {observation} is impossible after action {action} from this belief")]
    ImpossibleObservation { action: usize, observation: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid belief: {0}")]
    InvalidBelief(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("threshold {0} outside the open interval (0, 1)")]
    InvalidThreshold(f64),

    #[error("cannot take {requested} items from a set of {available}")]
    CountTooLarge { requested: usize, available: usize },

    #[error("convergence metric undefined: previous belief-set value is zero")]
    DegenerateDenominator,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{}", format_diagnostics(.0))]
    Parse(Vec<ParseDiagnostic>),

    #[error("malformed {what} file: {message}")]
    Format { what: &'static str, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

fn format_diagnostics(diags: &[ParseDiagnostic]) -> String {
    let mut out = format!("{} parse diagnostic(s)", diags.len());
    for d in diags {
        out.push_str("\n  ");
        out.push_str(&d.to_string());
    }
    out
}
