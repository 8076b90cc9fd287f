use argbank_core::{NodeId, Violation};
use serde::Serialize;

/// Failures of service operations. Each maps to one HTTP status and a
/// stable `kind` string on the wire.
#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("corpus does not parse: {0}")]
    Parse(#[from] argbank_core::export::ParseError),
    #[error("cannot access {path}: {message}")]
    Io { path: String, message: String },
    #[error("corpus path `{0}` must be relative and stay below the corpus root")]
    BadPath(String),
    #[error("corpus `{0}` is already open")]
    LockConflict(String),
    #[error("no file at `{0}`")]
    UnknownCorpus(String),
    #[error("unknown session `{0}`")]
    UnknownSession(String),
    #[error("unknown sentence `{0}`")]
    UnknownSentence(String),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("empty selection")]
    EmptySelection,
    #[error("selection spans {span} tokens, more than the maximum of {max}")]
    SpanTooLarge { span: usize, max: usize },
    #[error("node {node} is already attached below {parent}")]
    AlreadyAttached { node: NodeId, parent: NodeId },
    #[error("no {0} model loaded")]
    ModelUnavailable(&'static str),
    #[error(transparent)]
    Model(#[from] argbank_models::ModelError),
    #[error("version {given} is stale, current version is {current}")]
    StaleVersion { given: u64, current: u64 },
    #[error("invalid edit: {0}")]
    BadEdit(String),
    #[error("edit leaves an invalid graph: {}", summarize(.0))]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Graph(#[from] argbank_core::Error),
    #[error("invalid query at column {column}: {message}")]
    Query { column: usize, message: String },
}

fn summarize(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

impl ServiceError {
    pub fn kind(&self) -> &'static str {
        match self {
            ServiceError::BadRequest(_) => "bad-request",
            ServiceError::Parse(_) => "parse",
            ServiceError::Io { .. } => "io",
            ServiceError::BadPath(_) => "bad-path",
            ServiceError::LockConflict(_) => "lock-conflict",
            ServiceError::UnknownCorpus(_) => "not-found",
            ServiceError::UnknownSession(_) => "unknown-session",
            ServiceError::UnknownSentence(_) => "unknown-sentence",
            ServiceError::UnknownNode(_) => "unknown-node",
            ServiceError::EmptySelection => "empty-selection",
            ServiceError::SpanTooLarge { .. } => "span-too-large",
            ServiceError::AlreadyAttached { .. } => "already-attached",
            ServiceError::ModelUnavailable(_) => "model-unavailable",
            ServiceError::Model(_) => "model",
            ServiceError::StaleVersion { .. } => "stale-version",
            ServiceError::BadEdit(_) => "bad-edit",
            ServiceError::Invalid(_) => "invalid-graph",
            ServiceError::Graph(_) => "graph",
            ServiceError::Query { .. } => "query",
        }
    }

    pub fn status(&self) -> u16 {
        match self {
            ServiceError::UnknownCorpus(_) | ServiceError::UnknownSession(_) | ServiceError::UnknownSentence(_) => 404,
            ServiceError::LockConflict(_) | ServiceError::StaleVersion { .. } => 409,
            ServiceError::Io { .. } => 500,
            ServiceError::ModelUnavailable(_) => 503,
            ServiceError::BadRequest(_) | ServiceError::BadPath(_) | ServiceError::Query { .. } => 400,
            _ => 422,
        }
    }

    pub fn body(&self) -> ErrorBody {
        let (line, column) = match self {
            ServiceError::Parse(p) => (Some(p.line), Some(p.column)),
            ServiceError::Query { column, .. } => (None, Some(*column)),
            _ => (None, None),
        };
        ErrorBody {
            kind: self.kind(),
            message: self.to_string(),
            line,
            column,
            violations: match self {
                ServiceError::Invalid(v) => v.clone(),
                _ => Vec::new(),
            },
        }
    }

    pub(crate) fn io(path: &std::path::Path, e: std::io::Error) -> ServiceError {
        if e.kind() == std::io::ErrorKind::NotFound {
            return ServiceError::UnknownCorpus(path.display().to_string());
        }
        ServiceError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorBody {
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<Violation>,
}
