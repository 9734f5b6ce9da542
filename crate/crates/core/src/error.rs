use thiserror::Error;

use crate::model::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed YAML/JSON input.
    #[error("{message}")]
    Parse { message: String, line: Option<usize> },

    /// Well-formed input whose shape is not what the reader expects.
    #[error("{path}: {message}")]
    Schema { path: String, message: String },

    #[error("invalid meta-descriptor: {0}")]
    InvalidModel(ValidationReport),

    #[error("`{from}` depends on unknown component `{to}`")]
    UnknownDependency { from: String, to: String },

    #[error("dependency cycle: {}", .cycle.join(" -> "))]
    DependencyCycle { cycle: Vec<String> },

    #[error("malformed annotation: {message}")]
    Annotation { line: usize, message: String },

    #[error("annotation targets unknown component `{target}`")]
    UnknownTarget { line: usize, target: String },

    #[error("conflicting annotations for `{target}` {directive}: `{first}` (line {first_line}) vs `{second}`")]
    ConflictingAnnotation {
        line: usize,
        first_line: usize,
        target: String,
        directive: String,
        first: String,
        second: String,
    },

    #[error("unrecognized format: {0}")]
    FormatUnknown(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// An error raised while reading `file`.
    #[error("{source}")]
    InFile {
        file: String,
        /// Overrides the line reported by `source`.
        line: Option<usize>,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Source line the error refers to, when one is known.
    pub fn line(&self) -> Option<usize> {
        match self {
            Error::Parse { line, .. } => *line,
            Error::Annotation { line, .. }
            | Error::UnknownTarget { line, .. }
            | Error::ConflictingAnnotation { line, .. } => Some(*line),
            Error::InFile { line, source, .. } => line.or_else(|| source.line()),
            _ => None,
        }
    }

    /// Process exit code used by the CLI: 2 for unreadable input, 3 for model
    /// or annotation errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Schema { .. } | Error::FormatUnknown(_) | Error::Io(_) => 2,
            Error::InvalidModel(_)
            | Error::UnknownDependency { .. }
            | Error::DependencyCycle { .. }
            | Error::Annotation { .. }
            | Error::UnknownTarget { .. }
            | Error::ConflictingAnnotation { .. } => 3,
            Error::InFile { source, .. } => source.exit_code(),
        }
    }

    pub fn in_file(self, file: impl Into<String>) -> Self {
        match self {
            e @ Error::InFile { .. } => e,
            e => Error::InFile {
                file: file.into(),
                line: None,
                source: Box::new(e),
            },
        }
    }

    /// Like [`Error::in_file`], also supplying a line when the error has none.
    pub fn in_file_at(self, file: impl Into<String>, line: Option<usize>) -> Self {
        match self.in_file(file) {
            Error::InFile {
                file,
                line: own,
                source,
            } => Error::InFile {
                file,
                line: own.or(source.line()).or(line),
                source,
            },
            _ => unreachable!(),
        }
    }

    /// File the error refers to, when it was attached with [`Error::in_file`].
    pub fn file(&self) -> Option<&str> {
        match self {
            Error::InFile { file, .. } => Some(file),
            _ => None,
        }
    }

    /// The error with any file context removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::InFile { source, .. } => source.root(),
            e => e,
        }
    }
}

impl From<serde_yaml::Error> for Error {
    fn from(e: serde_yaml::Error) -> Self {
        Error::Parse {
            line: e.location().map(|l| l.line()),
            message: e.to_string(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: Some(e.line()),
            message: e.to_string(),
        }
    }
}
