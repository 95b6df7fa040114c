use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Precondition violation on an operation argument.
    #[error("domain error: {0}")]
    Domain(String),
    /// Invalid experiment configuration; names the offending field.
    #[error("config error in field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("i/o error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
