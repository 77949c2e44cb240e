use std::fmt;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown {kind} class {value:?}; valid classes: {valid}")]
    UnknownClass {
        kind: &'static str,
        value: String,
        valid: String,
    },

    #[error("class {class} does not belong to the {scheme} scheme")]
    SchemeMismatch { scheme: String, class: String },

    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("no member boxes")]
    NoMemberBoxes,

    #[error("{context}: {message}")]
    Parse { context: String, message: String },

    #[error("{path}: {message}")]
    Schema { path: String, message: String },

    #[error("{0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(context: impl fmt::Display, message: impl fmt::Display) -> Self {
        Error::Parse {
            context: context.to_string(),
            message: message.to_string(),
        }
    }

    pub(crate) fn data(message: impl fmt::Display) -> Self {
        Error::Data(message.to_string())
    }
}
