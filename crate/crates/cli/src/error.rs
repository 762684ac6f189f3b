use std::fmt;

use lagrangekit::Error;

/// A failed command, carrying its process exit code.
#[derive(Debug)]
pub enum AppError {
    /// Invalid configuration, flags or missing inputs (exit 2).
    Config(String),
    /// A singular, ill-conditioned or non-unisolvent system (exit 3).
    Numerical(String),
    /// Reports were produced but some checks failed (exit 4).
    Acceptance(String),
    /// Reading or writing files failed (exit 1).
    Io(String),
}

impl AppError {
    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Io(_) => 1,
            AppError::Config(_) => 2,
            AppError::Numerical(_) => 3,
            AppError::Acceptance(_) => 4,
        }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Config(m) => write!(f, "configuration error: {m}"),
            AppError::Numerical(m) => write!(f, "numerical failure: {m}"),
            AppError::Acceptance(m) => write!(f, "acceptance failure: {m}"),
            AppError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<Error> for AppError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::NotUnisolvent { .. }
            | Error::Singular(_)
            | Error::IllConditioned(_)
            | Error::Footprints(_)
            | Error::InsufficientData(_) => AppError::Numerical(message),
            Error::InvalidInput(_)
            | Error::InvalidSpec(_)
            | Error::Domain(_)
            | Error::Unsupported(_)
            | Error::Parse(_) => AppError::Config(message),
            Error::Io(_) => AppError::Io(message),
        }
    }
}
