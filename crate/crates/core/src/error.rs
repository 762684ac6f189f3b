use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid kernel spec: {0}")]
    InvalidSpec(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("point set is not unisolvent for the polynomial space: {context} (rank {rank} < {required})")]
    NotUnisolvent {
        rank: usize,
        required: usize,
        context: String,
    },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("ill-conditioned system: estimated condition number {0:e} exceeds the hard limit")]
    IllConditioned(f64),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("{} footprint solve(s) failed: {}", .0.len(), summarize_failures(.0))]
    Footprints(Vec<FootprintFailure>),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

/// One failed local solve, keyed by the center index in the point set.
#[derive(Debug)]
pub struct FootprintFailure {
    pub center: usize,
    pub message: String,
}

fn summarize_failures(failures: &[FootprintFailure]) -> String {
    const SHOWN: usize = 8;
    let mut text = failures
        .iter()
        .take(SHOWN)
        .map(|f| format!("center {}: {}", f.center, f.message))
        .collect::<Vec<_>>()
        .join("; ");
    if failures.len() > SHOWN {
        text.push_str(&format!("; ... and {} more", failures.len() - SHOWN));
    }
    text
}

impl Error {
    /// True for failures caused by the numerics (singular or non-unisolvent systems)
    /// rather than by bad arguments.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotUnisolvent { .. }
                | Error::Singular(_)
                | Error::IllConditioned(_)
                | Error::Footprints(_)
                | Error::InsufficientData(_)
        )
    }
}
