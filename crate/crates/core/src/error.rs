use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Both pairwise memberships of a pair are zero, so the relativity
    /// quotient is undefined. `pair` carries the matrix position when known.
    #[error("degenerate comparison{}: both pairwise memberships are zero", fmt_pair(.pair))]
    DegenerateComparison { pair: Option<(usize, usize)> },

    #[error("score {value} of route #{index} is not strictly positive")]
    NonPositiveScore { index: usize, value: f64 },

    #[error("no route from {from} to {to}")]
    NoRoute { from: String, to: String },

    #[error("link {a}-{b} is not live")]
    DeadLink { a: String, b: String },

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    pub(crate) fn invariant(message: impl Into<String>) -> Self {
        Error::InvariantViolation(message.into())
    }
}

fn fmt_pair(pair: &Option<(usize, usize)>) -> String {
    match pair {
        Some((i, j)) => format!(" at ({i}, {j})"),
        None => String::new(),
    }
}
