//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value produced in {0}")]
    NonFinite(String),

    #[error("matrix is numerically singular (condition estimate {cond:.3e} exceeds cap {cap:.3e})")]
    Singular { cond: f64, cap: f64 },

    #[error("pair (A, B) of follower {follower} is not controllable")]
    NotControllable { follower: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("network hypothesis violated: {0}")]
    Hypothesis(String),

    #[error(
        "inconsistent formation offsets for follower {follower}: path through {via_a} gives {offset_a:?}, path through {via_b} gives {offset_b:?}"
    )]
    OffsetInconsistency {
        follower: usize,
        via_a: usize,
        via_b: usize,
        offset_a: Vec<f64>,
        offset_b: Vec<f64>,
    },

    #[error("missing neighbor packet from follower {sender} needed by follower {receiver}")]
    MissingPacket { sender: usize, receiver: usize },

    #[error("rank deficiency for follower {follower}: {what}")]
    RankDeficient { follower: usize, what: String },

    #[error("no leader sample scheduled at t = {0}")]
    Schedule(f64),

    #[error("epoch {epoch}, follower {follower}: {source}")]
    InEpoch {
        epoch: usize,
        follower: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("configuration parse error: {0}")]
    Parse(String),

    #[error("configuration invalid:\n{}", .0.join("\n"))]
    Validation(Vec<String>),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn in_epoch(self, epoch: usize, follower: usize) -> Error {
        Error::InEpoch {
            epoch,
            follower,
            source: Box::new(self),
        }
    }
}
