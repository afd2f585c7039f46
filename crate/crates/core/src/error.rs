use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("unknown catalog state `{0}`")]
    UnknownState(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("path sum over {slices} slices exceeds the cap of {cap}")]
    PathSumTooLarge { slices: usize, cap: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("training diverged at epoch {epoch}: rms {rms} exceeds 10x the initial {initial}")]
    Diverged {
        epoch: usize,
        rms: f64,
        initial: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
