use thiserror::Error;

/// Errors raised by the geometry, sampling and estimation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// A query inspects a region that is not covered by the sampled window.
    #[error(
        "query needs a window of radius {needed:.6} around the nearest window center, \
         but the sampled window has radius {available:.6}"
    )]
    Window { needed: f64, available: f64 },

    #[error("word {0:?} is not reduced (two consecutive letters are equal)")]
    NotReduced(Vec<u8>),

    #[error("numerical solver failed: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check(
    cond: bool,
    name: &'static str,
    value: f64,
    reason: &'static str,
) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason,
        })
    }
}
