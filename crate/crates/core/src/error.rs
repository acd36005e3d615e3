use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// Trial value below the bottom of the spectrum, (m-1)^2 k / 4.
    #[error("lambda = {lambda} is below the spectral floor {floor}")]
    SpectralFloor { lambda: f64, floor: f64 },

    #[error("integration failed near s = {last_s}: {reason}")]
    IntegrationFailure { last_s: f64, reason: String },

    /// A level integral was requested too close to a critical value of r.
    #[error("s = {s} lies within {radius} of the critical level {level}; use annulus quadrature")]
    CriticalLevel { s: f64, level: f64, radius: f64 },

    #[error("the pole lies on the submanifold at this chart point; {0}")]
    PoleSingularity(String),

    #[error("capability not supported: {0}")]
    Capability(String),

    #[error("window extends past the resolvable chart; maximal usable S is {max_outer}")]
    WindowTooWide { max_outer: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
