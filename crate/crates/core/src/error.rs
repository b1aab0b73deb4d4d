use thiserror::Error;

/// Errors raised by samplers, measures and simulation drivers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A rejection proposal had acceptance ratio above one, i.e. the
    /// envelope does not dominate the target at `at`.
    #[error("envelope violation at u = {at}: target/envelope = {ratio}")]
    EnvelopeViolation { at: f64, ratio: f64 },

    /// The caller used an API out of its contract (e.g. non-monotone shells).
    #[error("usage error: {0}")]
    Usage(String),

    /// Band descent hit its configured cap without finding a surviving atom.
    #[error("band descent exceeded {bands} bands at location {location}")]
    BandCap { location: usize, bands: u64 },

    /// Slice loop hit its configured cap before the stopping rule fired.
    #[error("slice loop exceeded {slices} slices")]
    SliceCap { slices: u64 },

    /// Quadrature or root finding failed to reach the requested tolerance.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// The measure family cannot answer the query.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Declarative configuration could not be turned into a model.
    #[error("invalid config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
