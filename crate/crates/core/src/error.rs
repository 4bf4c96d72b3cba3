use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its documented domain.
    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    /// A state vector and a potential have different lengths.
    #[error("dimension mismatch: state has {state} sites, potential has {potential}")]
    DimensionMismatch { state: usize, potential: usize },

    /// A state that must be unit-normalized is not.
    #[error("state is not normalized: |norm - 1| = {deviation:.3e} exceeds 1e-12")]
    NotNormalized { deviation: f64 },

    /// The coupling is too large for the logarithmic cutoff machinery.
    #[error("outside the small-coupling regime: {message}")]
    OutOfRegime { message: String },

    /// No lake is longer than the cutoff, so the variational construction is empty.
    #[error("no lake exceeds the cutoff length {cutoff:.4}")]
    NoContributingLake { cutoff: f64 },

    /// The multiplier search failed to meet its mass target.
    #[error(
        "bisection failed: lambda in [{lo:.6e}, {hi:.6e}] reaches mass {achieved:.12} \
         but the target is {target:.12}"
    )]
    BisectionFailure {
        lo: f64,
        hi: f64,
        achieved: f64,
        target: f64,
    },

    /// Exhaustive search was requested on a lattice too large to enumerate.
    #[error("lattice of {size} sites is too large for exhaustive search (max {max})")]
    LatticeTooLarge { size: usize, max: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            message: message.into(),
        }
    }
}
