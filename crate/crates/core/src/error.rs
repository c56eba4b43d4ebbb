use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Input violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine failed to converge or lost accuracy.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// No guided mode exists in the requested index window.
    #[error("mode cut off: {0}")]
    ModeCutOff(String),

    /// Density-matrix population leaked into the top Fock level.
    #[error(
        "Fock truncation exceeded: top-level population {top_population:.3e} >= 1e-8; \
         rerun with fock_cutoff >= {suggested_cutoff}"
    )]
    Truncation {
        top_population: f64,
        suggested_cutoff: usize,
    },

    /// Not enough data for the requested statistic.
    #[error("statistics error: {0}")]
    Statistics(String),

    /// Configuration file failed to parse or validate.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
