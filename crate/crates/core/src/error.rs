use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("site {site} out of range for a {n_sites}-site chain")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("capacity exceeded: {what} = {value} exceeds the limit {limit}")]
    Capacity {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("eigensolver failed to converge (realization seed {seed:#018x})")]
    EigenSolver { seed: u64 },

    #[error("numerical range error: {0}")]
    NumericalRange(String),

    #[error(
        "exact sign enumeration supports at most {cap} sites, got {n_sites}; \
         use the greedy heuristic instead"
    )]
    EnumerationCap { n_sites: usize, cap: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
