use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid subgraph: {0}")]
    InvalidSubgraph(String),

    #[error("unsupported size: {what} = {size} exceeds the supported maximum {max}")]
    UnsupportedSize {
        what: &'static str,
        size: usize,
        max: usize,
    },

    /// A closed-form expression was evaluated outside its validity range
    /// (a denominator that must be positive is not).
    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),

    #[error("parameters are not in the subcritical region ({0})")]
    NotSubcritical(String),
}
