use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A point lies outside the chart or region on which a map is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("map spec parse error: {0}")]
    Spec(String),

    #[error("contract violation: {0}")]
    Contract(String),

    /// Chi and related quantities are only defined for hyperbolic orbits.
    #[error("exponent undefined: {0}")]
    UndefinedExponent(String),

    #[error("saturated separated-set count: {0}")]
    Saturation(String),

    #[error("degenerate crossing: {0}")]
    Degeneracy(String),

    #[error("construction failed: {0}")]
    Construction(String),
}

pub type Result<T> = std::result::Result<T, Error>;
