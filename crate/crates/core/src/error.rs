use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "quadrature did not converge: value {value:e}, achieved error {achieved:e} (requested {requested:e})"
    )]
    Quadrature {
        value: f64,
        achieved: f64,
        requested: f64,
    },
}
