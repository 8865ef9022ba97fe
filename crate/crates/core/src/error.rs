use thiserror::Error;

use crate::arith::Place;
use crate::surface::SpecViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero is not a valid {0}")]
    Zero(&'static str),

    #[error("{0} is not prime")]
    NotPrime(String),

    #[error(
        "primality of {0} cannot be certified: it exceeds the deterministic Miller-Rabin range"
    )]
    PrimalityOutOfRange(String),

    #[error("could not factor {0} at desk scale")]
    Factorization(String),

    #[error("the real place has no valuation")]
    RealPlace,

    #[error("invalid surface specification: {}", display_violations(.0))]
    InvalidSpec(Vec<SpecViolation>),

    #[error("degenerate fiber: p_J({0}) = 0")]
    DegenerateFiber(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("no local point supplied at place {0}")]
    MissingPlace(Place),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal consistency check failed: {0}")]
    Invariant(String),
}

fn display_violations(v: &[SpecViolation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
