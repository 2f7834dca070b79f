use std::fmt;

use crate::multi_index::MultiIndex;

/// Errors reported by the collocation library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// The symmetric eigenvalue solve behind a Gauss-Hermite rule did not
    /// converge.
    EigenConvergence { points: usize },
    /// A quadrature or interpolation routine received a slice of the wrong
    /// length.
    LengthMismatch { expected: usize, got: usize },
    /// A rule or grid of zero points was requested.
    EmptyRule,
    /// A set of multi-indices is not downward closed: `member` is present
    /// but its predecessor `missing` is not.
    NotMonotone {
        member: MultiIndex,
        missing: MultiIndex,
    },
    /// An index was inserted whose predecessors are not all present.
    InadmissibleInsert { index: MultiIndex },
    /// The model failed at a collocation point.
    Model { point: Vec<f64>, detail: String },
    /// A grid point had no stored value where one was required.
    MissingValue { point: String },
    /// A rectangular envelope exceeded the enumeration cap.
    EnvelopeTooLarge { size: u128, cap: u128 },
    /// The diffusion field produced a non-finite value, typically from an
    /// overflowing exponential at a parameter point of the reported norm.
    NonFiniteField { xi_norm: f64 },
    /// An invalid parameter was passed to a constructor.
    InvalidParameter { what: &'static str, value: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EigenConvergence { points } => write!(
                f,
                "eigenvalue solve for the {points}-point Gauss-Hermite rule did not converge"
            ),
            Error::LengthMismatch { expected, got } => {
                write!(f, "expected a slice of length {expected}, got {got}")
            }
            Error::EmptyRule => write!(f, "a quadrature rule needs at least one point"),
            Error::NotMonotone { member, missing } => write!(
                f,
                "index set is not downward closed: contains {member} but not {missing}"
            ),
            Error::InadmissibleInsert { index } => {
                write!(f, "cannot insert {index}: not all predecessors are present")
            }
            Error::Model { point, detail } => {
                write!(f, "model evaluation failed at {point:?}: {detail}")
            }
            Error::MissingValue { point } => {
                write!(f, "no stored value for grid point {point}")
            }
            Error::EnvelopeTooLarge { size, cap } => {
                write!(f, "envelope of {size} indices exceeds the cap of {cap}")
            }
            Error::NonFiniteField { xi_norm } => write!(
                f,
                "diffusion field is not finite at a parameter point with norm {xi_norm}"
            ),
            Error::InvalidParameter { what, value } => {
                write!(f, "invalid parameter {what} = {value}")
            }
        }
    }
}

impl std::error::Error for Error {}
