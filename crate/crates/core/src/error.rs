use alloc::boxed::Box;
use alloc::string::String;

use thiserror::Error;

use crate::oracle::MomentState;

/// Errors raised by the algebra, model and oracle layers.
///
/// Checkers never return an error for a failed condition; they report it.
/// These variants cover malformed input and internal inconsistencies.
#[derive(Debug, Error)]
pub enum Error {
    #[error("SU(n) needs n >= 2, got n = {0}")]
    Dimension(usize),

    #[error("generator set is not orthonormal: max |Tr(l_i l_j) - 2 delta_ij| = {residual:e}")]
    InconsistentBasis { residual: f64 },

    #[error("{what}: expected {expected}, found {found}")]
    Shape {
        what: String,
        expected: String,
        found: String,
    },

    #[error("{what}: imaginary residue {residue:e} is signal, not rounding")]
    ImaginaryResidue { what: String, residue: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("moment integration diverged after t = {}", .last_valid.t)]
    Diverged { last_valid: Box<MomentState> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn shape_error(what: impl Into<String>, expected: impl Into<String>, found: impl Into<String>) -> Error {
    Error::Shape {
        what: what.into(),
        expected: expected.into(),
        found: found.into(),
    }
}
