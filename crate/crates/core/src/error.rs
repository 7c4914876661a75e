use thiserror::Error;

use crate::exprparse::{EvalError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("matrix is singular (det = {det:e})")]
    Singular { det: f64 },

    #[error("matrix is not in SL(2): |det - 1| = {deviation:e} exceeds {tol:e}")]
    NotInSl2 { deviation: f64, tol: f64 },

    #[error("matrix is not in GL+(2): det = {det:e}")]
    NotInGlPlus { det: f64 },

    #[error("direction vector must be nonzero")]
    ZeroVector,

    #[error("direction vector must have unit length (|eta| = {norm})")]
    NonUnitVector { norm: f64 },

    #[error("singular values must satisfy l1*l2 = 1 (got {product})")]
    NotUnimodular { product: f64 },

    #[error("argument {value} outside the domain of {what}")]
    Domain { what: String, value: f64 },

    #[error("energy is not objective/isotropic: |W(Q1 F Q2) - W(F)| = {deviation:e}")]
    NotIsotropic { deviation: f64 },

    #[error("bivariate g is not symmetric: |g(a,b) - g(b,a)| = {deviation:e}")]
    NotSymmetric { deviation: f64 },

    #[error("energy is not isochoric: |W(aF) - W(F)| = {deviation:e}")]
    NotIsochoric { deviation: f64 },

    #[error("cannot convert {from} energy for {to}: {reason}")]
    NotConvertible { from: String, to: String, reason: String },

    #[error("evaluation failed at {var} = {at}: {source}")]
    EvalAt {
        var: &'static str,
        at: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("line {line}: {message}")]
    Definition { line: usize, message: String },

    #[error("unknown catalog entry '{0}'")]
    UnknownEntry(String),

    #[error(transparent)]
    Eval(#[from] EvalError),

    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl Error {
    pub(crate) fn at(self, var: &'static str, at: f64) -> Self {
        Error::EvalAt {
            var,
            at,
            source: Box::new(self),
        }
    }
}
