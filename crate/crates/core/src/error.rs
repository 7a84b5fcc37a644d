use thiserror::Error;

use crate::function::Interval;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("x = {x} lies outside the domain {domain}")]
    OutOfDomain { x: f64, domain: Interval },

    #[error("pole at x = {x} ({what})")]
    Pole { x: f64, what: String },

    #[error("relation is not elliptic: {0}")]
    NotElliptic(String),

    #[error("f(f(x)) differs from x by {deviation:e} at x = {x}")]
    Symmetry { x: f64, deviation: f64 },

    #[error("H^2 - K = {value:e} is negative beyond roundoff")]
    NegativeDiscriminant { value: f64 },

    #[error("at node ({i}, {j}): {source}")]
    AtNode {
        i: usize,
        j: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("evaluation failed at {at}: {source}")]
    Eval {
        at: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("mesh: {0}")]
    Mesh(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn at_node(self, i: usize, j: usize) -> Error {
        Error::AtNode {
            i,
            j,
            source: Box::new(self),
        }
    }

    pub(crate) fn at_sample(self, at: f64) -> Error {
        Error::Eval {
            at,
            source: Box::new(self),
        }
    }
}
