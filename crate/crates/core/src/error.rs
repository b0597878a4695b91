use std::fmt;

use thiserror::Error;

/// Which line of a Cayley table broke the Latin-square law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Row,
    Column,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::Row => f.write_str("row"),
            Axis::Column => f.write_str("column"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("ParseError line={line}: {message}")]
    Parse { line: usize, message: String },

    #[error("BadDimension: expected {expected}, found {found} ({context})")]
    BadDimension {
        expected: usize,
        found: usize,
        context: String,
    },

    #[error("EntryOutOfRange row={row} column={column}: {value} is not below the order {order}")]
    EntryOutOfRange {
        row: usize,
        column: usize,
        value: usize,
        order: usize,
    },

    #[error("NotLatinSquare {axis}={index}: value {value} repeated")]
    NotLatinSquare {
        axis: Axis,
        index: usize,
        value: usize,
    },

    #[error("NoIdentity: element 0 is not a two-sided identity (fails at {element})")]
    NoIdentity { element: usize },

    #[error("CrossLoop: operands belong to different loops")]
    CrossLoop,

    #[error("OrderOverflow: {what} needs {requested}, above the {guard} guard of {limit}")]
    OrderOverflow {
        guard: &'static str,
        what: String,
        requested: u128,
        limit: u128,
    },

    #[error("NotNormal: associator ({h},{y},{x}) = {value} leaves the subloop")]
    NotNormal {
        h: usize,
        y: usize,
        x: usize,
        value: usize,
    },

    #[error("NotNested: element {element} of the inner set is missing from the outer one")]
    NotNested { element: usize },

    #[error("NotCML: the loop violates the commutative Moufang law")]
    NotCml,

    #[error("NotCommutative: {x}*{y} != {y}*{x}")]
    NotCommutative { x: usize, y: usize },

    #[error("NotASubloop: {0}")]
    NotASubloop(String),

    #[error("TrivialLoop: the operation needs a nontrivial loop")]
    TrivialLoop,

    #[error("DegreeMismatch: expected degree {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("NotSubgroup: {0}")]
    NotSubgroup(String),

    #[error("NotNilpotent: ascending central series stops at order {stalled_at} below {order}")]
    NotNilpotent { stalled_at: u128, order: u128 },

    #[error("ChainStalled: step {step} stays at a proper subloop of order {size}")]
    ChainStalled { step: usize, size: usize },

    #[error("InvalidElement: {index} is not below the order {order}")]
    InvalidElement { index: usize, order: usize },

    #[error("InvalidSpec: {0}")]
    InvalidSpec(String),

    #[error("PostconditionFailed: {0}")]
    Postcondition(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
