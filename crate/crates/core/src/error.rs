use thiserror::Error;

use crate::bitset::BitSet;

/// Errors raised by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("arguments are not pairwise disjoint: {first:?} and {second:?} share {shared:?}")]
    Overlap {
        first: BitSet,
        second: BitSet,
        shared: BitSet,
    },

    #[error("subset refers to a different ground set")]
    ForeignElement,

    #[error("set index {index} is outside a collection of {len} elements")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("duplicate name `{0}`")]
    DuplicateName(String),

    #[error("names must be non-empty")]
    EmptyName,

    #[error("{0} must be non-empty")]
    Empty(&'static str),

    #[error("{what} of size {size} exceeds the limit of {limit}")]
    SizeGuard {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("{what} = {value} is outside [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: i64,
        min: i64,
        max: i64,
    },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("row {row}, column {column}: value {value} is not below cardinality {cardinality}")]
    SampleValueOutOfRange {
        row: usize,
        column: usize,
        value: usize,
        cardinality: usize,
    },

    #[error("self-loop on node `{0}`")]
    SelfLoop(String),

    #[error("duplicate edge `{0}` -> `{1}`")]
    DuplicateEdge(String, String),

    #[error("graph contains a directed cycle")]
    Cycle,

    #[error("graph nodes do not match measure elements: {0}")]
    NodeMismatch(String),

    #[error("observation values are missing subset {0:?}")]
    MissingSubset(BitSet),

    #[error("invalid observation values: {0}")]
    InvalidObservation(String),

    #[error("missing assumption: {0}")]
    MissingAssumption(&'static str),

    #[error("local Markov condition fails (worst violation {worst_bits} bits)")]
    MarkovPrecondition { worst_bits: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("compressor `{name}` failed: {message}")]
    Compressor { name: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

/// Checks that every pair in `sets` is disjoint.
pub(crate) fn ensure_pairwise_disjoint(sets: &[BitSet]) -> Result<()> {
    for (i, &a) in sets.iter().enumerate() {
        for &b in &sets[i + 1..] {
            let shared = a.intersection(b);
            if !shared.is_empty() {
                return Err(Error::Overlap {
                    first: a,
                    second: b,
                    shared,
                });
            }
        }
    }
    Ok(())
}

pub(crate) fn ensure_in_range(what: &'static str, value: usize, min: usize, max: usize) -> Result<()> {
    if value < min || value > max {
        return Err(Error::OutOfRange {
            what,
            value: value as i64,
            min: min as i64,
            max: max as i64,
        });
    }
    Ok(())
}
