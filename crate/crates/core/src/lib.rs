//! Inferring common ancestors from information measures.

// `!(x >= 0.0)` is used deliberately so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algo;
pub mod bitset;
pub mod dag;
pub mod dist;
pub mod error;
pub mod inference;
pub mod measure;
pub mod numeric;
pub mod oracle;

pub use error::{Error, Result};
