//! Assessment metrics for multiple-choice question generation.
//!
//! Everything in this crate is pure computation over in-memory values and
//! builds without `std` (an allocator is required). File formats, IO and the
//! command-line front end live in the `qgassess` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod baselines;
pub mod corpus;
pub mod entropy;
pub mod error;
pub mod filter;
pub mod metrics;
pub mod predictions;
pub mod refsim;
pub mod text;
pub mod vocab;

pub use entropy::{entropy, LogBase};
pub use error::{Error, Result};
