//! File formats, IO and the command-line front end for `qgassess-core`.

pub mod assess;
pub mod baselines;
pub mod error;
pub mod filtering;
pub mod formats;
pub mod render;
pub mod simulate;

pub use error::{CliError, Result};
pub use render::Format;
