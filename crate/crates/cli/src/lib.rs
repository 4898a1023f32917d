//! Command-line pipeline for the `motioncs` toolkit: phantom generation,
//! retrospective sampling, reconstruction, evaluation and rate sweeps, with
//! the binary `CSQ1`/`CMV1` formats and CSV/JSON/PGM outputs.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

pub use config::{Overrides, RunConfig, SolverKind};
pub use error::{CliError, Result};
