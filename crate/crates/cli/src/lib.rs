//! File ingestion, report formats, parallel simulation and the `ebnull`
//! command line on top of `ebnull-core`.

pub mod commands;
mod error;
pub mod ingest;
pub mod parallel;
pub mod report;
pub mod tstats;

pub use error::{CliError, Result};
