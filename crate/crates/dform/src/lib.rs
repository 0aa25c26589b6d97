//! Experiment harness for `dform-core`: run configuration, the `DFL1`
//! snapshot format, CSV output, parallel sweeps and the `dform` command line.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod snapshot;
pub mod sweep;

pub use config::RunConfig;
pub use error::{HarnessError, Result};
