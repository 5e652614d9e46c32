//! Experiment driver library: configuration, artifact formats and the
//! pipeline used by the `sinhlab` binary and the acceptance suite.

pub mod config;
pub mod files;
pub mod pipeline;
pub mod verify;
