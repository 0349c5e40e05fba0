//! Dataset handling, model persistence, and experiment orchestration for
//! MoAT density estimation. The `moat` binary wraps these; everything here
//! is callable as a library so the test suites drive the same code paths.

pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;
pub mod manifest;
pub mod model_io;

pub use error::CliError;
