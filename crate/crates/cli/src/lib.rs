//! File formats and run orchestration for the airfoil optimization toolkit.
//!
//! The numerical core is IO-free; everything that touches the filesystem
//! lives here: the flat key=value run configuration, plain-text shape,
//! mesh and solution files, the CSV emitters for convergence, adaptation
//! and training traces, and the checkpoint container for the agent.

pub mod checkpoint;
pub mod config_io;
pub mod csv_io;
pub mod formats;
pub mod runner;
pub mod validate;

use std::fmt;

/// A configuration problem: bad file syntax, unknown key, out-of-range
/// value. Distinguished from runtime failures because the command line
/// maps it to its own exit code.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

impl ConfigError {
    pub fn new(msg: impl Into<String>) -> Self {
        ConfigError(msg.into())
    }
}
