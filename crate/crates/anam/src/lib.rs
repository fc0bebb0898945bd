//! Command-line front end for `anam-core`: configuration files, parameter
//! sweeps with CSV output, and a self-validation suite.

pub mod config;
pub mod runner;
pub mod sweep;
pub mod validate;
