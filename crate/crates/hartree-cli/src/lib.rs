//! Batch front end: config parsing, scenarios and artifact formats.

pub mod config;
pub mod io;
pub mod scenarios;
