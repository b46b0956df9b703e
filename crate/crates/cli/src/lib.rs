//! Command-line front end for the TSSP solver: run configuration, study
//! drivers and plot output.

pub mod commands;
pub mod config;
pub mod svg;
