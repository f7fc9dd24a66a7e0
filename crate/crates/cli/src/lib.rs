//! Command-line front end: configuration, file formats, experiments and reports.

pub mod config;
pub mod experiment;
pub mod ingest;
pub mod report;
pub mod wire;
