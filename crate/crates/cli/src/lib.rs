//! Experiment harness binding the trace-algebra workbench into reproducible
//! desk-scale experiments: configuration, sequence generators, a pipeline
//! runner, and CSV/JSON report emission.

pub mod config;
pub mod generators;
pub mod report;
pub mod runner;
