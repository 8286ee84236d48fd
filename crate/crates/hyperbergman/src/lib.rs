//! Experiments, file formats and the command-line driver on top of
//! `hyperbergman_core`.

pub mod config;
pub mod experiments;
pub mod io;
pub mod report;
