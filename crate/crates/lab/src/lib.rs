//! Experiment harness around `ergm-core`: configs, file formats, reports,
//! plots and the verification commands.

pub mod config;
pub mod experiments;
pub mod io;
pub mod plot;
pub mod report;
