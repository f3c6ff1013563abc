//! IO, configuration, CLI and HTTP service around `taxotrack-core`.

pub use taxotrack_core as core;

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod registry;
pub mod schema;
pub mod service;
