//! Command-line front end and HTTP service for `defocus-core`.

pub mod commands;
pub mod exit;
pub mod pipeline;
pub mod report;
pub mod service;
