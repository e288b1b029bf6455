//! Command line and local HTTP service on top of the `phishlens` core.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod history;
pub mod service;
pub mod verdict;

pub use error::CliError;
pub use verdict::{Class, HistoryEntry, UserAction, Verdict, PROTOCOL_VERSION};
