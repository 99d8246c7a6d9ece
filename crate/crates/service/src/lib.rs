//! Command-line and HTTP front end over a claimgraph data directory.

pub mod config;
pub mod http;

pub use config::{RuleDefaults, ServerConfig};
