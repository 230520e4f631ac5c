//! Batch front end for the `satqos` library: TOML configuration in, CSV
//! reports out.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod run;

use std::io;

use satqos::QosError;
use thiserror::Error;

pub use config::{parse_config, parse_config_in, Command, Overrides, RunConfig};
pub use run::dispatch;

/// Build identifier echoed in every CSV header.
pub const BUILD_ID: &str = env!("SATQOS_BUILD_ID");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Qos(#[from] QosError),
    #[error("{0}")]
    Io(#[from] io::Error),
}

impl CliError {
    /// Machine-readable category printed with the message.
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Qos(QosError::Domain(_) | QosError::Contract(_)) => "domain",
            CliError::Qos(QosError::Stability { .. }) => "stability",
            CliError::Qos(QosError::Numeric { .. }) => "numeric",
            CliError::Io(_) => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "config" => 2,
            "domain" | "stability" => 3,
            "numeric" => 4,
            _ => 5,
        }
    }
}
