//! Configuration, command implementations and file formats behind the
//! `radial-dirac` binary.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod io;

use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_BLOWUP: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] radial_dirac::Error),
    /// `t` is the last time at which the solution was still finite.
    #[error("numerical blow-up after t = {t}; partial output written")]
    Blowup { t: f64 },
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Blowup { .. } | CliError::Core(radial_dirac::Error::Blowup { .. }) => EXIT_BLOWUP,
            CliError::Verification(_) => EXIT_VERIFICATION,
            _ => EXIT_CONFIG,
        }
    }
}
