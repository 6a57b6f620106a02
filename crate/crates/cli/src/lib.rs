//! Command implementations behind the `harmonic-chain` binary.

pub mod commands;
pub mod config;

pub use config::{Format, RunConfig};

pub mod exit {
    pub const OK: i32 = 0;
    /// Check failed (sweep verdict FAIL, verify with failures).
    pub const FAILED: i32 = 1;
    pub const NON_MEMBER: i32 = 2;
    pub const INCONCLUSIVE: i32 = 3;
    /// Malformed initial condition, flags or config.
    pub const USAGE: i32 = 64;
    /// Requested solver does not apply to the initial condition.
    pub const NOT_APPLICABLE: i32 = 65;
    pub const SOFTWARE: i32 = 70;
    pub const IO: i32 = 74;
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: exit::USAGE,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<harmonic_core::Error> for CliError {
    fn from(e: harmonic_core::Error) -> Self {
        use harmonic_core::Error as E;
        let code = match &e {
            E::InvalidSpec(_)
            | E::InvalidArgument(_)
            | E::EmptyGrid
            | E::GridContainsZero
            | E::RegimeViolation { .. }
            | E::WindowTooSmall { .. }
            | E::InsufficientSupport { .. }
            | E::NonFinite { .. }
            | E::Json(_) => exit::USAGE,
            E::NotApplicable { .. } => exit::NOT_APPLICABLE,
            E::Io(_) => exit::IO,
            _ => exit::SOFTWARE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self {
            code: exit::IO,
            message: e.to_string(),
        }
    }
}
