use std::fmt;

use phishlens::dataset::DatasetError;
use phishlens::ml::MlError;
use phishlens::UrlError;

/// Exit codes: 0 success or safe, 10 deceptive, 2 usage or data error,
/// 1 internal error.
pub const EXIT_OK: u8 = 0;
pub const EXIT_INTERNAL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DECEPTIVE: u8 = 10;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad input files, bad data. Exit 2.
    Usage(String),
    /// Everything else. Exit 1.
    Internal(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn internal(msg: impl fmt::Display) -> Self {
        CliError::Internal(msg.to_string())
    }

    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Internal(_) => CliError::Internal(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<MlError> for CliError {
    fn from(e: MlError) -> Self {
        let name = match &e {
            MlError::SingleClassData => "SingleClassData",
            MlError::UnlabeledRow(_) => "UnlabeledRow",
            MlError::EmptyInput => "EmptyInput",
            MlError::InvalidParam { .. } => "InvalidParam",
            MlError::KindMismatch { .. } => "KindMismatch",
            MlError::CorruptModel(_) => "CorruptModel",
            MlError::SchemaMismatch { .. } => "SchemaMismatch",
            MlError::Io { .. } => "Io",
        };
        CliError::Usage(format!("{name}: {e}"))
    }
}

impl From<UrlError> for CliError {
    fn from(e: UrlError) -> Self {
        CliError::Usage(format!("malformed url: {e}"))
    }
}
