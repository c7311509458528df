use std::path::PathBuf;

use christoffel::Error as LibError;

/// Process exit codes, one per error class.
pub mod exit {
    pub const OK: u8 = 0;
    pub const USAGE: u8 = 2;
    pub const IO: u8 = 3;
    pub const DATA: u8 = 4;
    pub const BASIS_TOO_LARGE: u8 = 5;
    pub const FIT: u8 = 6;
    pub const NUMERIC: u8 = 7;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Lib(#[from] LibError),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Io { .. } => exit::IO,
            CliError::Lib(e) => lib_code(e),
        }
    }
}

fn lib_code(e: &LibError) -> u8 {
    match e {
        LibError::Row { source, .. } => lib_code(source),
        LibError::Io { .. } => exit::IO,
        LibError::Parse { .. }
        | LibError::Json(_)
        | LibError::DimensionMismatch { .. }
        | LibError::NonFinite { .. }
        | LibError::EmptyDataset
        | LibError::MissingLabels
        | LibError::SingleClass => exit::DATA,
        LibError::BasisTooLarge { .. } => exit::BASIS_TOO_LARGE,
        LibError::SingularMatrix { .. } | LibError::RidgeExhausted { .. } | LibError::SingularKkt => exit::FIT,
        LibError::InvalidParameter(_) => exit::USAGE,
        _ => exit::NUMERIC,
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
