use std::path::PathBuf;

use crate::snapshot::SnapshotError;

/// Failures of the harness, split by the exit code they map to.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    /// Bad configuration or command-line input.
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot read or write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("CSV output to {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("snapshot {path}: {source}")]
    Snapshot { path: PathBuf, source: SnapshotError },
    /// A run failed numerically (blow-up, failed W solve, …).
    #[error("numerical failure: {0}")]
    Numerical(#[from] dform_core::Error),
}

impl HarnessError {
    /// `1` for configuration and I/O problems, `2` for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Numerical(_) => 2,
            _ => 1,
        }
    }

    pub fn config(e: impl std::fmt::Display) -> Self {
        HarnessError::Config(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_split_numerical_from_everything_else() {
        assert_eq!(HarnessError::config("bad key").exit_code(), 1);
        let io = HarnessError::Io { path: "x".into(), source: std::io::Error::other("gone") };
        assert_eq!(io.exit_code(), 1);
        let num: HarnessError = dform_core::Error::InvalidResolution(3).into();
        assert_eq!(num.exit_code(), 2);
        assert!(num.to_string().starts_with("numerical failure"));
    }
}
