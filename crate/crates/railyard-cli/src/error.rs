use std::path::PathBuf;

use thiserror::Error;

/// Everything a command can fail with, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("cannot access {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] railyard_core::Error),
    #[error("replay mismatch: {0}")]
    Replay(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 2 config, 3 divergence, 4 contract violation, 5 numerical failure.
    pub fn exit_code(&self) -> i32 {
        use railyard_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Core(E::Structural(_) | E::Domain(_)) => 2,
            CliError::Core(E::Divergence(_)) => 3,
            CliError::Core(E::Contract { .. }) => 4,
            CliError::Core(E::Numerical(_)) => 5,
            CliError::Replay(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;
    use railyard_core::Error as E;

    #[test]
    fn exit_code_taxonomy() {
        assert_eq!(CliError::config("x").exit_code(), 2);
        assert_eq!(CliError::from(E::Domain("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(E::Divergence("x".into())).exit_code(), 3);
        let contract = E::Contract { op: "AB", step: "round 1".into(), detail: "x".into() };
        let err = CliError::from(contract);
        assert_eq!(err.exit_code(), 4);
        assert!(err.to_string().contains("AB at round 1"));
        assert_eq!(CliError::from(E::Numerical("x".into())).exit_code(), 5);
    }
}
