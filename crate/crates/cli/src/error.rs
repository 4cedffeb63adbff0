use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config, input files or parameters. Exit code 2.
    #[error("{0}")]
    Input(String),
    /// A solver or fit failed numerically. Exit code 3.
    #[error("{0}")]
    Numerical(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn to_json(&self) -> String {
        let kind = match self {
            CliError::Input(_) => "invalid_input",
            CliError::Numerical(_) => "numerical_failure",
        };
        json!({ "error": { "kind": kind, "message": self.to_string() }, "exit_code": self.exit_code() }).to_string()
    }
}

impl From<nldiff::Error> for CliError {
    fn from(e: nldiff::Error) -> Self {
        match e {
            nldiff::Error::InvalidParameter(_) | nldiff::Error::Domain(_) => CliError::Input(e.to_string()),
            nldiff::Error::Accuracy(_) | nldiff::Error::Stability { .. } => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(format!("i/o: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(format!("csv: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(format!("json: {e}"))
    }
}
