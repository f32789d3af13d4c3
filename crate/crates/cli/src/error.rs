use serde::Serialize;

/// Failures of a run, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Malformed or invalid input (exit 2).
    #[error("{message}")]
    Validation { message: String, pointer: Option<String> },
    /// Numerical, domain or resource failure while running (exit 3).
    #[error("{0}")]
    Runtime(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

#[derive(Serialize)]
struct ErrorJson<'a> {
    error: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pointer: Option<&'a str>,
}

impl CliError {
    pub fn validation(message: impl Into<String>, pointer: Option<&str>) -> Self {
        CliError::Validation { message: message.into(), pointer: pointer.map(str::to_string) }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } => 2,
            CliError::Runtime(_) | CliError::Io(_) => 3,
        }
    }

    /// One-line machine-readable description.
    pub fn to_json(&self) -> String {
        let (kind, pointer) = match self {
            CliError::Validation { pointer, .. } => ("validation", pointer.as_deref()),
            CliError::Runtime(_) => ("runtime", None),
            CliError::Io(_) => ("io", None),
        };
        serde_json::to_string(&ErrorJson { error: kind, message: self.to_string(), pointer }).expect("plain struct")
    }

    /// Attaches a pointer to a core error raised while handling `pointer`.
    pub fn at(e: sconv::Error, pointer: &str) -> Self {
        match e {
            sconv::Error::Validation(m) | sconv::Error::Data(m) => CliError::validation(m, Some(pointer)),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<sconv::Error> for CliError {
    fn from(e: sconv::Error) -> Self {
        match e {
            sconv::Error::Validation(m) | sconv::Error::Data(m) => CliError::validation(m, None),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(format!("csv: {e}"))
    }
}
