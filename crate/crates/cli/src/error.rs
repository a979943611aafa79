use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error{}: {message}", field.as_ref().map(|f| format!(" in `{f}`")).unwrap_or_default())]
    Config {
        field: Option<String>,
        message: String,
    },

    #[error("runtime failure: {0}")]
    Runtime(String),

    #[error("validation failed: {0}")]
    Validation(String),
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            field: Some(field.into()),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Runtime(_) => 3,
            CliError::Validation(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config { .. } => "config",
            CliError::Runtime(_) => "runtime",
            CliError::Validation(_) => "validation",
        }
    }

    /// One-line machine-readable form written to stderr on failure.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            kind: &'a str,
            #[serde(skip_serializing_if = "Option::is_none")]
            field: Option<&'a str>,
            message: String,
            exit_code: i32,
        }
        #[derive(Serialize)]
        struct Wrapper<'a> {
            error: Body<'a>,
        }
        let field = match self {
            CliError::Config { field, .. } => field.as_deref(),
            _ => None,
        };
        let message = match self {
            CliError::Config { message, .. } => message.clone(),
            CliError::Runtime(m) | CliError::Validation(m) => m.clone(),
        };
        let w = Wrapper {
            error: Body {
                kind: self.kind(),
                field,
                message,
                exit_code: self.exit_code(),
            },
        };
        serde_json::to_string(&w).expect("error body serializes")
    }
}

impl From<hybridmech::Error> for CliError {
    fn from(e: hybridmech::Error) -> Self {
        match e {
            hybridmech::Error::InvalidParameter { name, reason } => CliError::config(name, reason),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("I/O: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
