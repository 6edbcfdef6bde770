//! CLI failures, their exit codes and the machine-readable error record.

use serde::Serialize;
use sgdelta::Error as CoreError;

#[derive(Debug)]
pub enum CliError {
    /// Schema or value problems in the configuration.
    Config(String),
    /// Values outside the domain of the model (existence, causality, CFL).
    Physics(String),
    /// The computation itself failed (blow-up, non-convergence, I/O).
    Runtime(String),
    /// The acceptance suite ran and at least one criterion failed.
    Validation(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.kind(), self.message())
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Config(_) | CliError::Physics(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Physics(_) => "physics",
            CliError::Runtime(_) => "runtime",
            CliError::Validation(_) => "validation",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m)
            | CliError::Physics(m)
            | CliError::Runtime(m)
            | CliError::Validation(m) => m,
        }
    }

    /// One-line JSON record for stderr.
    pub fn record(&self) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            error: &'a str,
            exit_code: i32,
            message: &'a str,
        }
        serde_json::to_string(&Record {
            error: self.kind(),
            exit_code: self.exit_code(),
            message: self.message(),
        })
        .expect("error record serializes")
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::BlowUp { .. }
            | CoreError::NonConvergence(_)
            | CoreError::NoGrowth(_)
            | CoreError::LightCone(_)
            | CoreError::InvalidField(_) => CliError::Runtime(msg),
            CoreError::NoH1Wave { .. }
            | CoreError::Superluminal(_)
            | CoreError::UndefinedCoupling
            | CoreError::UnresolvedMollifier { .. }
            | CoreError::Cfl { .. } => CliError::Physics(msg),
            CoreError::InvalidGrid(_)
            | CoreError::GridMismatch(_)
            | CoreError::InvalidParameter(_) => CliError::Config(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("i/o: {e}"))
    }
}
