use cmtio::Error as CoreError;
use serde::Serialize;

/// CLI failure classes, mapped onto exit codes: config/schema 2,
/// numerical 3, I/O 4.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: &'a str,
}

#[derive(Serialize)]
struct ErrorDoc<'a> {
    error: ErrorBody<'a>,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numerical(_) => "numerical",
            CliError::Io(_) => "io",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) | CliError::Io(m) => m,
        }
    }

    /// Machine-readable error document printed to stderr on failure.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&ErrorDoc {
            error: ErrorBody { kind: self.kind(), message: self.message() },
        })
        .expect("error serialization cannot fail")
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            // bad inputs reaching the library from config data
            CoreError::InvalidParams(_)
            | CoreError::Precondition(_)
            | CoreError::DegenerateCalibration => CliError::Config(e.to_string()),
            // runtime numerical failures
            CoreError::NonFiniteResponse { .. }
            | CoreError::SingularSystem { .. }
            | CoreError::Eigensolver(_)
            | CoreError::NonPhysicalCalibration
            | CoreError::NoPeak
            | CoreError::PeakNotBracketed
            | CoreError::CrossingNotBracketed(_)
            | CoreError::AllCandidatesInfeasible { .. } => CliError::Numerical(e.to_string()),
        }
    }
}
