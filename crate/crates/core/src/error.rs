//! Top-level error with the command-line exit-code mapping.

use std::fmt;
use std::path::Path;

use crate::code::CodeError;
use crate::pairing::PairingError;
use crate::regression::RegressionError;
use crate::spec::SpecError;
use crate::stats::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Parse,
    Data,
    Numeric,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Usage => 1,
            ErrorKind::Parse => 2,
            ErrorKind::Data => 3,
            ErrorKind::Numeric => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Error {
    pub kind: ErrorKind,
    pub message: String,
    /// Pipeline stage that failed, when run as part of a larger job.
    pub stage: Option<&'static str>,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Error {
            kind,
            message: message.into(),
            stage: None,
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Error::new(ErrorKind::Usage, message)
    }

    pub fn data(message: impl Into<String>) -> Self {
        Error::new(ErrorKind::Data, message)
    }

    /// `file:line: message`, or `file: message` without a line.
    pub fn parse(file: &Path, line: Option<usize>, message: impl fmt::Display) -> Self {
        let message = message.to_string();
        let message = strip_line_prefix(&message);
        let at = match line {
            Some(l) => format!("{}:{l}", file.display()),
            None => file.display().to_string(),
        };
        Error::new(ErrorKind::Parse, format!("{at}: {message}"))
    }

    pub fn at_stage(mut self, stage: &'static str) -> Self {
        self.stage.get_or_insert(stage);
        self
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }

    pub fn from_spec(file: &Path, e: SpecError) -> Self {
        Error::parse(file, e.line(), e)
    }

    pub fn from_code(file: &Path, e: CodeError) -> Self {
        Error::parse(file, e.line(), e)
    }

    pub fn from_pairing(file: &Path, e: PairingError) -> Self {
        match e {
            PairingError::OrphanTraceComment(_)
            | PairingError::MalformedTraceComment(_)
            | PairingError::Code(_) => Error::parse(file, e.line(), e),
            _ => Error::data(e.to_string()),
        }
    }
}

fn strip_line_prefix(message: &str) -> &str {
    message
        .strip_prefix("line ")
        .and_then(|rest| {
            let digits = rest.find(|c: char| !c.is_ascii_digit())?;
            (digits > 0).then(|| rest[digits..].strip_prefix(": "))?
        })
        .unwrap_or(message)
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.stage {
            Some(stage) => write!(f, "stage {stage}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for Error {}

impl From<StatsError> for Error {
    fn from(e: StatsError) -> Self {
        let kind = match e {
            StatsError::NonConvergence(_) | StatsError::Domain(_) => ErrorKind::Numeric,
            _ => ErrorKind::Data,
        };
        Error::new(kind, e.to_string())
    }
}

impl From<RegressionError> for Error {
    fn from(e: RegressionError) -> Self {
        match e {
            RegressionError::Numeric(s) => s.into(),
            RegressionError::RankDeficient(_) => Error::new(ErrorKind::Numeric, e.to_string()),
            _ => Error::data(e.to_string()),
        }
    }
}
