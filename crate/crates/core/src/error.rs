use thiserror::Error;

/// A single dataset validation failure, tied to the offending row.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationIssue {
    /// Zero-based row index into the observation list.
    pub row: usize,
    pub message: String,
}

impl std::fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "row {}: {}", self.row, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated (out-of-range parameter,
    /// location outside the domain, index out of bounds, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Dataset-level validation produced one or more per-row issues.
    #[error("dataset validation failed: {}", format_issues(.0))]
    Validation(Vec<ValidationIssue>),

    /// A numerical procedure could not produce a usable result
    /// (singular system, no root in bracket, non-convergence).
    #[error("estimation error: {0}")]
    Estimation(String),

    /// Malformed input file or configuration.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn format_issues(issues: &[ValidationIssue]) -> String {
    let shown: Vec<String> = issues.iter().take(5).map(|i| i.to_string()).collect();
    let mut s = shown.join("; ");
    if issues.len() > 5 {
        s.push_str(&format!("; ... ({} issues total)", issues.len()));
    }
    s
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn estimation(msg: impl Into<String>) -> Self {
        Error::Estimation(msg.into())
    }

    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}
