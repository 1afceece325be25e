use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DiagnosticKind {
    /// Pattern with fewer than two parameters.
    ArityTooSmall,
    /// Parameter declared but not used by any template.
    UnusedParam,
    /// Entry parameter never occurs in the templates.
    UnusedEntry,
    /// Exit parameter never occurs in the templates.
    UnusedExit,
    /// `c(..)` applied to the entry or exit parameter.
    CondOnBoundary,
    /// Template mentions an atom that is not a parameter.
    UndeclaredParam,
    /// Alias pointing at a pattern that does not exist.
    DanglingAlias,
    /// Same atom used twice inside one workflow expression.
    DuplicateAtom,
    DuplicateLabel,
    /// Pattern applied to the wrong number of arguments.
    ArityMismatch,
    UnknownPattern,
    /// Atom with no display name in the model.
    UnaliasedAtom,
    /// Display name declared for an atom no workflow uses.
    UnusedAlias,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub kind: DiagnosticKind,
    /// Pattern name or workflow label the finding belongs to.
    pub subject: String,
    pub message: String,
}

impl Diagnostic {
    pub fn error(kind: DiagnosticKind, subject: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            kind,
            subject: subject.into(),
            message: message.into(),
        }
    }

    pub fn warning(kind: DiagnosticKind, subject: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            kind,
            subject: subject.into(),
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{level}[{:?}] {}: {}", self.kind, self.subject, self.message)
    }
}
