//! Diagnostics shared by the parser and the semantic analyzer.
//!
//! Text rendering is `file:line:col: severity: message`; the machine-readable
//! form is one JSON object per line with fields
//! `{file, line, col, severity, code, message}`.

use std::fmt;

use serde::Serialize;

use crate::span::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Warning => write!(f, "warning"),
            Severity::Error => write!(f, "error"),
        }
    }
}

/// One finding about an input file.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Stable machine-readable identifier, e.g. `undeclared-variable`.
    pub code: &'static str,
    pub message: String,
    pub span: Span,
}

impl Diagnostic {
    pub fn error(code: &'static str, span: Span, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, code, message: message.into(), span }
    }

    pub fn warning(code: &'static str, span: Span, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, code, message: message.into(), span }
    }

    /// `file:line:col: severity: message` with optional ANSI color on the severity.
    pub fn render_text(&self, color: bool) -> String {
        let sev = if color {
            match self.severity {
                Severity::Error => "\x1b[31merror\x1b[0m".to_string(),
                Severity::Warning => "\x1b[33mwarning\x1b[0m".to_string(),
            }
        } else {
            self.severity.to_string()
        };
        format!(
            "{}:{}:{}: {}: {}",
            self.span.file, self.span.start_line, self.span.start_col, sev, self.message
        )
    }

    pub fn render_json(&self) -> String {
        #[derive(Serialize)]
        struct Wire<'a> {
            file: &'a str,
            line: u32,
            col: u32,
            severity: Severity,
            code: &'a str,
            message: &'a str,
        }
        serde_json::to_string(&Wire {
            file: &self.span.file,
            line: self.span.start_line,
            col: self.span.start_col,
            severity: self.severity,
            code: self.code,
            message: &self.message,
        })
        .expect("diagnostic serialization cannot fail")
    }
}

/// Ordered collection of diagnostics produced by one pipeline stage.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub items: Vec<Diagnostic>,
}

impl Diagnostics {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, d: Diagnostic) {
        self.items.push(d);
    }

    pub fn error(&mut self, code: &'static str, span: Span, message: impl Into<String>) {
        self.push(Diagnostic::error(code, span, message));
    }

    pub fn warning(&mut self, code: &'static str, span: Span, message: impl Into<String>) {
        self.push(Diagnostic::warning(code, span, message));
    }

    pub fn extend(&mut self, other: Diagnostics) {
        self.items.extend(other.items);
    }

    pub fn has_errors(&self) -> bool {
        self.items.iter().any(|d| d.severity == Severity::Error)
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Diagnostic> {
        self.items.iter()
    }
}
