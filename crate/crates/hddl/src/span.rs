//! Source positions attached to tokens, AST nodes and diagnostics.

use std::fmt;
use std::sync::Arc;

/// A region of an input file, 1-based, end position inclusive.
///
/// Spans are carried by every AST node but deliberately compare equal to each
/// other: structural AST equality (used by the round-trip tests) must not
/// depend on where a node came from. Tests that care about positions inspect
/// the fields directly.
#[derive(Clone)]
pub struct Span {
    pub file: Arc<str>,
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl Span {
    pub fn new(file: Arc<str>, start_line: u32, start_col: u32, end_line: u32, end_col: u32) -> Self {
        debug_assert!((start_line, start_col) <= (end_line, end_col));
        Span { file, start_line, start_col, end_line, end_col }
    }

    /// A span for synthesized nodes that have no source location.
    pub fn synthetic() -> Self {
        Span { file: Arc::from("<synthetic>"), start_line: 1, start_col: 1, end_line: 1, end_col: 1 }
    }

    /// Smallest span covering both `self` and `other` (same file assumed).
    pub fn merge(&self, other: &Span) -> Span {
        let start = (self.start_line, self.start_col).min((other.start_line, other.start_col));
        let end = (self.end_line, self.end_col).max((other.end_line, other.end_col));
        Span { file: self.file.clone(), start_line: start.0, start_col: start.1, end_line: end.0, end_col: end.1 }
    }
}

// All spans are equal: AST equality is structural, spans excluded.
impl PartialEq for Span {
    fn eq(&self, _other: &Span) -> bool {
        true
    }
}
impl Eq for Span {}

impl fmt::Debug for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.start_line, self.start_col)
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.start_line, self.start_col)
    }
}
