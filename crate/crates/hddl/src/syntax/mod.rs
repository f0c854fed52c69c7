//! HDDL surface syntax: tokenizer, parser and canonical printer.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod printer;

pub use ast::{AstDomain, AstFile, AstProblem};
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::{parse_domain, parse_file, parse_problem};
pub use printer::{emit, emit_domain, emit_problem};
