//! Declarations scan, expression parser and canonical formatter.

pub mod ast;
mod parse;
mod scan;
mod unparse;

pub use ast::*;
pub use parse::parse;
pub use scan::{namespace_functions, scan_declarations, SymbolTable};
pub use unparse::{render_name, render_type, unparse, unparse_cond, unparse_expr};

use crate::diag::Diagnostic;
use crate::lexsrc::{tokenize, SourceFile};

/// Tokenize, scan and parse a normalized source.
pub fn parse_source(src: &SourceFile) -> Result<(ProgramAst, SymbolTable), Diagnostic> {
    let toks = tokenize(src)?;
    let syms = scan_declarations(&toks)?;
    let ast = parse(&toks, &syms)?;
    Ok((ast, syms))
}
