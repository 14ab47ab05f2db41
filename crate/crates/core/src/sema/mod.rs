//! Type and dimension checking.

mod block;
mod check;
mod dim;
mod ir;
mod types;

pub use block::{infer_block, BlockDims, CellShape};
pub use check::{check, lower_annotation, mul_type, seq_len_var};
pub use dim::{unify_dims, DimExpr, Unify};
pub use ir::*;
pub use types::LaType;

use crate::diag::Diagnostic;
use crate::lexsrc::SourceFile;

/// Tokenize, parse and check in one step.
pub fn check_source(src: &SourceFile) -> Result<TypedProgram, Vec<Diagnostic>> {
    let (ast, _) = crate::parser::parse_source(src).map_err(|d| vec![d])?;
    check(&ast)
}

#[cfg(test)]
mod tests;
