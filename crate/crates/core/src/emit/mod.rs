//! Code generators from the typed IR to LaTeX, Python and C++.

mod cpp;
mod latex;
pub mod mangle;
mod python;

use crate::diag::{Code, Diagnostic, Span};
use crate::sema::{TIndex, TypedProgram};

pub use latex::latex_expr;
pub use mangle::{latex_name, spell, Mangler};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OutputTarget {
    Latex,
    Py,
    Cpp,
}

impl OutputTarget {
    pub const ALL: [OutputTarget; 3] = [OutputTarget::Latex, OutputTarget::Py, OutputTarget::Cpp];

    pub fn extension(self) -> &'static str {
        match self {
            OutputTarget::Latex => "tex",
            OutputTarget::Py => "py",
            OutputTarget::Cpp => "cpp",
        }
    }

    pub fn parse(s: &str) -> Option<OutputTarget> {
        match s.to_ascii_lowercase().as_str() {
            "latex" | "tex" => Some(OutputTarget::Latex),
            "py" | "python" => Some(OutputTarget::Py),
            "cpp" | "c++" => Some(OutputTarget::Cpp),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OutputTarget::Latex => "latex",
            OutputTarget::Py => "py",
            OutputTarget::Cpp => "cpp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LatexFraming {
    /// A complete document.
    #[default]
    Standalone,
    /// A bare display block for browser typesetting.
    MathJax,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmittedUnit {
    pub target: OutputTarget,
    pub file_name: String,
    pub text: String,
    pub entry_name: String,
}

/// One subscript the code generators wrote: the source index and the
/// 0-based index expression placed in the output.
#[derive(Debug, Clone, PartialEq)]
pub struct Access {
    pub target: OutputTarget,
    pub source: TIndex,
    pub emitted: EmittedIndex,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EmittedIndex {
    /// `name + offset`, where `name` is the mangled 1-based index variable.
    Shifted(String, i64),
    Literal(u64),
}

impl EmittedIndex {
    pub fn render(&self) -> String {
        match self {
            EmittedIndex::Shifted(v, 0) => v.clone(),
            EmittedIndex::Shifted(v, k) if *k < 0 => format!("{v} - {}", -k),
            EmittedIndex::Shifted(v, k) => format!("{v} + {k}"),
            EmittedIndex::Literal(k) => k.to_string(),
        }
    }
}

/// Whether an emitted access addresses the element the source index names.
pub fn access_is_zero_based(a: &Access, names: &Mangler) -> bool {
    let mut names = names.clone();
    match (&a.source, &a.emitted) {
        (TIndex::Const(k), EmittedIndex::Literal(e)) => *k >= 1 && *e == k - 1,
        (TIndex::Var(v), EmittedIndex::Shifted(e, -1)) => names.name(v) == *e,
        _ => false,
    }
}

/// Entry-point name for a source file stem. Stems that would clash with a
/// keyword or a name the units rely on take a `_` suffix.
pub fn entry_name(stem: &str) -> String {
    let s = spell(stem);
    if python::RESERVED.contains(&s.as_str()) || cpp::RESERVED.contains(&s.as_str()) {
        s + "_"
    } else {
        s
    }
}

/// Emits one unit. `stem` names the source file.
pub fn emit(p: &TypedProgram, target: OutputTarget, stem: &str, framing: LatexFraming) -> Result<EmittedUnit, Diagnostic> {
    emit_logged(p, target, stem, framing).map(|(u, _, _)| u)
}

/// Like [`emit`], also returning every subscript access written and the
/// name table used.
pub fn emit_logged(
    p: &TypedProgram,
    target: OutputTarget,
    stem: &str,
    framing: LatexFraming,
) -> Result<(EmittedUnit, Vec<Access>, Mangler), Diagnostic> {
    let entry = entry_name(stem);
    let (text, log, names) = match target {
        OutputTarget::Latex => (latex::emit(p, framing), Vec::new(), Mangler::new(&[])),
        OutputTarget::Py | OutputTarget::Cpp => {
            if p.has_argmin() {
                let span = first_argmin_span(p);
                return Err(Diagnostic::error(
                    Code::UnsupportedTarget,
                    span,
                    format!("minimization cannot be emitted for the {} target; only LaTeX is available", target.name()),
                ));
            }
            if target == OutputTarget::Py {
                python::emit(p, &entry)
            } else {
                cpp::emit(p, &entry)
            }
        }
    };
    let unit = EmittedUnit { target, file_name: format!("{stem}.{}", target.extension()), text, entry_name: entry };
    Ok((unit, log, names))
}

fn first_argmin_span(p: &TypedProgram) -> Span {
    use crate::sema::{ElemBody, TKind, TStmtKind};
    let mut found = None;
    let mut visit = |e: &crate::sema::TExpr| {
        if found.is_none() && matches!(e.kind, TKind::ArgMin { .. }) {
            found = Some(e.span);
        }
    };
    for s in &p.stmts {
        match &s.kind {
            TStmtKind::Assign(e) => e.walk(&mut visit),
            TStmtKind::Elementwise(rules) => {
                for r in rules {
                    if let ElemBody::Expr(e) = &r.body {
                        e.walk(&mut visit);
                    }
                }
            }
        }
    }
    found.unwrap_or_default()
}

#[cfg(test)]
mod tests;
