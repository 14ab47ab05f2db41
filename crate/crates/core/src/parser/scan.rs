//! Pass 1: split the token stream into logical lines and harvest declarations,
//! imports and left-hand-side names.

use std::collections::BTreeSet;

use super::ast::{DimLit, ImportDecl, ParamDecl, ScalarKind, TypeAnn, TypeAnnotation};
use crate::diag::{Code, Diagnostic, Span};
use crate::lexsrc::{tokenize_fragment, Token, TokenKind};

pub const TRIGONOMETRY: [&str; 13] = [
    "sin", "cos", "tan", "asin", "acos", "atan", "sinh", "cosh", "tanh", "atan2", "exp", "log", "sqrt",
];
pub const LINEARALGEBRA: [&str; 3] = ["tr", "det", "vec"];

pub fn namespace_functions(ns: &str) -> Option<&'static [&'static str]> {
    match ns {
        "trigonometry" => Some(&TRIGONOMETRY),
        "linearalgebra" => Some(&LINEARALGEBRA),
        _ => None,
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SymbolTable {
    /// Declared and never assigned, in declaration order.
    pub params: Vec<ParamDecl>,
    /// Declared and assigned.
    pub annotations: Vec<ParamDecl>,
    pub imports: BTreeSet<(String, String)>,
    pub import_decls: Vec<ImportDecl>,
    pub lhs_names: BTreeSet<String>,
    pub functions: BTreeSet<String>,
}

impl SymbolTable {
    pub fn decl(&self, name: &str) -> Option<&ParamDecl> {
        self.params.iter().chain(&self.annotations).find(|d| d.name == name)
    }

    pub fn is_registered(&self, name: &str) -> bool {
        self.decl(name).is_some() || self.lhs_names.contains(name) || self.functions.contains(name)
    }

    pub fn is_function(&self, name: &str) -> bool {
        self.functions.contains(name)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Line {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LineKind {
    Heading,
    Import,
    Decl,
    Stmt,
}

fn is_heading(t: &Token) -> bool {
    t.is_kw("given") || t.is_kw("where")
}

/// Logical lines: newline- or `;`-terminated at bracket depth 0. An unclosed
/// `{` closes at its `otherwise` arm, and `s.t.` blocks join their argmin line.
pub(crate) fn split_lines(toks: &[Token]) -> Vec<Line> {
    let n = toks.len();
    let mut lines = Vec::new();
    let mut i = 0;
    while i < n {
        if toks[i].kind == TokenKind::Newline || toks[i].is_delim(";") {
            i += 1;
            continue;
        }
        let start = i;
        let mut stack: Vec<&str> = Vec::new();
        let mut has_min = false;
        while i < n {
            let t = &toks[i];
            if t.kind == TokenKind::Delim {
                match t.lexeme.as_str() {
                    "(" | "[" | "{" => stack.push(if t.lexeme == "(" { ")" } else if t.lexeme == "[" { "]" } else { "}" }),
                    ")" | "]" | "}" => {
                        stack.pop();
                    }
                    ";" if stack.is_empty() => break,
                    _ => {}
                }
            } else if t.is_kw("otherwise") {
                if stack.last() == Some(&"}") && !toks.get(i + 1).is_some_and(|x| x.is_delim("}")) {
                    stack.pop();
                }
            } else if t.is_kw("argmin") || t.is_kw("min") {
                has_min = true;
            } else if t.kind == TokenKind::Newline && stack.is_empty() {
                break;
            }
            i += 1;
        }
        if has_min {
            let mut j = i;
            while j < n && toks[j].kind == TokenKind::Newline {
                j += 1;
            }
            if j < n && toks[j].is_kw("s.t.") {
                i = j + 1;
                loop {
                    while i < n && toks[i].kind != TokenKind::Newline {
                        i += 1;
                    }
                    let mut k = i;
                    let mut newlines = 0;
                    while k < n && toks[k].kind == TokenKind::Newline {
                        newlines += 1;
                        k += 1;
                    }
                    if k >= n || newlines >= 2 || is_heading(&toks[k]) || toks[k].is_kw("from") {
                        break;
                    }
                    i = k;
                }
            }
        }
        let mut end = i;
        while end > start && toks[end - 1].kind == TokenKind::Newline {
            end -= 1;
        }
        lines.push(Line { start, end });
    }
    lines
}

pub(crate) fn classify(toks: &[Token], lines: &[Line]) -> Result<Vec<(Line, LineKind)>, Diagnostic> {
    let mut out = Vec::new();
    let mut in_decl = false;
    for &line in lines {
        let lt = &toks[line.start..line.end];
        if is_heading(&lt[0]) {
            in_decl = true;
            out.push((Line { start: line.start, end: line.start + 1 }, LineKind::Heading));
            if lt.len() > 1 {
                let rest = Line { start: line.start + 1, end: line.end };
                if parse_decl(&toks[rest.start..rest.end])?.is_none() {
                    return Err(expected_decl(&toks[rest.start]));
                }
                out.push((rest, LineKind::Decl));
            }
        } else if lt[0].is_kw("from") {
            in_decl = false;
            out.push((line, LineKind::Import));
        } else if looks_like_decl(lt) {
            if !in_decl {
                return Err(Diagnostic::error(
                    Code::Parse,
                    lt[0].span,
                    "declaration outside a given/where block",
                ));
            }
            out.push((line, LineKind::Decl));
        } else {
            in_decl = false;
            out.push((line, LineKind::Stmt));
        }
    }
    Ok(out)
}

fn expected_decl(t: &Token) -> Diagnostic {
    Diagnostic::error(Code::Parse, t.span, "expected a declaration `name ∈ type`")
}

fn contiguous(a: &Token, b: &Token) -> bool {
    a.span.end == b.span.start || a.span == b.span
}

/// Leading name tokens: one quoted identifier or a contiguous identifier run,
/// plus an optional subscript. Returns (base name, subscript, tokens used).
pub(crate) fn name_prefix(toks: &[Token]) -> Option<(String, Option<String>, usize)> {
    let first = toks.first()?;
    if first.kind != TokenKind::Ident {
        return None;
    }
    let mut name = first.lexeme.clone();
    let mut k = 1;
    if !first.quoted {
        while k < toks.len()
            && toks[k].kind == TokenKind::Ident
            && !toks[k].quoted
            && contiguous(&toks[k - 1], &toks[k])
        {
            name.push_str(&toks[k].lexeme);
            k += 1;
        }
    }
    let mut sub = None;
    if k < toks.len() && toks[k].kind == TokenKind::Subscript && contiguous(&toks[k - 1], &toks[k]) {
        sub = Some(toks[k].lexeme.clone());
        k += 1;
    }
    Some((name, sub, k))
}

fn looks_like_decl(toks: &[Token]) -> bool {
    match name_prefix(toks) {
        Some((_, _, k)) => toks.get(k).is_some_and(|t| t.is_op("∈") || t.is_delim(":")),
        None => false,
    }
}

pub(crate) fn is_digits(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_digit())
}

pub(crate) fn parse_decl(toks: &[Token]) -> Result<Option<ParamDecl>, Diagnostic> {
    let Some((base, sub, k)) = name_prefix(toks) else {
        return Ok(None);
    };
    let Some(sep) = toks.get(k) else { return Ok(None) };
    if !(sep.is_op("∈") || sep.is_delim(":")) {
        return Ok(None);
    }
    let mut end = toks.len();
    let mut desc = None;
    if let Some(p) = toks[k + 1..].iter().position(|t| t.is_delim(":")) {
        end = k + 1 + p;
        desc = toks[end + 1..]
            .iter()
            .find(|t| t.kind == TokenKind::Description)
            .map(|t| t.lexeme.clone());
        if toks[end + 1..].iter().any(|t| t.kind != TokenKind::Description) {
            return Err(Diagnostic::error(Code::Parse, toks[end].span, "unexpected tokens after description"));
        }
    }
    let mut body = &toks[k + 1..end];
    let mut sparse = false;
    if body.last().is_some_and(|t| t.is_kw("sparse")) {
        sparse = true;
        body = &body[..body.len() - 1];
    }
    if body.is_empty() {
        return Err(Diagnostic::error(Code::Parse, sep.span, "expected a type after the declared name"));
    }
    let mut ann = TypeParser { toks: body, pos: 0 }.full()?;
    ann.sparse = sparse;
    if sparse && !matches!(ann.kind, TypeAnn::Matrix(..)) {
        return Err(Diagnostic::error(Code::Type, ann.span, "only matrices can be sparse"));
    }
    let (name, seq_index) = match sub {
        None => (base, None),
        Some(s) if is_digits(&s) || ann.is_function() => (format!("{base}_{s}"), None),
        Some(s) => {
            if s.chars().count() != 1 {
                return Err(Diagnostic::error(
                    Code::Parse,
                    toks[k - 1].span,
                    "a sequence is declared with exactly one index letter",
                ));
            }
            (base, Some(s))
        }
    };
    let span = toks[0].span.to(toks[toks.len() - 1].span);
    Ok(Some(ParamDecl { name, seq_index, ann, desc, span }))
}

struct TypeParser<'a> {
    toks: &'a [Token],
    pos: usize,
}

impl TypeParser<'_> {
    fn err(&self, msg: &str) -> Diagnostic {
        let span = self
            .toks
            .get(self.pos)
            .or(self.toks.last())
            .map(|t| t.span)
            .unwrap_or_default();
        Diagnostic::error(Code::Parse, span, msg)
    }

    fn full(mut self) -> Result<TypeAnnotation, Diagnostic> {
        let first = self.base()?;
        let mut params = vec![first];
        while self.pos < self.toks.len() && (self.toks[self.pos].is_delim(",") || self.toks[self.pos].is_op("×")) {
            self.pos += 1;
            params.push(self.base()?);
        }
        let t = if self.pos < self.toks.len() && self.toks[self.pos].is_op("→") {
            self.pos += 1;
            let ret = self.base()?;
            let span = params[0].span.to(ret.span);
            TypeAnnotation {
                kind: TypeAnn::Function(params, Box::new(ret)),
                sparse: false,
                span,
            }
        } else if params.len() == 1 {
            params.pop().unwrap()
        } else {
            return Err(self.err("expected '→' in a function type"));
        };
        if self.pos != self.toks.len() {
            return Err(self.err("unexpected token in type annotation"));
        }
        Ok(t)
    }

    fn scalar(&mut self) -> Result<ScalarKind, Diagnostic> {
        let t = self.toks.get(self.pos).ok_or_else(|| self.err("expected ℝ or ℤ"))?;
        let k = if t.is_kw("ℝ") {
            ScalarKind::Real
        } else if t.is_kw("ℤ") {
            ScalarKind::Int
        } else {
            return Err(self.err("expected ℝ or ℤ"));
        };
        self.pos += 1;
        Ok(k)
    }

    fn base(&mut self) -> Result<TypeAnnotation, Diagnostic> {
        let start = self.toks.get(self.pos).map(|t| t.span).unwrap_or_default();
        if self.toks.get(self.pos).is_some_and(|t| t.is_delim("{")) {
            self.pos += 1;
            let mut kinds = vec![self.scalar()?];
            while self.toks.get(self.pos).is_some_and(|t| t.is_op("×")) {
                self.pos += 1;
                kinds.push(self.scalar()?);
            }
            if !self.toks.get(self.pos).is_some_and(|t| t.is_delim("}")) {
                return Err(self.err("expected '}' closing a set type"));
            }
            let span = start.to(self.toks[self.pos].span);
            self.pos += 1;
            return Ok(TypeAnnotation { kind: TypeAnn::Set(kinds), sparse: false, span });
        }
        let kind = self.scalar()?;
        let mut span = start;
        let Some(sup) = self.toks.get(self.pos).filter(|t| t.kind == TokenKind::Superscript) else {
            return Ok(TypeAnnotation { kind: TypeAnn::Scalar(kind), sparse: false, span });
        };
        self.pos += 1;
        span = span.to(sup.span);
        if kind == ScalarKind::Int {
            return Err(Diagnostic::error(Code::Parse, sup.span, "integer vectors and matrices are not supported"));
        }
        let lex = sup.lexeme.as_str();
        let ty = if let Some(inner) = lex.strip_prefix('(').and_then(|s| s.strip_suffix(')')) {
            let toks = tokenize_fragment(inner, sup.span)?;
            let parts: Vec<&[Token]> = toks.split(|t| t.is_op("×")).collect();
            match parts.as_slice() {
                [r, c] => TypeAnn::Matrix(dim_lit(r, sup.span)?, dim_lit(c, sup.span)?),
                [d] => TypeAnn::Vector(dim_lit(d, sup.span)?),
                _ => return Err(Diagnostic::error(Code::Parse, sup.span, "expected ℝ^(rows×cols)")),
            }
        } else {
            let toks = tokenize_fragment(lex, sup.span)?;
            TypeAnn::Vector(dim_lit(&toks, sup.span)?)
        };
        Ok(TypeAnnotation { kind: ty, sparse: false, span })
    }
}

pub(crate) fn parse_type(toks: &[Token]) -> Result<TypeAnnotation, Diagnostic> {
    TypeParser { toks, pos: 0 }.full()
}

fn dim_lit(toks: &[Token], span: Span) -> Result<DimLit, Diagnostic> {
    match toks {
        [t] if t.kind == TokenKind::Number && is_digits(&t.lexeme) => Ok(DimLit::Num(t.lexeme.parse().map_err(
            |_| Diagnostic::error(Code::Parse, span, "dimension literal too large"),
        )?)),
        [t] if t.kind == TokenKind::Ident => Ok(DimLit::Name(t.lexeme.clone())),
        _ => Err(Diagnostic::error(
            Code::Parse,
            span,
            "a dimension must be an integer literal or a name",
        )),
    }
}

fn parse_import(toks: &[Token]) -> Result<ImportDecl, Diagnostic> {
    let span = toks[0].span.to(toks[toks.len() - 1].span);
    let colon = toks
        .iter()
        .position(|t| t.is_delim(":"))
        .ok_or_else(|| Diagnostic::error(Code::Parse, span, "expected ':' after the namespace"))?;
    let ns_toks = &toks[1..colon];
    if ns_toks.is_empty() || ns_toks.iter().any(|t| t.kind != TokenKind::Ident) {
        return Err(Diagnostic::error(Code::Parse, span, "expected a namespace name"));
    }
    let namespace: String = ns_toks.iter().map(|t| t.lexeme.as_str()).collect();
    let ns_span = ns_toks[0].span.to(ns_toks[ns_toks.len() - 1].span);
    let Some(known) = namespace_functions(&namespace) else {
        return Err(Diagnostic::error(
            Code::UnknownNamespace,
            ns_span,
            format!("unknown namespace '{namespace}' (known: trigonometry, linearalgebra)"),
        ));
    };
    let mut names = Vec::new();
    for group in toks[colon + 1..].split(|t| t.is_delim(",")) {
        if group.is_empty() || group.iter().any(|t| t.kind != TokenKind::Ident) {
            return Err(Diagnostic::error(Code::Parse, span, "expected a comma-separated list of function names"));
        }
        let name: String = group.iter().map(|t| t.lexeme.as_str()).collect();
        if !known.contains(&name.as_str()) {
            return Err(Diagnostic::error(
                Code::UnknownNamespace,
                group[0].span.to(group[group.len() - 1].span),
                format!("namespace '{namespace}' has no function '{name}'"),
            ));
        }
        names.push(name);
    }
    Ok(ImportDecl { namespace, names, span })
}

/// Name assigned by a statement line, if it has a top-level `=`.
pub(crate) fn lhs_of(toks: &[Token]) -> Result<Option<(String, Option<String>, usize)>, Diagnostic> {
    let mut depth = 0i32;
    let mut eq = None;
    for (i, t) in toks.iter().enumerate() {
        if t.kind == TokenKind::Delim {
            match t.lexeme.as_str() {
                "(" | "[" | "{" => depth += 1,
                ")" | "]" | "}" => depth -= 1,
                _ => {}
            }
        } else if depth == 0 && t.is_op("=") {
            eq = Some(i);
            break;
        }
    }
    let Some(eq) = eq else { return Ok(None) };
    match name_prefix(&toks[..eq]) {
        Some((name, sub, k)) if k == eq => Ok(Some((name, sub, eq))),
        _ => Err(Diagnostic::error(
            Code::Parse,
            toks[0].span.to(toks[eq].span),
            "left-hand side must be a name, optionally with index letters",
        )),
    }
}

/// Pass 1.
pub fn scan_declarations(toks: &[Token]) -> Result<SymbolTable, Diagnostic> {
    let lines = split_lines(toks);
    let classified = classify(toks, &lines)?;
    let mut decls: Vec<ParamDecl> = Vec::new();
    let mut syms = SymbolTable::default();
    let mut lhs_raw = Vec::new();
    for (line, kind) in &classified {
        let lt = &toks[line.start..line.end];
        match kind {
            LineKind::Heading => {}
            LineKind::Import => {
                let imp = parse_import(lt)?;
                for n in &imp.names {
                    syms.imports.insert((imp.namespace.clone(), n.clone()));
                    syms.functions.insert(n.clone());
                }
                syms.import_decls.push(imp);
            }
            LineKind::Decl => {
                let d = parse_decl(lt)?.expect("classified as declaration");
                if decls.iter().any(|e| e.name == d.name) {
                    return Err(Diagnostic::error(
                        Code::DuplicateDecl,
                        d.span,
                        format!("'{}' is declared more than once", d.name),
                    ));
                }
                decls.push(d);
            }
            LineKind::Stmt => {
                if let Some((name, sub, _)) = lhs_of(lt)? {
                    lhs_raw.push((name, sub));
                }
            }
        }
    }
    for d in &decls {
        if d.ann.is_function() {
            syms.functions.insert(d.name.clone());
        }
    }
    for (name, sub) in lhs_raw {
        let full = match &sub {
            Some(s) if is_digits(s) => format!("{name}_{s}"),
            Some(s) if decls.iter().any(|d| d.name == format!("{name}_{s}")) => format!("{name}_{s}"),
            _ => name,
        };
        syms.lhs_names.insert(full);
    }
    for d in decls {
        if syms.lhs_names.contains(&d.name) {
            syms.annotations.push(d);
        } else {
            syms.params.push(d);
        }
    }
    Ok(syms)
}
